#include "paperrec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "paperrec/io_util.hpp"

namespace paperrec {

std::optional<double> precision_at_k(std::span<const int> grades_by_rank, int threshold, int k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (grades_by_rank.empty()) return std::nullopt;
    const size_t m = std::min(grades_by_rank.size(), size_t(k));
    size_t hits = 0;
    for (size_t i = 0; i < m; ++i)
        if (grades_by_rank[i] >= threshold) ++hits;
    return double(hits) / double(m);
}

std::optional<double> ndcg(std::span<const int> grades_by_rank) {
    if (grades_by_rank.empty()) return std::nullopt;
    auto gain = [](int grade) { return std::exp2(double(grade)) - 1.0; };
    double dcg = 0.0;
    for (size_t r = 0; r < grades_by_rank.size(); ++r)
        dcg += gain(grades_by_rank[r]) / std::log2(double(r) + 2.0);
    std::vector<int> ideal(grades_by_rank.begin(), grades_by_rank.end());
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double idcg = 0.0;
    for (size_t r = 0; r < ideal.size(); ++r)
        idcg += gain(ideal[r]) / std::log2(double(r) + 2.0);
    return dcg / idcg;  // idcg > 0: grades are at least 1
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> cols;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '"') {
            if (quoted && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else {
                quoted = !quoted;
            }
        } else if (c == ',' && !quoted) {
            cols.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cols.push_back(cur);
    return cols;
}

std::string lower(std::string s) {
    for (char& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

[[noreturn]] void row_error(const std::string& path, size_t line, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

Method parse_method(const std::string& raw, const std::string& path, size_t line) {
    std::string m = lower(trim(raw));
    if (m == "ccb") return Method::ccb;
    if (m == "cb") return Method::cb;
    if (m == "both") return Method::both;
    row_error(path, line, "unknown method '" + raw + "' (expected ccb, cb or both)");
}

}  // namespace

std::vector<GradedRecommendation> load_survey_csv(const std::string& path,
                                                  const std::string& column_map) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read survey file " + path);

    // canonical name -> native header name (defaults to identity)
    std::map<std::string, std::string> native = {{"source_id", "source_id"},
                                                 {"target_id", "target_id"},
                                                 {"method", "method"},
                                                 {"system_score", "system_score"},
                                                 {"user_grade", "user_grade"}};
    if (!column_map.empty()) {
        size_t pos = 0;
        while (pos < column_map.size()) {
            size_t comma = column_map.find(',', pos);
            std::string item = column_map.substr(
                pos, comma == std::string::npos ? std::string::npos : comma - pos);
            pos = comma == std::string::npos ? column_map.size() : comma + 1;
            size_t eq = item.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("bad column mapping entry '" + item +
                                         "' (expected canonical=native)");
            std::string canonical = trim(item.substr(0, eq));
            if (!native.count(canonical))
                throw std::runtime_error("unknown canonical column '" + canonical + "'");
            native[canonical] = trim(item.substr(eq + 1));
        }
    }

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty survey file");
    auto headers = split_csv_row(line);
    std::map<std::string, int> column;
    for (size_t i = 0; i < headers.size(); ++i) column[lower(trim(headers[i]))] = int(i);
    std::map<std::string, int> at;
    for (const auto& [canonical, name] : native) {
        auto it = column.find(lower(name));
        if (it == column.end())
            throw std::runtime_error(path + ": header has no column '" + name + "' for " +
                                     canonical);
        at[canonical] = it->second;
    }

    std::vector<GradedRecommendation> pairs;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cols = split_csv_row(line);
        auto field = [&](const std::string& canonical) -> std::string {
            int idx = at[canonical];
            if (idx >= int(cols.size()))
                row_error(path, lineno, "row has too few columns for '" + canonical + "'");
            return trim(cols[idx]);
        };
        std::string grade_text = field("user_grade");
        if (grade_text.empty()) continue;  // participant skipped this pair

        GradedRecommendation rec;
        rec.source = field("source_id");
        rec.target = field("target_id");
        if (rec.source.empty() || rec.target.empty())
            row_error(path, lineno, "empty source or target id");
        rec.method = parse_method(field("method"), path, lineno);
        try {
            size_t used = 0;
            rec.system_score = std::stod(field("system_score"), &used);
            if (used != field("system_score").size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            row_error(path, lineno, "malformed system_score '" + field("system_score") + "'");
        }
        if (rec.system_score < 0.0 || rec.system_score > 1.0)
            row_error(path, lineno, "system_score outside [0,1]");
        try {
            size_t used = 0;
            rec.user_grade = std::stoi(grade_text, &used);
            if (used != grade_text.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            row_error(path, lineno, "malformed user_grade '" + grade_text + "'");
        }
        if (rec.user_grade < 1 || rec.user_grade > 5)
            row_error(path, lineno, "user_grade outside [1,5]");
        pairs.push_back(std::move(rec));
    }
    return pairs;
}

namespace {

MethodReport bucket_report(const std::vector<const GradedRecommendation*>& bucket,
                           int per_source_k) {
    MethodReport report;
    report.pairs = bucket.size();
    if (bucket.empty()) return report;

    std::map<std::string, std::vector<const GradedRecommendation*>> groups;
    for (const auto* rec : bucket) groups[rec->source].push_back(rec);

    double p3 = 0.0, p4 = 0.0, nd = 0.0;
    uint64_t hits3 = 0, hits4 = 0;
    for (auto& [source, rows] : groups) {
        (void)source;
        std::sort(rows.begin(), rows.end(),
                  [](const GradedRecommendation* a, const GradedRecommendation* b) {
                      if (a->system_score != b->system_score)
                          return a->system_score > b->system_score;
                      return a->target < b->target;
                  });
        std::vector<int> grades;
        grades.reserve(rows.size());
        for (const auto* rec : rows) {
            grades.push_back(rec->user_grade);
            if (rec->user_grade >= 3) ++hits3;
            if (rec->user_grade >= 4) ++hits4;
        }
        p3 += *precision_at_k(grades, 3, per_source_k);
        p4 += *precision_at_k(grades, 4, per_source_k);
        nd += *ndcg(grades);
    }
    report.groups = groups.size();
    report.p_at_k_grade3 = p3 / double(groups.size());
    report.p_at_k_grade4 = p4 / double(groups.size());
    report.ndcg = nd / double(groups.size());
    report.pooled_fraction_grade3 = double(hits3) / double(bucket.size());
    report.pooled_fraction_grade4 = double(hits4) / double(bucket.size());
    return report;
}

}  // namespace

EvalReport evaluate_survey(const std::vector<GradedRecommendation>& pairs, int per_source_k) {
    if (per_source_k < 1) throw std::invalid_argument("per_source_k must be >= 1");
    EvalReport report;
    report.total_pairs = pairs.size();

    std::vector<const GradedRecommendation*> ccb, cb, all;
    for (const auto& rec : pairs) {
        if (rec.user_grade < 1 || rec.user_grade > 5)
            throw std::invalid_argument("user_grade outside [1,5]");
        if (rec.system_score < 0.0 || rec.system_score > 1.0)
            throw std::invalid_argument("system_score outside [0,1]");
        all.push_back(&rec);
        // pairs surfaced by both methods count toward each method bucket
        if (rec.method != Method::cb) ccb.push_back(&rec);
        if (rec.method != Method::ccb) cb.push_back(&rec);
        int bin = std::min(int(rec.system_score * 10.0), 9);
        ++report.histogram[rec.user_grade - 1][bin];
    }
    report.ccb = bucket_report(ccb, per_source_k);
    report.cb = bucket_report(cb, per_source_k);
    report.combined = bucket_report(all, per_source_k);
    return report;
}

EvalReport evaluate_survey_file(const std::string& path, int per_source_k,
                                const std::string& column_map) {
    return evaluate_survey(load_survey_csv(path, column_map), per_source_k);
}

}  // namespace paperrec
