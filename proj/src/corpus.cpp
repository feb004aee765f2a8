#include "paperrec/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "paperrec/io_util.hpp"

namespace paperrec {

namespace {

using nlohmann::json;

bool has_whitespace(std::string_view s) {
    return std::any_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

[[noreturn]] void line_error(const std::string& source, size_t line, const std::string& what) {
    throw std::runtime_error(source + ":" + std::to_string(line) + ": " + what);
}

std::string require_string(const json& obj, const char* field, const std::string& source,
                           size_t line) {
    auto it = obj.find(field);
    if (it == obj.end() || !it->is_string())
        line_error(source, line, std::string("missing or non-string field '") + field + "'");
    return it->get<std::string>();
}

PaperRecord parse_record(const json& obj, const std::string& source, size_t line) {
    PaperRecord rec;
    rec.id = require_string(obj, "id", source, line);
    if (rec.id.empty() || has_whitespace(rec.id))
        line_error(source, line, "invalid id '" + rec.id + "' (must be non-empty, no whitespace)");

    rec.title = trim(require_string(obj, "title", source, line));
    if (rec.title.empty()) line_error(source, line, "empty title for id '" + rec.id + "'");

    if (auto it = obj.find("keywords"); it != obj.end()) {
        if (!it->is_array()) line_error(source, line, "'keywords' must be an array of strings");
        for (const auto& kw : *it) {
            if (!kw.is_string()) line_error(source, line, "'keywords' must be an array of strings");
            std::string k = trim(kw.get<std::string>());
            if (!k.empty()) rec.keywords.push_back(std::move(k));
        }
    }

    if (auto it = obj.find("abstract"); it != obj.end()) {
        if (!it->is_string()) line_error(source, line, "'abstract' must be a string");
        rec.abstract = trim(it->get<std::string>());
    }

    if (auto it = obj.find("references"); it != obj.end()) {
        if (!it->is_array()) line_error(source, line, "'references' must be an array of strings");
        for (const auto& ref : *it) {
            if (!ref.is_string())
                line_error(source, line, "'references' must be an array of strings");
            std::string r = trim(ref.get<std::string>());
            if (!r.empty() && r != rec.id) rec.references.push_back(std::move(r));
        }
        std::sort(rec.references.begin(), rec.references.end());
        rec.references.erase(std::unique(rec.references.begin(), rec.references.end()),
                             rec.references.end());
    }

    if (auto it = obj.find("topics"); it != obj.end()) {
        if (!it->is_array()) line_error(source, line, "'topics' must be an array of objects");
        for (const auto& t : *it) {
            if (!t.is_object()) line_error(source, line, "'topics' must be an array of objects");
            TopicLabel label;
            label.topic_id = require_string(t, "topic_id", source, line);
            if (label.topic_id.empty()) line_error(source, line, "empty topic_id");
            auto conf = t.find("confidence");
            if (conf == t.end() || !conf->is_number())
                line_error(source, line, "topic missing numeric 'confidence'");
            label.confidence = conf->get<double>();
            if (label.confidence < 0.0 || label.confidence > 1.0)
                line_error(source, line, "topic confidence outside [0,1]");
            if (auto leaf = t.find("is_leaf"); leaf != t.end()) {
                if (!leaf->is_boolean()) line_error(source, line, "'is_leaf' must be a boolean");
                label.is_leaf = leaf->get<bool>();
            }
            rec.topics.push_back(std::move(label));
        }
    }
    return rec;
}

void write_json_string(std::ostream& out, std::string_view s) {
    out << json(s).dump();
}

}  // namespace

Corpus Corpus::from_records(std::vector<PaperRecord> records) {
    Corpus corpus;
    std::sort(records.begin(), records.end(),
              [](const PaperRecord& a, const PaperRecord& b) { return a.id < b.id; });
    corpus.by_id_.reserve(records.size());
    for (uint32_t i = 0; i < records.size(); ++i) {
        auto [it, inserted] = corpus.by_id_.emplace(records[i].id, i);
        (void)it;
        if (!inserted) throw std::runtime_error("duplicate paper id '" + records[i].id + "'");
    }
    corpus.records_ = std::move(records);
    return corpus;
}

std::optional<uint32_t> Corpus::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

uint64_t Corpus::fingerprint() const {
    uint64_t h = fnv1a("paperrec.corpus.v1");
    for (const auto& rec : records_) {
        h = fnv1a(rec.id, h);
        h = fnv1a("\n", h);
    }
    return h;
}

Corpus parse_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read corpus file " + path);
    return parse_corpus(in, path);
}

Corpus parse_corpus(std::istream& in, const std::string& source_name) {
    std::vector<PaperRecord> records;
    std::unordered_map<std::string, size_t> first_line;  // id -> line, for duplicate diagnostics
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            line_error(source_name, lineno, std::string("malformed JSON: ") + e.what());
        }
        if (!obj.is_object()) line_error(source_name, lineno, "line is not a JSON object");
        PaperRecord rec = parse_record(obj, source_name, lineno);
        auto [it, inserted] = first_line.emplace(rec.id, lineno);
        if (!inserted)
            line_error(source_name, lineno,
                       "duplicate id '" + rec.id + "' (first seen on line " +
                           std::to_string(it->second) + ")");
        records.push_back(std::move(rec));
    }
    return Corpus::from_records(std::move(records));
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
    for (const auto& rec : corpus.records()) {
        out << "{\"id\":";
        write_json_string(out, rec.id);
        out << ",\"title\":";
        write_json_string(out, rec.title);
        if (!rec.keywords.empty()) {
            out << ",\"keywords\":[";
            for (size_t i = 0; i < rec.keywords.size(); ++i) {
                if (i) out << ',';
                write_json_string(out, rec.keywords[i]);
            }
            out << ']';
        }
        if (!rec.abstract.empty()) {
            out << ",\"abstract\":";
            write_json_string(out, rec.abstract);
        }
        if (!rec.references.empty()) {
            out << ",\"references\":[";
            for (size_t i = 0; i < rec.references.size(); ++i) {
                if (i) out << ',';
                write_json_string(out, rec.references[i]);
            }
            out << ']';
        }
        if (!rec.topics.empty()) {
            out << ",\"topics\":[";
            for (size_t i = 0; i < rec.topics.size(); ++i) {
                if (i) out << ',';
                const auto& t = rec.topics[i];
                out << "{\"topic_id\":";
                write_json_string(out, t.topic_id);
                out << ",\"confidence\":" << json(t.confidence).dump()
                    << ",\"is_leaf\":" << (t.is_leaf ? "true" : "false") << '}';
            }
            out << ']';
        }
        out << "}\n";
    }
}

CitationIndex::CitationIndex(const Corpus& corpus) {
    const size_t n = corpus.size();
    cites_.resize(n);
    cited_by_.resize(n);
    for (uint32_t i = 0; i < n; ++i) {
        const auto& refs = corpus.record(i).references;
        auto& out = cites_[i];
        out.reserve(refs.size());
        for (const auto& ref : refs) {
            if (auto j = corpus.find(ref)) {
                out.push_back(*j);
            } else {
                ++dangling_;
            }
        }
        std::sort(out.begin(), out.end());
        edges_ += out.size();
        for (uint32_t j : out) cited_by_[j].push_back(i);
    }
    // cited_by_[j] is already sorted: sources visited in ascending ordinal
}

StatsReport corpus_stats(const Corpus& corpus, const CitationIndex& index) {
    StatsReport stats;
    stats.papers = corpus.size();
    stats.citation_edges = index.edge_count();
    stats.dangling_references = index.dangling_references();

    uint64_t total_refs = 0;
    for (uint32_t i = 0; i < corpus.size(); ++i) {
        const auto& out = index.cites(i);
        if (!out.empty()) {
            ++stats.papers_with_references;
            total_refs += out.size();
        }
        // a paper has a co-citation iff some citer of it cites anything else
        for (uint32_t k : index.cited_by(i)) {
            if (index.cites(k).size() >= 2) {
                ++stats.papers_with_cocitation;
                break;
            }
        }
    }
    if (stats.papers > 0) {
        stats.fraction_with_references =
            double(stats.papers_with_references) / double(stats.papers);
        stats.fraction_with_cocitation =
            double(stats.papers_with_cocitation) / double(stats.papers);
    }
    if (stats.papers_with_references > 0)
        stats.mean_references_per_referenced_paper =
            double(total_refs) / double(stats.papers_with_references);
    return stats;
}

}  // namespace paperrec
