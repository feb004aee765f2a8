#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace paperrec {

enum class Method : uint8_t { ccb, cb, both };

struct GradedRecommendation {
    std::string source;
    std::string target;
    Method method = Method::ccb;
    double system_score = 0.0;  // in [0, 1]
    int user_grade = 1;         // in [1, 5]
};

// Fraction of the top min(k, |list|) grades at or above the threshold; the
// list must already be in system-rank order. nullopt for an empty list
// (skipped in aggregation).
std::optional<double> precision_at_k(std::span<const int> grades_by_rank, int threshold, int k);

// Exponential-gain nDCG: gain (2^grade - 1) discounted by log2(rank + 1),
// normalized by the ideal (grade-descending) ordering.
std::optional<double> ndcg(std::span<const int> grades_by_rank);

struct MethodReport {
    // macro averages over (source, method) groups
    double p_at_k_grade3 = 0.0;
    double p_at_k_grade4 = 0.0;
    double ndcg = 0.0;
    // pooled fractions over every pair in the bucket, no truncation;
    // reported alongside so the aggregation choices can be compared
    double pooled_fraction_grade3 = 0.0;
    double pooled_fraction_grade4 = 0.0;
    uint64_t groups = 0;
    uint64_t pairs = 0;
};

struct EvalReport {
    MethodReport ccb;
    MethodReport cb;
    MethodReport combined;
    // histogram[grade-1][bin]: combined-score bins of width 0.1, score 1.0
    // lands in the last bin
    std::array<std::array<uint64_t, 10>, 5> histogram{};
    uint64_t total_pairs = 0;
};

// Canonical survey CSV: header row naming source_id, target_id, method,
// system_score, user_grade (any column order, extra columns ignored). An
// optional mapping renames native headers to the canonical ones, e.g.
// "source_id=PaperId,target_id=RecommendedPaperId". Rows with a blank grade
// are skipped (survey participants could skip pairs); malformed rows and
// out-of-range values throw with the offending line number.
std::vector<GradedRecommendation> load_survey_csv(const std::string& path,
                                                  const std::string& column_map = "");

// Groups pairs by (source, method bucket); pairs graded on both methods count
// in both the ccb and cb buckets and once in combined. Per-group metrics are
// macro-averaged over groups.
EvalReport evaluate_survey(const std::vector<GradedRecommendation>& pairs, int per_source_k = 10);

EvalReport evaluate_survey_file(const std::string& path, int per_source_k = 10,
                                const std::string& column_map = "");

}  // namespace paperrec
