#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "paperrec/clustering.hpp"
#include "paperrec/embedding.hpp"
#include "paperrec/recommend.hpp"

namespace paperrec {

// Everything a stage needs: artifact paths plus the parameter blocks.
// Loadable from a line-oriented key=value file; command-line flags override.
struct PipelineConfig {
    // inputs
    std::string corpus;  // raw line-delimited JSON corpus (ingest input)
    std::string survey;  // graded survey CSV (eval input)
    std::string survey_column_map;

    // artifacts
    std::string corpus_artifact = "artifacts/corpus.jsonl";
    std::string word_vectors = "artifacts/word_vectors.txt";
    std::string embeddings = "artifacts/embeddings.bin";
    std::string cluster_model = "artifacts/cluster_model.bin";
    std::string cocitations = "artifacts/cocitations.tsv";
    std::string assignments = "artifacts/assignments.tsv";
    std::string recommendations = "artifacts/recommendations.tsv";
    std::string stats_report = "artifacts/stats.txt";
    std::string eval_report = "artifacts/eval_report.txt";
    std::string eval_histogram = "artifacts/eval_histogram.csv";

    TrainingParams training;
    ClusterParams cluster;
    MergeParams merge;

    int cocite_top_k = 10;
    int query_k = 10;
    int eval_per_source_k = 10;
    bool train_vectors = true;  // embed --train (false: --load word_vectors)
    std::string query_text;
    int workers = 1;
    uint64_t seed = 1;

    // Applies one "key = value" setting; throws on unknown keys or values
    // that violate a parameter invariant.
    void set(std::string_view key, std::string_view value);
};

PipelineConfig load_config(const std::string& path);

// Runs one pipeline stage: ingest, stats, cocite, embed, cluster, recommend,
// query or eval. Artifacts are written atomically; a missing upstream
// artifact throws an error naming the stage to run first. Counters and
// reports go to `log`.
void run_stage(const std::string& stage, const PipelineConfig& config, std::ostream& log);

}  // namespace paperrec
