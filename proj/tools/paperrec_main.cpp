#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "paperrec/pipeline.hpp"

namespace {

struct StageFlags {
    std::vector<std::pair<std::string, std::string>> overrides;

    void put(const std::string& key, const std::string& value) {
        overrides.emplace_back(key, value);
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"paperrec: batch hybrid paper recommender (co-citation + clustered content "
                 "embeddings)"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "key=value pipeline configuration file");
    std::vector<std::string> sets;
    app.add_option("--set", sets, "override any config key as key=value (repeatable)");
    int workers = 0;
    app.add_option("--workers", workers, "worker thread count (default from config)");
    long long seed = -1;
    app.add_option("--seed", seed, "pipeline seed (default from config)");

    StageFlags flags;

    auto* ingest = app.add_subcommand("ingest", "parse, validate and canonicalize the corpus");
    std::string corpus;
    ingest->add_option("--corpus", corpus, "line-delimited JSON corpus file");

    auto* cocite = app.add_subcommand("cocite", "write per-paper top-k co-citation lists");
    int cocite_top_k = 0;
    cocite->add_option("--top-k", cocite_top_k, "co-cited candidates per paper");

    auto* embed = app.add_subcommand("embed", "fit tf-idf, obtain word vectors, embed papers");
    bool train = false;
    std::string load_vectors;
    embed->add_flag("--train", train, "train word vectors on the corpus");
    embed->add_option("--load", load_vectors, "load word vectors from a text file instead");

    auto* cluster = app.add_subcommand("cluster", "spherical k-means over paper embeddings");
    int cluster_k = 0, cap = 0;
    cluster->add_option("--k", cluster_k, "fallback initial cluster count");
    cluster->add_option("--cap", cap, "cluster size cap for content search");

    auto* recommend = app.add_subcommand("recommend", "merge co-citation and content streams");
    double theta = 0.0, tau = -1.0;
    int top_k = 0;
    recommend->add_option("--theta", theta, "sigmoid slope");
    recommend->add_option("--tau", tau, "sigmoid midpoint");
    recommend->add_option("--top-k", top_k, "recommendations per paper");

    auto* query = app.add_subcommand("query", "rank papers for arbitrary text");
    std::string text;
    int query_k = 0;
    query->add_option("--text", text, "query text");
    query->add_option("--k", query_k, "results to return");

    auto* eval = app.add_subcommand("eval", "score a graded survey CSV");
    std::string survey, column_map;
    int per_source_k = 0;
    eval->add_option("--survey", survey, "graded survey CSV");
    eval->add_option("--map", column_map,
                     "column mapping canonical=native[,...] for non-canonical headers");
    eval->add_option("--per-source-k", per_source_k, "list truncation for P@K");

    app.add_subcommand("stats", "corpus and citation-coverage statistics");

    CLI11_PARSE(app, argc, argv);

    try {
        paperrec::PipelineConfig config;
        if (!config_path.empty()) config = paperrec::load_config(config_path);

        for (const auto& kv : sets) {
            size_t eq = kv.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("--set needs key=value, got '" + kv + "'");
            flags.put(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (workers > 0) flags.put("workers", std::to_string(workers));
        if (seed >= 0) flags.put("seed", std::to_string(seed));

        if (ingest->count("--corpus")) flags.put("corpus", corpus);
        if (cocite->count("--top-k")) flags.put("cocite_top_k", std::to_string(cocite_top_k));
        if (train && !load_vectors.empty())
            throw std::runtime_error("embed: --train and --load are mutually exclusive");
        if (train) flags.put("train_vectors", "true");
        if (!load_vectors.empty()) {
            flags.put("train_vectors", "false");
            flags.put("word_vectors", load_vectors);
        }
        if (cluster->count("--k")) flags.put("k", std::to_string(cluster_k));
        if (cluster->count("--cap")) flags.put("size_cap", std::to_string(cap));
        if (recommend->count("--theta")) flags.put("theta", std::to_string(theta));
        if (recommend->count("--tau")) flags.put("tau", std::to_string(tau));
        if (recommend->count("--top-k")) flags.put("top_k", std::to_string(top_k));
        if (query->count("--text")) flags.put("query_text", text);
        if (query->count("--k")) flags.put("query_k", std::to_string(query_k));
        if (eval->count("--survey")) flags.put("survey", survey);
        if (eval->count("--map")) flags.put("survey_column_map", column_map);
        if (eval->count("--per-source-k"))
            flags.put("eval_per_source_k", std::to_string(per_source_k));

        for (const auto& [key, value] : flags.overrides) config.set(key, value);

        const std::string stage = app.get_subcommands().front()->get_name();
        paperrec::run_stage(stage, config, std::cout);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
