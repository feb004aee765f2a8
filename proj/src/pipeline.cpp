#include "paperrec/pipeline.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "paperrec/cocitation.hpp"
#include "paperrec/eval.hpp"
#include "paperrec/io_util.hpp"

namespace paperrec {

namespace {

int64_t to_int(std::string_view key, std::string_view value) {
    int64_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw std::runtime_error("invalid integer for " + std::string(key) + ": '" +
                                 std::string(value) + "'");
    return out;
}

double to_double(std::string_view key, std::string_view value) {
    try {
        size_t used = 0;
        double out = std::stod(std::string(value), &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw std::runtime_error("invalid number for " + std::string(key) + ": '" +
                                 std::string(value) + "'");
    }
}

bool to_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw std::runtime_error("invalid boolean for " + std::string(key) + ": '" +
                             std::string(value) + "'");
}

int positive_int(std::string_view key, std::string_view value) {
    int64_t v = to_int(key, value);
    if (v < 1) throw std::runtime_error(std::string(key) + " must be >= 1");
    return int(v);
}

void require_artifact(const std::string& path, const std::string& producer) {
    if (!file_exists(path))
        throw std::runtime_error("missing artifact " + path + "; run " + producer + " first");
}

}  // namespace

void PipelineConfig::set(std::string_view key, std::string_view value) {
    std::string v(value);
    if (key == "corpus") corpus = v;
    else if (key == "survey") survey = v;
    else if (key == "survey_column_map") survey_column_map = v;
    else if (key == "corpus_artifact") corpus_artifact = v;
    else if (key == "word_vectors") word_vectors = v;
    else if (key == "embeddings") embeddings = v;
    else if (key == "cluster_model") cluster_model = v;
    else if (key == "cocitations") cocitations = v;
    else if (key == "assignments") assignments = v;
    else if (key == "recommendations") recommendations = v;
    else if (key == "stats_report") stats_report = v;
    else if (key == "eval_report") eval_report = v;
    else if (key == "eval_histogram") eval_histogram = v;
    else if (key == "embedding_size") training.embedding_size = positive_int(key, value);
    else if (key == "window") training.window = positive_int(key, value);
    else if (key == "train_iterations") training.max_iterations = positive_int(key, value);
    else if (key == "min_count") training.min_count = positive_int(key, value);
    else if (key == "negatives") training.negatives = positive_int(key, value);
    else if (key == "subsample") {
        training.subsample = to_double(key, value);
        if (training.subsample < 0.0) throw std::runtime_error("subsample must be >= 0");
    } else if (key == "skipgram") training.skipgram = to_bool(key, value);
    else if (key == "k") cluster.initial_k = positive_int(key, value);
    else if (key == "cluster_iterations") cluster.max_iterations = positive_int(key, value);
    else if (key == "min_error") {
        cluster.min_error = to_double(key, value);
        if (!(cluster.min_error > 0.0)) throw std::runtime_error("min_error must be > 0");
    } else if (key == "size_cap") cluster.size_cap = positive_int(key, value);
    else if (key == "max_samples_per_topic")
        cluster.max_samples_per_topic = positive_int(key, value);
    else if (key == "min_topic_confidence") {
        cluster.min_topic_confidence = to_double(key, value);
        if (cluster.min_topic_confidence < 0.0 || cluster.min_topic_confidence > 1.0)
            throw std::runtime_error("min_topic_confidence must be in [0,1]");
    } else if (key == "theta") {
        merge.theta = to_double(key, value);
        if (!(merge.theta > 0.0)) throw std::runtime_error("theta must be > 0");
    } else if (key == "tau") {
        merge.tau = to_double(key, value);
        if (merge.tau < 0.0) throw std::runtime_error("tau must be >= 0");
    } else if (key == "top_k") merge.top_k = positive_int(key, value);
    else if (key == "cocite_top_k") cocite_top_k = positive_int(key, value);
    else if (key == "query_k") query_k = positive_int(key, value);
    else if (key == "eval_per_source_k") eval_per_source_k = positive_int(key, value);
    else if (key == "train_vectors") train_vectors = to_bool(key, value);
    else if (key == "query_text") query_text = v;
    else if (key == "workers") workers = positive_int(key, value);
    else if (key == "seed") seed = uint64_t(to_int(key, value));
    else throw std::runtime_error("unknown config key '" + std::string(key) + "'");
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file " + path);
    PipelineConfig config;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key = value");
        try {
            config.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return config;
}

namespace {

void log_stats(std::ostream& log, const StatsReport& stats) {
    std::ostringstream out;
    out << "papers = " << stats.papers << '\n'
        << "papers_with_references = " << stats.papers_with_references << '\n'
        << "fraction_with_references = " << format_score(stats.fraction_with_references) << '\n'
        << "mean_references_per_referenced_paper = "
        << format_score(stats.mean_references_per_referenced_paper) << '\n'
        << "papers_with_cocitation = " << stats.papers_with_cocitation << '\n'
        << "fraction_with_cocitation = " << format_score(stats.fraction_with_cocitation) << '\n'
        << "citation_edges = " << stats.citation_edges << '\n'
        << "dangling_references = " << stats.dangling_references << '\n';
    log << out.str();
}

void stage_ingest(const PipelineConfig& config, std::ostream& log) {
    if (config.corpus.empty())
        throw std::runtime_error("ingest requires a corpus path (corpus = <file>)");
    Corpus corpus = parse_corpus(config.corpus);
    CitationIndex index(corpus);
    atomic_write(config.corpus_artifact, [&](std::ostream& out) { write_corpus(corpus, out); });
    log << "[ingest] wrote " << config.corpus_artifact << '\n';
    log_stats(log, corpus_stats(corpus, index));
}

void stage_stats(const PipelineConfig& config, std::ostream& log) {
    require_artifact(config.corpus_artifact, "ingest");
    Corpus corpus = parse_corpus(config.corpus_artifact);
    CitationIndex index(corpus);
    StatsReport stats = corpus_stats(corpus, index);
    atomic_write(config.stats_report, [&](std::ostream& out) { log_stats(out, stats); });
    log_stats(log, stats);
}

void stage_cocite(const PipelineConfig& config, std::ostream& log) {
    require_artifact(config.corpus_artifact, "ingest");
    Corpus corpus = parse_corpus(config.corpus_artifact);
    CitationIndex index(corpus);
    uint64_t sources = 0, pairs = 0;
    atomic_write(config.cocitations, [&](std::ostream& out) {
        CoCitationScratch scratch(corpus.size());
        for (uint32_t i = 0; i < corpus.size(); ++i) {
            CoCitationList list = top_cocited(scratch.counts(index, i), config.cocite_top_k);
            if (list.entries.empty()) continue;
            ++sources;
            for (const auto& entry : list.entries) {
                out << corpus.id_of(i) << '\t' << corpus.id_of(entry.other) << '\t' << entry.count
                    << '\n';
                ++pairs;
            }
        }
    });
    log << "[cocite] wrote " << config.cocitations << '\n'
        << "papers = " << corpus.size() << '\n'
        << "sources_with_cocitations = " << sources << '\n'
        << "pairs_emitted = " << pairs << '\n';
}

void stage_embed(const PipelineConfig& config, std::ostream& log) {
    require_artifact(config.corpus_artifact, "ingest");
    Corpus corpus = parse_corpus(config.corpus_artifact);
    TfIdfModel tfidf = TfIdfModel::fit(corpus, config.training.min_count);

    TrainingParams params = config.training;
    params.seed = config.seed;
    WordEmbeddings words(params.embedding_size);
    if (config.train_vectors) {
        TrainReport report;
        words = train_word_embeddings(corpus, params, &report);
        words.save(config.word_vectors);
        log << "[embed] trained " << report.vocab_size << " word vectors, wrote "
            << config.word_vectors << '\n';
        for (size_t e = 0; e < report.epoch_loss.size(); ++e)
            log << "epoch_" << (e + 1) << "_loss = " << format_score(report.epoch_loss[e])
                << '\n';
    } else {
        require_artifact(config.word_vectors, "embed --train (or provide word_vectors)");
        words = WordEmbeddings::load(config.word_vectors);
        log << "[embed] loaded " << words.size() << " word vectors from " << config.word_vectors
            << '\n';
    }

    EmbeddingSet set = embed_corpus(corpus, words, tfidf, config.workers);
    save_embedding_cache(config.embeddings, set, tfidf, corpus.fingerprint());
    log << "[embed] wrote " << config.embeddings << '\n'
        << "papers = " << corpus.size() << '\n'
        << "tfidf_terms = " << tfidf.term_count() << '\n'
        << "papers_embedded = " << set.embedded_count() << '\n'
        << "embedding_coverage = "
        << format_score(corpus.size() ? double(set.embedded_count()) / double(corpus.size()) : 0.0)
        << '\n';
}

void stage_cluster(const PipelineConfig& config, std::ostream& log) {
    require_artifact(config.corpus_artifact, "ingest");
    require_artifact(config.embeddings, "embed");
    Corpus corpus = parse_corpus(config.corpus_artifact);
    auto [set, tfidf] = load_embedding_cache(config.embeddings, corpus.fingerprint());

    ClusterParams params = config.cluster;
    params.seed = config.seed;
    CentroidMatrix seeds;
    try {
        seeds = init_centroids(corpus, set, params);
        log << "[cluster] seeded " << seeds.count() << " centroids from leaf topics\n";
    } catch (const std::exception& e) {
        log << "[cluster] " << e.what() << '\n';
        seeds = init_centroids_farthest_point(set, params);
        log << "[cluster] seeded " << seeds.count() << " centroids by farthest-point\n";
    }

    ClusterModel model = spherical_kmeans(set, seeds, params, config.workers);
    SearchPartition part = partition_for_search(model, params);
    save_cluster_model(config.cluster_model, model, corpus.fingerprint());
    atomic_write(config.assignments, [&](std::ostream& out) {
        for (uint32_t i = 0; i < corpus.size(); ++i)
            if (model.assignment[i] >= 0)
                out << corpus.id_of(i) << '\t' << model.assignment[i] << '\n';
    });

    log << "[cluster] wrote " << config.cluster_model << " and " << config.assignments << '\n'
        << "clusters = " << model.cluster_count << '\n'
        << "iterations = " << model.iterations_run << '\n'
        << "mean_cluster_size = " << format_score(model.mean_cluster_size()) << '\n'
        << "searchable_clusters = " << part.searchable_clusters << '\n'
        << "max_searchable_size = " << part.max_searchable_size << '\n'
        << "capped_papers = " << part.capped_papers << '\n';
    log << "objective_trace =";
    for (double o : model.objective_trace) log << ' ' << format_score(o);
    log << '\n';
}

void stage_recommend(const PipelineConfig& config, std::ostream& log) {
    require_artifact(config.corpus_artifact, "ingest");
    require_artifact(config.embeddings, "embed");
    require_artifact(config.cluster_model, "cluster");
    Corpus corpus = parse_corpus(config.corpus_artifact);
    CitationIndex index(corpus);
    auto [set, tfidf] = load_embedding_cache(config.embeddings, corpus.fingerprint());
    ClusterModel model = load_cluster_model(config.cluster_model, corpus.fingerprint());
    SearchPartition part = partition_for_search(model, model.params);
    ClusterSearcher searcher(model, part, set);

    RecommendCounters counters;
    atomic_write(config.recommendations, [&](std::ostream& out) {
        recommend_corpus(corpus, index, set, searcher, config.merge, config.workers,
                         [&](uint32_t source, const std::vector<Recommendation>& recs) {
                             for (const auto& rec : recs)
                                 out << corpus.id_of(source) << '\t' << corpus.id_of(rec.target)
                                     << '\t' << format_score(rec.score) << '\t'
                                     << provenance_name(rec.provenance) << '\n';
                         },
                         counters);
    });

    // the cluster-pruning budget the batch run must respect
    const uint64_t bound =
        uint64_t(corpus.size()) * (model.cluster_count + part.max_searchable_size);
    log << "[recommend] wrote " << config.recommendations << '\n'
        << "papers = " << counters.papers << '\n'
        << "sources_emitted = " << counters.sources_emitted << '\n'
        << "recommendations = " << counters.recommendations << '\n'
        << "ccb_only_sources = " << counters.ccb_only_sources << '\n'
        << "no_coverage = " << counters.no_coverage << '\n'
        << "coverage = "
        << format_score(counters.papers ? double(counters.sources_emitted) /
                                              double(counters.papers)
                                        : 0.0)
        << '\n'
        << "similarity_computations = " << counters.similarity_computations << '\n'
        << "similarity_budget = " << bound << '\n';
}

void stage_query(const PipelineConfig& config, std::ostream& log) {
    if (config.query_text.empty())
        throw std::runtime_error("query requires text (--text or query_text = ...)");
    require_artifact(config.corpus_artifact, "ingest");
    require_artifact(config.embeddings, "embed");
    require_artifact(config.cluster_model, "cluster");
    require_artifact(config.word_vectors, "embed --train (or provide word_vectors)");
    Corpus corpus = parse_corpus(config.corpus_artifact);
    auto [set, tfidf] = load_embedding_cache(config.embeddings, corpus.fingerprint());
    ClusterModel model = load_cluster_model(config.cluster_model, corpus.fingerprint());
    SearchPartition part = partition_for_search(model, model.params);
    ClusterSearcher searcher(model, part, set);
    WordEmbeddings words = WordEmbeddings::load(config.word_vectors);

    SearchStats stats;
    auto results = recommend_text(config.query_text, words, tfidf, searcher, config.query_k, stats);
    for (const auto& r : results) {
        std::string title = corpus.record(r.paper).title;
        for (char& c : title)
            if (c == '\t') c = ' ';
        log << corpus.id_of(r.paper) << '\t' << format_score(r.cosine) << '\t' << title << '\n';
    }
    log << "similarity_computations = " << stats.similarity_computations << '\n';
}

void write_eval_report(std::ostream& out, const EvalReport& report, int k) {
    auto method = [&](const char* name, const MethodReport& m) {
        std::string prefix = std::string(name) + ".";
        std::string pk = "p_at_" + std::to_string(k);
        out << prefix << "pairs = " << m.pairs << '\n'
            << prefix << "groups = " << m.groups << '\n'
            << prefix << pk << "_grade3 = " << format_score(m.p_at_k_grade3) << '\n'
            << prefix << pk << "_grade4 = " << format_score(m.p_at_k_grade4) << '\n'
            << prefix << "ndcg = " << format_score(m.ndcg) << '\n'
            << prefix << "pooled_fraction_grade3 = " << format_score(m.pooled_fraction_grade3)
            << '\n'
            << prefix << "pooled_fraction_grade4 = " << format_score(m.pooled_fraction_grade4)
            << '\n';
    };
    out << "total_pairs = " << report.total_pairs << '\n';
    method("ccb", report.ccb);
    method("cb", report.cb);
    method("combined", report.combined);
}

void stage_eval(const PipelineConfig& config, std::ostream& log) {
    if (config.survey.empty())
        throw std::runtime_error("eval requires a survey CSV (--survey or survey = <file>)");
    require_artifact(config.survey, "nothing; provide the survey CSV");
    EvalReport report = evaluate_survey_file(config.survey, config.eval_per_source_k,
                                             config.survey_column_map);
    atomic_write(config.eval_report, [&](std::ostream& out) {
        write_eval_report(out, report, config.eval_per_source_k);
    });
    atomic_write(config.eval_histogram, [&](std::ostream& out) {
        out << "grade,bin_low,count\n";
        char bin_low[8];
        for (int grade = 1; grade <= 5; ++grade) {
            for (int bin = 0; bin < 10; ++bin) {
                std::snprintf(bin_low, sizeof(bin_low), "%.1f", bin * 0.1);
                out << grade << ',' << bin_low << ',' << report.histogram[grade - 1][bin] << '\n';
            }
        }
    });
    write_eval_report(log, report, config.eval_per_source_k);
    log << "[eval] wrote " << config.eval_report << " and " << config.eval_histogram << '\n';
}

}  // namespace

void run_stage(const std::string& stage, const PipelineConfig& config, std::ostream& log) {
    if (stage == "ingest") stage_ingest(config, log);
    else if (stage == "stats") stage_stats(config, log);
    else if (stage == "cocite") stage_cocite(config, log);
    else if (stage == "embed") stage_embed(config, log);
    else if (stage == "cluster") stage_cluster(config, log);
    else if (stage == "recommend") stage_recommend(config, log);
    else if (stage == "query") stage_query(config, log);
    else if (stage == "eval") stage_eval(config, log);
    else
        throw std::runtime_error(
            "unknown stage '" + stage +
            "' (expected ingest, stats, cocite, embed, cluster, recommend, query or eval)");
}

}  // namespace paperrec
