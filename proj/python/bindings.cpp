#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "paperrec/clustering.hpp"
#include "paperrec/cocitation.hpp"
#include "paperrec/corpus.hpp"
#include "paperrec/embedding.hpp"
#include "paperrec/eval.hpp"
#include "paperrec/pipeline.hpp"
#include "paperrec/recommend.hpp"

namespace py = pybind11;
using namespace paperrec;

namespace {

// Bundles the artifacts a search needs so python callers hold one object.
struct Recommender {
    Corpus corpus;
    CitationIndex index;
    EmbeddingSet embeddings;
    TfIdfModel tfidf;
    WordEmbeddings words;
    ClusterModel model;
    SearchPartition partition;

    Recommender(Corpus c, WordEmbeddings w, const TrainingParams& training,
                const ClusterParams& clustering, int workers)
        : corpus(std::move(c)),
          index(corpus),
          embeddings(),
          tfidf(TfIdfModel::fit(corpus, training.min_count)),
          words(std::move(w)),
          model(),
          partition() {
        embeddings = embed_corpus(corpus, words, tfidf, workers);
        CentroidMatrix seeds;
        try {
            seeds = init_centroids(corpus, embeddings, clustering);
        } catch (const std::exception&) {
            seeds = init_centroids_farthest_point(embeddings, clustering);
        }
        model = spherical_kmeans(embeddings, seeds, clustering, workers);
        partition = partition_for_search(model, clustering);
    }

    std::vector<std::pair<std::string, uint32_t>> cocitations(const std::string& source) const {
        auto list = cocitation_counts(corpus, index, source);
        std::vector<std::pair<std::string, uint32_t>> out;
        out.reserve(list.entries.size());
        for (const auto& e : list.entries) out.emplace_back(corpus.id_of(e.other), e.count);
        return out;
    }

    std::vector<std::pair<std::string, double>> query(const std::string& text, int k) const {
        ClusterSearcher searcher(model, partition, embeddings);
        SearchStats stats;
        auto results = recommend_text(text, words, tfidf, searcher, k, stats);
        std::vector<std::pair<std::string, double>> out;
        out.reserve(results.size());
        for (const auto& r : results) out.emplace_back(corpus.id_of(r.paper), r.cosine);
        return out;
    }

    std::vector<std::tuple<std::string, std::string, double, std::string>> recommend(
        const MergeParams& params, int workers) const {
        ClusterSearcher searcher(model, partition, embeddings);
        RecommendCounters counters;
        std::vector<std::tuple<std::string, std::string, double, std::string>> out;
        recommend_corpus(corpus, index, embeddings, searcher, params, workers,
                         [&](uint32_t source, const std::vector<Recommendation>& recs) {
                             for (const auto& rec : recs)
                                 out.emplace_back(corpus.id_of(source), corpus.id_of(rec.target),
                                                  rec.score,
                                                  std::string(provenance_name(rec.provenance)));
                         },
                         counters);
        return out;
    }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "hybrid co-citation + content-embedding paper recommender core";

    py::class_<TrainingParams>(m, "TrainingParams")
        .def(py::init<>())
        .def_readwrite("skipgram", &TrainingParams::skipgram)
        .def_readwrite("embedding_size", &TrainingParams::embedding_size)
        .def_readwrite("window", &TrainingParams::window)
        .def_readwrite("max_iterations", &TrainingParams::max_iterations)
        .def_readwrite("min_count", &TrainingParams::min_count)
        .def_readwrite("subsample", &TrainingParams::subsample)
        .def_readwrite("negatives", &TrainingParams::negatives)
        .def_readwrite("seed", &TrainingParams::seed);

    py::class_<ClusterParams>(m, "ClusterParams")
        .def(py::init<>())
        .def_readwrite("initial_k", &ClusterParams::initial_k)
        .def_readwrite("max_iterations", &ClusterParams::max_iterations)
        .def_readwrite("min_error", &ClusterParams::min_error)
        .def_readwrite("size_cap", &ClusterParams::size_cap)
        .def_readwrite("max_samples_per_topic", &ClusterParams::max_samples_per_topic)
        .def_readwrite("min_topic_confidence", &ClusterParams::min_topic_confidence)
        .def_readwrite("seed", &ClusterParams::seed);

    py::class_<MergeParams>(m, "MergeParams")
        .def(py::init<>())
        .def_readwrite("theta", &MergeParams::theta)
        .def_readwrite("tau", &MergeParams::tau)
        .def_readwrite("top_k", &MergeParams::top_k);

    m.def("tokenize", [](const std::string& text) { return tokenize(text); },
          "lower-cased alphanumeric tokens; purely numeric and single-character tokens dropped");

    m.def(
        "map_cc_score",
        [](double cc, double theta, double tau) {
            MergeParams params;
            params.theta = theta;
            params.tau = tau;
            return double(map_cc_score(cc, params));
        },
        py::arg("cc"), py::arg("theta") = 0.4, py::arg("tau") = 5.0,
        "logistic map of a co-citation count into (0,1)");

    m.def(
        "precision_at_k",
        [](const std::vector<int>& grades, int threshold, int k) -> py::object {
            auto p = precision_at_k(grades, threshold, k);
            if (!p) return py::none();
            return py::float_(*p);
        },
        py::arg("grades_by_rank"), py::arg("threshold"), py::arg("k") = 10);

    m.def(
        "ndcg",
        [](const std::vector<int>& grades) -> py::object {
            auto n = ndcg(grades);
            if (!n) return py::none();
            return py::float_(*n);
        },
        py::arg("grades_by_rank"), "exponential-gain nDCG of a ranked grade list");

    m.def(
        "evaluate_survey",
        [](const std::string& path, int per_source_k, const std::string& column_map) {
            EvalReport report = evaluate_survey_file(path, per_source_k, column_map);
            auto method = [](const MethodReport& r) {
                py::dict d;
                d["pairs"] = r.pairs;
                d["groups"] = r.groups;
                d["p_at_k_grade3"] = r.p_at_k_grade3;
                d["p_at_k_grade4"] = r.p_at_k_grade4;
                d["ndcg"] = r.ndcg;
                d["pooled_fraction_grade3"] = r.pooled_fraction_grade3;
                d["pooled_fraction_grade4"] = r.pooled_fraction_grade4;
                return d;
            };
            py::dict out;
            out["total_pairs"] = report.total_pairs;
            out["ccb"] = method(report.ccb);
            out["cb"] = method(report.cb);
            out["combined"] = method(report.combined);
            py::list hist;
            for (int grade = 1; grade <= 5; ++grade)
                for (int bin = 0; bin < 10; ++bin) {
                    py::dict row;
                    row["grade"] = grade;
                    row["bin_low"] = bin * 0.1;
                    row["count"] = report.histogram[grade - 1][bin];
                    hist.append(row);
                }
            out["histogram"] = hist;
            return out;
        },
        py::arg("path"), py::arg("per_source_k") = 10, py::arg("column_map") = "");

    py::class_<Recommender>(m, "Recommender")
        .def(py::init([](const std::string& corpus_path, const TrainingParams& training,
                         const ClusterParams& clustering, int workers) {
                 Corpus corpus = parse_corpus(corpus_path);
                 WordEmbeddings words = train_word_embeddings(corpus, training);
                 return new Recommender(std::move(corpus), std::move(words), training, clustering,
                                        workers);
             }),
             py::arg("corpus_path"), py::arg("training") = TrainingParams{},
             py::arg("clustering") = ClusterParams{}, py::arg("workers") = 1,
             "parse a corpus, train word vectors, embed and cluster it")
        .def_property_readonly("paper_count",
                               [](const Recommender& r) { return r.corpus.size(); })
        .def_property_readonly("embedded_count",
                               [](const Recommender& r) { return r.embeddings.embedded_count(); })
        .def_property_readonly("cluster_count",
                               [](const Recommender& r) { return r.model.cluster_count; })
        .def("cocitations", &Recommender::cocitations, py::arg("source_id"),
             "co-cited candidates for a paper id as (id, count), strongest first")
        .def("query", &Recommender::query, py::arg("text"), py::arg("k") = 10,
             "rank papers for arbitrary text as (id, cosine)")
        .def("recommend", &Recommender::recommend, py::arg("params") = MergeParams{},
             py::arg("workers") = 1,
             "merged recommendation stream as (source, target, score, provenance)");

    m.def(
        "run_stage",
        [](const std::string& stage, const py::dict& config_dict) {
            PipelineConfig config;
            for (auto item : config_dict)
                config.set(py::cast<std::string>(item.first),
                           py::cast<std::string>(py::str(item.second)));
            std::ostringstream log;
            run_stage(stage, config, log);
            return log.str();
        },
        py::arg("stage"), py::arg("config"),
        "run one pipeline stage with config keys as strings; returns the stage log");
}
