#include "paperrec/recommend.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace paperrec {

namespace {

double dot(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) s += a[d] * b[d];
    return s;
}

void validate(const MergeParams& p) {
    if (!(p.theta > 0.0)) throw std::invalid_argument("theta must be > 0");
    if (p.tau < 0.0) throw std::invalid_argument("tau must be >= 0");
    if (p.top_k < 1) throw std::invalid_argument("top_k must be >= 1");
}

bool better(const ScoredNeighbor& a, const ScoredNeighbor& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.paper < b.paper;
}

}  // namespace

std::string_view provenance_name(Provenance p) {
    switch (p) {
        case Provenance::ccb: return "ccb";
        case Provenance::cb: return "cb";
        case Provenance::both: return "both";
    }
    return "?";
}

long double map_cc_score(long double cc, const MergeParams& params) {
    validate(params);
    if (cc < 0.0L) throw std::invalid_argument("co-citation count must be >= 0");
    return 1.0L / (1.0L + std::exp((long double)params.theta * ((long double)params.tau - cc)));
}

ClusterSearcher::ClusterSearcher(const ClusterModel& model, const SearchPartition& partition,
                                 const EmbeddingSet& embeddings)
    : model_(model), partition_(partition), embeddings_(embeddings), members_(model.members()) {
    if (model.dim != embeddings.dimension())
        throw std::runtime_error("cluster model dimension does not match embeddings");
    if (partition.searchable.size() != model.cluster_count)
        throw std::runtime_error("partition does not match cluster model");
}

std::vector<ScoredNeighbor> ClusterSearcher::scan_cluster(const double* query, uint32_t cluster,
                                                          int k, int32_t exclude,
                                                          SearchStats& stats) const {
    const int dim = model_.dim;
    std::vector<ScoredNeighbor> scored;
    scored.reserve(members_[cluster].size());
    for (uint32_t ord : members_[cluster]) {
        if (int32_t(ord) == exclude) continue;
        ++stats.similarity_computations;
        scored.push_back({ord, dot(query, embeddings_.row(ord), dim)});
    }
    if (size_t(k) < scored.size()) {
        std::nth_element(scored.begin(), scored.begin() + k, scored.end(), better);
        scored.resize(k);
    }
    std::sort(scored.begin(), scored.end(), better);
    return scored;
}

std::optional<std::vector<ScoredNeighbor>> ClusterSearcher::cb_neighbors(uint32_t source, int k,
                                                                         SearchStats& stats) const {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (source >= embeddings_.size()) throw std::out_of_range("source ordinal out of range");
    const int32_t cluster = model_.assignment[source];
    if (!embeddings_.embedded(source) || cluster < 0) return std::nullopt;
    if (!partition_.searchable[cluster]) return std::nullopt;
    return scan_cluster(embeddings_.row(source), cluster, k, int32_t(source), stats);
}

std::vector<ScoredNeighbor> ClusterSearcher::nearest_in_best_cluster(
    const std::vector<double>& query, int k, SearchStats& stats) const {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (int(query.size()) != model_.dim) throw std::invalid_argument("query dimension mismatch");
    if (partition_.searchable_clusters == 0)
        throw std::runtime_error("no searchable clusters (all exceed the size cap)");
    int32_t best = -1;
    double best_cos = 0.0;
    for (uint32_t c = 0; c < model_.cluster_count; ++c) {
        ++stats.similarity_computations;
        double cs = dot(query.data(), model_.centroid(c), model_.dim);
        if (partition_.searchable[c] && (best < 0 || cs > best_cos)) {
            best = int32_t(c);
            best_cos = cs;
        }
    }
    return scan_cluster(query.data(), uint32_t(best), k, -1, stats);
}

std::vector<Recommendation> merge_recommendations(const CoCitationList& ccb,
                                                  const std::vector<ScoredNeighbor>& cb,
                                                  const MergeParams& params) {
    validate(params);
    std::unordered_map<uint32_t, Recommendation> fused;
    fused.reserve(ccb.entries.size() + cb.size());
    for (const auto& entry : ccb.entries) {
        double score = double(map_cc_score(entry.count, params));
        fused.emplace(entry.other,
                      Recommendation{ccb.source, entry.other, score, Provenance::ccb});
    }
    for (const auto& neighbor : cb) {
        if (neighbor.cosine < 0.0) continue;  // negative similarity is noise
        double score = std::min(neighbor.cosine, 1.0);
        auto [it, inserted] = fused.emplace(
            neighbor.paper, Recommendation{ccb.source, neighbor.paper, score, Provenance::cb});
        if (!inserted) {
            it->second.provenance = Provenance::both;
            it->second.score = std::max(it->second.score, score);
        }
    }
    std::vector<Recommendation> merged;
    merged.reserve(fused.size());
    for (auto& [target, rec] : fused) {
        (void)target;
        merged.push_back(rec);
    }
    std::sort(merged.begin(), merged.end(), [](const Recommendation& a, const Recommendation& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.target < b.target;
    });
    if (merged.size() > size_t(params.top_k)) merged.resize(params.top_k);
    return merged;
}

namespace {

struct PaperResult {
    std::vector<Recommendation> recs;
    bool cb_available = false;
};

}  // namespace

void recommend_corpus(const Corpus& corpus, const CitationIndex& index,
                      const EmbeddingSet& embeddings, const ClusterSearcher& searcher,
                      const MergeParams& params, int workers,
                      const std::function<void(uint32_t, const std::vector<Recommendation>&)>& sink,
                      RecommendCounters& counters) {
    validate(params);
    if (embeddings.size() != corpus.size())
        throw std::runtime_error("embedding set does not cover the corpus");
    const uint32_t n = static_cast<uint32_t>(corpus.size());
    const uint32_t block = 4096;
    std::vector<PaperResult> results;
    std::vector<uint64_t> worker_sims(std::max(workers, 1), 0);

    auto work = [&](uint32_t begin, uint32_t end, uint32_t base, int slot) {
        CoCitationScratch scratch(n);
        SearchStats stats;
        for (uint32_t i = begin; i < end; ++i) {
            CoCitationList ccb = scratch.counts(index, i);
            auto cb = searcher.cb_neighbors(i, params.top_k, stats);
            PaperResult& r = results[i - base];
            r.cb_available = cb.has_value();
            r.recs = merge_recommendations(ccb, cb ? *cb : std::vector<ScoredNeighbor>{}, params);
        }
        worker_sims[slot] += stats.similarity_computations;
    };

    for (uint32_t b0 = 0; b0 < n; b0 += block) {
        const uint32_t b1 = std::min(n, b0 + block);
        results.assign(b1 - b0, {});
        if (workers <= 1) {
            work(b0, b1, b0, 0);
        } else {
            const uint32_t w = std::min<uint32_t>(workers, b1 - b0);
            std::vector<std::thread> threads;
            for (uint32_t t = 0; t < w; ++t) {
                uint32_t begin = b0 + uint64_t(b1 - b0) * t / w;
                uint32_t end = b0 + uint64_t(b1 - b0) * (t + 1) / w;
                threads.emplace_back(work, begin, end, b0, int(t));
            }
            for (auto& th : threads) th.join();
        }
        // emit sequentially in ordinal order: output is scheduling-independent
        for (uint32_t i = b0; i < b1; ++i) {
            const PaperResult& r = results[i - b0];
            ++counters.papers;
            if (!r.cb_available) ++counters.ccb_only_sources;
            if (r.recs.empty()) {
                ++counters.no_coverage;
            } else {
                ++counters.sources_emitted;
                counters.recommendations += r.recs.size();
                sink(i, r.recs);
            }
        }
    }
    for (uint64_t s : worker_sims) counters.similarity_computations += s;
}

std::vector<ScoredNeighbor> recommend_text(std::string_view query, const WordEmbeddings& words,
                                           const TfIdfModel& tfidf, const ClusterSearcher& searcher,
                                           int k, SearchStats& stats) {
    auto vec = embed_text(query, words, tfidf);
    if (!vec) throw std::runtime_error("query has no in-vocabulary tokens");
    return searcher.nearest_in_best_cluster(*vec, k, stats);
}

}  // namespace paperrec
