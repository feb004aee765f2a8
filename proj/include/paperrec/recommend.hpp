#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "paperrec/clustering.hpp"
#include "paperrec/cocitation.hpp"
#include "paperrec/corpus.hpp"
#include "paperrec/embedding.hpp"

namespace paperrec {

struct MergeParams {
    double theta = 0.4;  // sigmoid slope
    double tau = 5.0;    // sigmoid midpoint: a co-citation count of tau maps to 0.5
    int top_k = 20;
};

enum class Provenance : uint8_t { ccb, cb, both };

std::string_view provenance_name(Provenance p);

struct Recommendation {
    uint32_t source;
    uint32_t target;
    double score;  // in [0, 1]
    Provenance provenance;
};

// Logistic map of a co-citation count into (0,1), strictly increasing.
// Evaluated in long double: with the default parameters the double-precision
// sigmoid rounds to exactly 1.0 from cc ~ 99 on, which would break strict
// monotonicity; 80-bit arithmetic keeps the tail ordered well past cc = 100.
long double map_cc_score(long double cc, const MergeParams& params);

struct ScoredNeighbor {
    uint32_t paper;
    double cosine;
};

struct SearchStats {
    uint64_t similarity_computations = 0;
};

// Cluster-restricted exact search over an immutable model + embedding set.
class ClusterSearcher {
public:
    ClusterSearcher(const ClusterModel& model, const SearchPartition& partition,
                    const EmbeddingSet& embeddings);

    // Top-k by cosine among same-cluster papers excluding the source, ties by
    // ascending id. nullopt when the source is unembedded or its cluster is
    // capped (co-citation-only signal).
    std::optional<std::vector<ScoredNeighbor>> cb_neighbors(uint32_t source, int k,
                                                            SearchStats& stats) const;

    // Best searchable cluster for an arbitrary unit vector: centroids scanned
    // in cosine order, capped clusters skipped. Returns top-k members of the
    // chosen cluster; never a full-corpus scan. Throws when no searchable
    // cluster exists.
    std::vector<ScoredNeighbor> nearest_in_best_cluster(const std::vector<double>& query, int k,
                                                        SearchStats& stats) const;

    const ClusterModel& model() const { return model_; }
    const SearchPartition& partition() const { return partition_; }

private:
    std::vector<ScoredNeighbor> scan_cluster(const double* query, uint32_t cluster, int k,
                                             int32_t exclude, SearchStats& stats) const;

    const ClusterModel& model_;
    const SearchPartition& partition_;
    const EmbeddingSet& embeddings_;
    std::vector<std::vector<uint32_t>> members_;
};

// Fuses the two candidate streams: co-citation counts go through the logistic
// map, cosines are kept as-is (negatives dropped, tiny floating overshoots
// clamped to 1). A target present in both streams appears once with
// provenance `both` and the larger score. Sorted by score descending, ties by
// ascending id, truncated to top_k.
std::vector<Recommendation> merge_recommendations(const CoCitationList& ccb,
                                                  const std::vector<ScoredNeighbor>& cb,
                                                  const MergeParams& params);

struct RecommendCounters {
    uint64_t papers = 0;
    uint64_t sources_emitted = 0;
    uint64_t recommendations = 0;
    uint64_t ccb_only_sources = 0;  // no content candidates (unembedded or capped cluster)
    uint64_t no_coverage = 0;       // neither stream produced anything
    uint64_t similarity_computations = 0;
};

// Batch driver: for every paper, co-citation candidates always, content
// candidates iff embedded and in a searchable cluster, merged per the rules
// above. The sink runs on the calling thread in ascending ordinal order, so
// output is identical for any worker count.
void recommend_corpus(const Corpus& corpus, const CitationIndex& index,
                      const EmbeddingSet& embeddings, const ClusterSearcher& searcher,
                      const MergeParams& params, int workers,
                      const std::function<void(uint32_t, const std::vector<Recommendation>&)>& sink,
                      RecommendCounters& counters);

// On-the-fly query path: embed the text, pick the best searchable cluster,
// scan only that cluster. Throws for unembeddable queries and when no
// searchable cluster exists.
std::vector<ScoredNeighbor> recommend_text(std::string_view query, const WordEmbeddings& words,
                                           const TfIdfModel& tfidf, const ClusterSearcher& searcher,
                                           int k, SearchStats& stats);

}  // namespace paperrec
