#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "paperrec/corpus.hpp"
#include "paperrec/embedding.hpp"

namespace paperrec {

struct ClusterParams {
    int initial_k = 23533;          // used by the fallback seeder
    int max_iterations = 10;
    double min_error = 1e-3;        // mean centroid displacement in cosine distance
    int size_cap = 35000;           // clusters above this are co-citation-only
    int max_samples_per_topic = 1000;
    double min_topic_confidence = 0.8;
    uint64_t seed = 1;
};

struct CentroidMatrix {
    int dim = 0;
    std::vector<double> data;  // row-major, unit rows
    size_t count() const { return dim == 0 ? 0 : data.size() / dim; }
    const double* row(size_t i) const { return data.data() + i * dim; }
};

// One centroid per qualifying leaf topic (is_leaf, confidence >=
// min_topic_confidence, member embedded): normalized mean of up to
// max_samples_per_topic seeded-random member embeddings. Throws when no topic
// qualifies; callers fall back to init_centroids_farthest_point.
CentroidMatrix init_centroids(const Corpus& corpus, const EmbeddingSet& embeddings,
                              const ClusterParams& params);

// Farthest-point seeding over the embedded papers, k = min(initial_k, n).
CentroidMatrix init_centroids_farthest_point(const EmbeddingSet& embeddings,
                                             const ClusterParams& params);

struct ClusterModel {
    int dim = 0;
    uint32_t cluster_count = 0;        // k' after empty-cluster removal
    std::vector<double> centroids;     // k' x dim, unit rows
    std::vector<int32_t> assignment;   // per corpus ordinal; -1 = not embedded
    std::vector<uint32_t> cluster_sizes;
    std::vector<double> objective_trace;  // mean cosine to assigned centroid, per pass
    int iterations_run = 0;
    ClusterParams params;              // echo of the run's parameters

    const double* centroid(uint32_t c) const { return centroids.data() + size_t(c) * dim; }
    double mean_cluster_size() const;
    std::vector<std::vector<uint32_t>> members() const;
};

// Alternates argmax-cosine assignment (tie -> lowest cluster index) with
// normalized-mean centroid updates, dropping clusters that empty out, until
// the mean centroid displacement falls below min_error or the iteration
// budget is spent. Ends with a final assignment pass so assignments are
// argmax over the final centroids. The objective trace is non-decreasing.
ClusterModel spherical_kmeans(const EmbeddingSet& embeddings, const CentroidMatrix& initial,
                              const ClusterParams& params, int workers = 1);

struct SearchPartition {
    std::vector<uint8_t> searchable;  // per cluster: size <= size_cap
    uint64_t capped_papers = 0;       // papers flagged co-citation-only
    uint32_t searchable_clusters = 0;
    uint32_t max_searchable_size = 0;
};

SearchPartition partition_for_search(const ClusterModel& model, const ClusterParams& params);

// Versioned binary model cache with parameter echo and corpus fingerprint.
void save_cluster_model(const std::string& path, const ClusterModel& model,
                        uint64_t corpus_fingerprint);
ClusterModel load_cluster_model(const std::string& path, uint64_t expect_fingerprint);

}  // namespace paperrec
