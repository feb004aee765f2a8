#include "paperrec/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>
#include <thread>

#include "paperrec/detail/binary_io.hpp"
#include "paperrec/io_util.hpp"

namespace paperrec {

namespace {

constexpr double kZeroNorm = 1e-12;

double dot(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) s += a[d] * b[d];
    return s;
}

void validate(const ClusterParams& p) {
    if (p.initial_k < 1) throw std::invalid_argument("initial_k must be >= 1");
    if (p.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    if (!(p.min_error > 0.0)) throw std::invalid_argument("min_error must be > 0");
    if (p.size_cap < 1) throw std::invalid_argument("size_cap must be >= 1");
    if (p.max_samples_per_topic < 1)
        throw std::invalid_argument("max_samples_per_topic must be >= 1");
    if (p.min_topic_confidence < 0.0 || p.min_topic_confidence > 1.0)
        throw std::invalid_argument("min_topic_confidence must be in [0,1]");
}

std::vector<uint32_t> embedded_ordinals(const EmbeddingSet& embeddings) {
    std::vector<uint32_t> out;
    out.reserve(embeddings.size());
    for (uint32_t i = 0; i < embeddings.size(); ++i)
        if (embeddings.embedded(i)) out.push_back(i);
    return out;
}

}  // namespace

CentroidMatrix init_centroids(const Corpus& corpus, const EmbeddingSet& embeddings,
                              const ClusterParams& params) {
    validate(params);
    // std::map keeps topic visit order stable under the seeded sampler
    std::map<std::string, std::vector<uint32_t>> topic_members;
    for (uint32_t i = 0; i < corpus.size(); ++i) {
        if (!embeddings.embedded(i)) continue;
        for (const auto& label : corpus.record(i).topics) {
            if (label.is_leaf && label.confidence >= params.min_topic_confidence)
                topic_members[label.topic_id].push_back(i);
        }
    }

    const int dim = embeddings.dimension();
    CentroidMatrix centroids;
    centroids.dim = dim;
    std::mt19937_64 rng(params.seed);
    std::vector<double> mean(dim);
    for (auto& [topic, members] : topic_members) {
        (void)topic;
        if (size_t(params.max_samples_per_topic) < members.size()) {
            // partial Fisher-Yates: first max_samples entries become the sample
            for (int i = 0; i < params.max_samples_per_topic; ++i) {
                size_t j = i + rng() % (members.size() - i);
                std::swap(members[i], members[j]);
            }
            members.resize(params.max_samples_per_topic);
        }
        std::fill(mean.begin(), mean.end(), 0.0);
        for (uint32_t ord : members) {
            const double* row = embeddings.row(ord);
            for (int d = 0; d < dim; ++d) mean[d] += row[d];
        }
        double norm = std::sqrt(dot(mean.data(), mean.data(), dim));
        if (norm < kZeroNorm) continue;
        for (double& x : mean) x /= norm;
        centroids.data.insert(centroids.data.end(), mean.begin(), mean.end());
    }
    if (centroids.count() == 0)
        throw std::runtime_error(
            "no qualifying leaf-topic seeds; fall back to farthest-point seeding");
    return centroids;
}

CentroidMatrix init_centroids_farthest_point(const EmbeddingSet& embeddings,
                                             const ClusterParams& params) {
    validate(params);
    const auto points = embedded_ordinals(embeddings);
    if (points.empty()) throw std::runtime_error("no embedded papers to seed centroids from");
    const int dim = embeddings.dimension();
    const size_t k = std::min<size_t>(params.initial_k, points.size());

    std::mt19937_64 rng(params.seed);
    std::vector<uint32_t> chosen;
    chosen.push_back(points[rng() % points.size()]);
    std::vector<double> best_cos(points.size());
    for (size_t i = 0; i < points.size(); ++i)
        best_cos[i] = dot(embeddings.row(points[i]), embeddings.row(chosen[0]), dim);
    while (chosen.size() < k) {
        size_t far = 0;
        for (size_t i = 1; i < points.size(); ++i)
            if (best_cos[i] < best_cos[far]) far = i;
        chosen.push_back(points[far]);
        for (size_t i = 0; i < points.size(); ++i)
            best_cos[i] = std::max(
                best_cos[i], dot(embeddings.row(points[i]), embeddings.row(chosen.back()), dim));
    }

    CentroidMatrix centroids;
    centroids.dim = dim;
    centroids.data.reserve(chosen.size() * dim);
    for (uint32_t ord : chosen)
        centroids.data.insert(centroids.data.end(), embeddings.row(ord),
                              embeddings.row(ord) + dim);
    return centroids;
}

double ClusterModel::mean_cluster_size() const {
    if (cluster_sizes.empty()) return 0.0;
    uint64_t total = 0;
    for (uint32_t s : cluster_sizes) total += s;
    return double(total) / double(cluster_sizes.size());
}

std::vector<std::vector<uint32_t>> ClusterModel::members() const {
    std::vector<std::vector<uint32_t>> out(cluster_count);
    for (uint32_t c = 0; c < cluster_count; ++c) out[c].reserve(cluster_sizes[c]);
    for (uint32_t i = 0; i < assignment.size(); ++i)
        if (assignment[i] >= 0) out[assignment[i]].push_back(i);
    return out;
}

namespace {

// argmax-cosine assignment for a range of points; ties take the lowest
// cluster index
void assign_range(const EmbeddingSet& embeddings, const std::vector<uint32_t>& points,
                  const std::vector<double>& centroids, size_t k, int dim, size_t begin,
                  size_t end, std::vector<int32_t>& cluster_of, std::vector<double>& cos_of) {
    for (size_t i = begin; i < end; ++i) {
        const double* x = embeddings.row(points[i]);
        int32_t best = 0;
        double best_cos = dot(x, centroids.data(), dim);
        for (size_t c = 1; c < k; ++c) {
            double cs = dot(x, centroids.data() + c * dim, dim);
            if (cs > best_cos) {
                best_cos = cs;
                best = static_cast<int32_t>(c);
            }
        }
        cluster_of[i] = best;
        cos_of[i] = best_cos;
    }
}

void parallel_assign(const EmbeddingSet& embeddings, const std::vector<uint32_t>& points,
                     const std::vector<double>& centroids, size_t k, int dim, int workers,
                     std::vector<int32_t>& cluster_of, std::vector<double>& cos_of) {
    const size_t n = points.size();
    if (workers <= 1 || n < 256) {
        assign_range(embeddings, points, centroids, k, dim, 0, n, cluster_of, cos_of);
        return;
    }
    const size_t w = std::min<size_t>(workers, n);
    std::vector<std::thread> threads;
    for (size_t t = 0; t < w; ++t) {
        size_t begin = n * t / w, end = n * (t + 1) / w;
        threads.emplace_back(assign_range, std::cref(embeddings), std::cref(points),
                             std::cref(centroids), k, dim, begin, end, std::ref(cluster_of),
                             std::ref(cos_of));
    }
    for (auto& th : threads) th.join();
}

}  // namespace

ClusterModel spherical_kmeans(const EmbeddingSet& embeddings, const CentroidMatrix& initial,
                              const ClusterParams& params, int workers) {
    validate(params);
    if (initial.count() == 0) throw std::runtime_error("no initial centroids");
    if (initial.dim != embeddings.dimension())
        throw std::runtime_error("centroid/embedding dimension mismatch");
    const auto points = embedded_ordinals(embeddings);
    if (points.empty()) throw std::runtime_error("no embedded papers to cluster");

    const int dim = embeddings.dimension();
    std::vector<double> centroids = initial.data;
    size_t k = initial.count();

    ClusterModel model;
    model.dim = dim;
    model.params = params;

    std::vector<int32_t> cluster_of(points.size());
    std::vector<double> cos_of(points.size());
    std::vector<double> sums;
    std::vector<uint32_t> counts;

    for (int it = 1; it <= params.max_iterations; ++it) {
        parallel_assign(embeddings, points, centroids, k, dim, workers, cluster_of, cos_of);
        double objective = 0.0;
        for (double c : cos_of) objective += c;
        model.objective_trace.push_back(objective / double(points.size()));
        model.iterations_run = it;

        // normalized-mean update; single-threaded so results do not depend on
        // the worker count
        sums.assign(k * dim, 0.0);
        counts.assign(k, 0);
        for (size_t i = 0; i < points.size(); ++i) {
            const double* x = embeddings.row(points[i]);
            double* s = sums.data() + size_t(cluster_of[i]) * dim;
            for (int d = 0; d < dim; ++d) s[d] += x[d];
            ++counts[cluster_of[i]];
        }
        std::vector<double> next;
        next.reserve(k * dim);
        double displacement = 0.0;
        size_t survivors = 0;
        for (size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;  // emptied this iteration: drop
            const double* old_row = centroids.data() + c * dim;
            double* s = sums.data() + c * dim;
            double norm = std::sqrt(dot(s, s, dim));
            if (norm < kZeroNorm) {
                // members cancel out exactly; keep the previous direction
                next.insert(next.end(), old_row, old_row + dim);
                ++survivors;
                continue;
            }
            for (int d = 0; d < dim; ++d) s[d] /= norm;
            displacement += 1.0 - dot(old_row, s, dim);
            next.insert(next.end(), s, s + dim);
            ++survivors;
        }
        centroids = std::move(next);
        k = survivors;
        if (displacement / double(survivors) < params.min_error) break;
    }

    // final pass so every assignment is argmax over the final centroids
    parallel_assign(embeddings, points, centroids, k, dim, workers, cluster_of, cos_of);
    double objective = 0.0;
    for (double c : cos_of) objective += c;
    model.objective_trace.push_back(objective / double(points.size()));

    // clusters emptied by the final pass are compacted away
    std::vector<uint32_t> sizes(k, 0);
    for (int32_t c : cluster_of) ++sizes[c];
    std::vector<int32_t> remap(k, -1);
    uint32_t kept = 0;
    for (size_t c = 0; c < k; ++c)
        if (sizes[c] > 0) remap[c] = static_cast<int32_t>(kept++);
    model.cluster_count = kept;
    model.centroids.reserve(size_t(kept) * dim);
    model.cluster_sizes.assign(kept, 0);
    for (size_t c = 0; c < k; ++c) {
        if (remap[c] < 0) continue;
        model.centroids.insert(model.centroids.end(), centroids.data() + c * dim,
                               centroids.data() + (c + 1) * dim);
        model.cluster_sizes[remap[c]] = sizes[c];
    }
    model.assignment.assign(embeddings.size(), -1);
    for (size_t i = 0; i < points.size(); ++i)
        model.assignment[points[i]] = remap[cluster_of[i]];
    return model;
}

SearchPartition partition_for_search(const ClusterModel& model, const ClusterParams& params) {
    validate(params);
    SearchPartition part;
    part.searchable.resize(model.cluster_count, 0);
    for (uint32_t c = 0; c < model.cluster_count; ++c) {
        if (model.cluster_sizes[c] <= uint32_t(params.size_cap)) {
            part.searchable[c] = 1;
            ++part.searchable_clusters;
            part.max_searchable_size = std::max(part.max_searchable_size, model.cluster_sizes[c]);
        } else {
            part.capped_papers += model.cluster_sizes[c];
        }
    }
    return part;
}

namespace {
constexpr char kClusterMagic[] = "PRECCLU1";
}

void save_cluster_model(const std::string& path, const ClusterModel& model,
                        uint64_t corpus_fingerprint) {
    atomic_write(path, [&](std::ostream& out) {
        out.write(kClusterMagic, 8);
        detail::write_pod<uint64_t>(out, corpus_fingerprint);
        detail::write_pod<int32_t>(out, model.params.initial_k);
        detail::write_pod<int32_t>(out, model.params.max_iterations);
        detail::write_pod<double>(out, model.params.min_error);
        detail::write_pod<int32_t>(out, model.params.size_cap);
        detail::write_pod<int32_t>(out, model.params.max_samples_per_topic);
        detail::write_pod<double>(out, model.params.min_topic_confidence);
        detail::write_pod<uint64_t>(out, model.params.seed);
        detail::write_pod<int32_t>(out, model.dim);
        detail::write_pod<uint32_t>(out, model.cluster_count);
        detail::write_doubles(out, model.centroids);
        detail::write_pod<uint64_t>(out, model.assignment.size());
        out.write(reinterpret_cast<const char*>(model.assignment.data()),
                  std::streamsize(model.assignment.size() * sizeof(int32_t)));
        detail::write_pod<uint64_t>(out, model.cluster_sizes.size());
        out.write(reinterpret_cast<const char*>(model.cluster_sizes.data()),
                  std::streamsize(model.cluster_sizes.size() * sizeof(uint32_t)));
        detail::write_pod<int32_t>(out, model.iterations_run);
        detail::write_doubles(out, model.objective_trace);
    });
}

ClusterModel load_cluster_model(const std::string& path, uint64_t expect_fingerprint) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read cluster model " + path);
    detail::expect_magic(in, kClusterMagic, path);
    auto fingerprint = detail::read_pod<uint64_t>(in);
    if (fingerprint != expect_fingerprint)
        throw std::runtime_error(path + ": built from a different corpus; re-run cluster");
    ClusterModel model;
    model.params.initial_k = detail::read_pod<int32_t>(in);
    model.params.max_iterations = detail::read_pod<int32_t>(in);
    model.params.min_error = detail::read_pod<double>(in);
    model.params.size_cap = detail::read_pod<int32_t>(in);
    model.params.max_samples_per_topic = detail::read_pod<int32_t>(in);
    model.params.min_topic_confidence = detail::read_pod<double>(in);
    model.params.seed = detail::read_pod<uint64_t>(in);
    model.dim = detail::read_pod<int32_t>(in);
    model.cluster_count = detail::read_pod<uint32_t>(in);
    model.centroids = detail::read_doubles(in);
    auto n = detail::read_pod<uint64_t>(in);
    model.assignment.resize(n);
    in.read(reinterpret_cast<char*>(model.assignment.data()),
            std::streamsize(n * sizeof(int32_t)));
    auto k = detail::read_pod<uint64_t>(in);
    model.cluster_sizes.resize(k);
    in.read(reinterpret_cast<char*>(model.cluster_sizes.data()),
            std::streamsize(k * sizeof(uint32_t)));
    model.iterations_run = detail::read_pod<int32_t>(in);
    model.objective_trace = detail::read_doubles(in);
    if (!in) throw std::runtime_error(path + ": truncated cluster model");
    return model;
}

}  // namespace paperrec
