#include "support/oracles.hpp"

#include <algorithm>
#include <bit>

namespace paperrec::testsupport {

CoCitationOracle::CoCitationOracle(const Corpus& corpus) {
    n_ = corpus.size();
    words_ = (n_ + 63) / 64;
    columns_.assign(n_ * words_, 0);
    for (uint32_t k = 0; k < n_; ++k) {
        for (const auto& ref : corpus.record(k).references) {
            auto i = corpus.find(ref);
            if (!i) continue;  // dangling reference: no c_{k,i} entry
            columns_[*i * words_ + k / 64] |= uint64_t(1) << (k % 64);
        }
    }
}

uint32_t CoCitationOracle::count(uint32_t i, uint32_t j) const {
    const uint64_t* a = columns_.data() + size_t(i) * words_;
    const uint64_t* b = columns_.data() + size_t(j) * words_;
    uint32_t total = 0;
    for (size_t w = 0; w < words_; ++w) total += std::popcount(a[w] & b[w]);
    return total;
}

std::vector<ScoredNeighbor> brute_cluster_ranking(const EmbeddingSet& embeddings,
                                                  const std::vector<uint32_t>& members,
                                                  const double* query, int64_t exclude, int k) {
    std::vector<ScoredNeighbor> all;
    all.reserve(members.size());
    for (uint32_t ord : members) {
        if (int64_t(ord) == exclude) continue;
        double cosine = 0.0;
        const double* row = embeddings.row(ord);
        for (int d = 0; d < embeddings.dimension(); ++d) cosine += query[d] * row[d];
        all.push_back({ord, cosine});
    }
    std::sort(all.begin(), all.end(), [](const ScoredNeighbor& a, const ScoredNeighbor& b) {
        if (a.cosine != b.cosine) return a.cosine > b.cosine;
        return a.paper < b.paper;
    });
    if (all.size() > size_t(k)) all.resize(k);
    return all;
}

int32_t brute_best_centroid(const ClusterModel& model, const double* point) {
    int32_t best = -1;
    double best_cos = 0.0;
    for (uint32_t c = 0; c < model.cluster_count; ++c) {
        double cosine = 0.0;
        const double* centroid = model.centroid(c);
        for (int d = 0; d < model.dim; ++d) cosine += point[d] * centroid[d];
        if (best < 0 || cosine > best_cos) {
            best = int32_t(c);
            best_cos = cosine;
        }
    }
    return best;
}

}  // namespace paperrec::testsupport
