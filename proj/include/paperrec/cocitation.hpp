#pragma once

#include <cstdint>
#include <vector>

#include "paperrec/corpus.hpp"

namespace paperrec {

struct CoCitationEntry {
    uint32_t other;  // corpus ordinal
    uint32_t count;  // common citers, always >= 1
};

// Entries sorted by count descending, then ordinal (= id) ascending.
struct CoCitationList {
    uint32_t source = 0;
    std::vector<CoCitationEntry> entries;
};

// Reusable dense counter so batch runs do not reallocate per paper.
class CoCitationScratch {
public:
    explicit CoCitationScratch(size_t n) : counter_(n, 0) {}

    // Common-citer counts for `source`: iterate its citers through cited_by,
    // accumulate over each citer's outgoing list. Never a dense n x n product.
    CoCitationList counts(const CitationIndex& index, uint32_t source);

private:
    std::vector<uint32_t> counter_;
    std::vector<uint32_t> touched_;
};

CoCitationList cocitation_counts(const CitationIndex& index, uint32_t source);

// By-id convenience; throws on unknown id.
CoCitationList cocitation_counts(const Corpus& corpus, const CitationIndex& index,
                                 const PaperId& source);

// First min(k, |entries|) entries under the list's sort order. k must be >= 1.
CoCitationList top_cocited(const CoCitationList& list, int k);

}  // namespace paperrec
