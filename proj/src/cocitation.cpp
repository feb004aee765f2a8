#include "paperrec/cocitation.hpp"

#include <algorithm>
#include <stdexcept>

namespace paperrec {

CoCitationList CoCitationScratch::counts(const CitationIndex& index, uint32_t source) {
    if (counter_.size() != index.size())
        throw std::invalid_argument("scratch buffer sized for a different index");
    if (source >= index.size()) throw std::out_of_range("co-citation source out of range");
    touched_.clear();
    for (uint32_t citer : index.cited_by(source)) {
        for (uint32_t other : index.cites(citer)) {
            if (other == source) continue;
            if (counter_[other]++ == 0) touched_.push_back(other);
        }
    }
    CoCitationList list;
    list.source = source;
    list.entries.reserve(touched_.size());
    for (uint32_t other : touched_) {
        list.entries.push_back({other, counter_[other]});
        counter_[other] = 0;
    }
    std::sort(list.entries.begin(), list.entries.end(),
              [](const CoCitationEntry& a, const CoCitationEntry& b) {
                  if (a.count != b.count) return a.count > b.count;
                  return a.other < b.other;
              });
    return list;
}

CoCitationList cocitation_counts(const CitationIndex& index, uint32_t source) {
    CoCitationScratch scratch(index.size());
    return scratch.counts(index, source);
}

CoCitationList cocitation_counts(const Corpus& corpus, const CitationIndex& index,
                                 const PaperId& source) {
    auto ord = corpus.find(source);
    if (!ord) throw std::runtime_error("unknown paper id '" + source + "'");
    return cocitation_counts(index, *ord);
}

CoCitationList top_cocited(const CoCitationList& list, int k) {
    if (k < 1) throw std::invalid_argument("top_cocited requires k >= 1");
    CoCitationList out;
    out.source = list.source;
    size_t take = std::min(list.entries.size(), size_t(k));
    out.entries.assign(list.entries.begin(), list.entries.begin() + take);
    return out;
}

}  // namespace paperrec
