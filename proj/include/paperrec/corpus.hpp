#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace paperrec {

using PaperId = std::string;

struct TopicLabel {
    std::string topic_id;
    double confidence = 0.0;
    bool is_leaf = false;
};

struct PaperRecord {
    PaperId id;
    std::string title;
    std::vector<std::string> keywords;
    std::string abstract;
    std::vector<PaperId> references;  // cleaned: sorted, deduped, no self-reference
    std::vector<TopicLabel> topics;
};

// Immutable, id-indexed paper collection. Records are held sorted by id, so
// ordinals (positions) order the same way ids do and every downstream
// tie-break "by ascending id" reduces to ascending ordinal.
class Corpus {
public:
    Corpus() = default;

    // Validates id uniqueness, sorts by id, builds the lookup map.
    static Corpus from_records(std::vector<PaperRecord> records);

    size_t size() const { return records_.size(); }
    const PaperRecord& record(uint32_t ordinal) const { return records_[ordinal]; }
    const std::vector<PaperRecord>& records() const { return records_; }
    const PaperId& id_of(uint32_t ordinal) const { return records_[ordinal].id; }
    std::optional<uint32_t> find(std::string_view id) const;

    // FNV-1a over the sorted id list; stages use it to detect artifacts built
    // from a different corpus.
    uint64_t fingerprint() const;

private:
    std::vector<PaperRecord> records_;
    std::unordered_map<std::string, uint32_t> by_id_;
};

// Parses a UTF-8 line-delimited JSON corpus file. One object per line with
// fields id, title, keywords?, abstract?, references?, topics?; unknown
// fields ignored. Cleaning: strings trimmed, references deduped/sorted with
// self-references removed. Throws std::runtime_error naming the offending
// line for unreadable files, malformed lines, duplicate ids, empty titles.
Corpus parse_corpus(const std::string& path);
Corpus parse_corpus(std::istream& in, const std::string& source_name);

// Canonical serialization (sorted by id, fixed field order, cleaned fields
// only). parse(write(parse(x))) == parse(x).
void write_corpus(const Corpus& corpus, std::ostream& out);

// Forward and inverted citation adjacency over corpus ordinals. References
// pointing outside the corpus are dropped and counted, not fatal.
class CitationIndex {
public:
    explicit CitationIndex(const Corpus& corpus);

    size_t size() const { return cites_.size(); }
    const std::vector<uint32_t>& cites(uint32_t ordinal) const { return cites_[ordinal]; }
    const std::vector<uint32_t>& cited_by(uint32_t ordinal) const { return cited_by_[ordinal]; }
    uint64_t dangling_references() const { return dangling_; }
    uint64_t edge_count() const { return edges_; }

private:
    std::vector<std::vector<uint32_t>> cites_;     // outgoing, sorted
    std::vector<std::vector<uint32_t>> cited_by_;  // incoming, sorted
    uint64_t dangling_ = 0;
    uint64_t edges_ = 0;
};

struct StatsReport {
    uint64_t papers = 0;
    uint64_t papers_with_references = 0;       // >= 1 in-corpus outgoing reference
    double fraction_with_references = 0.0;
    double mean_references_per_referenced_paper = 0.0;
    uint64_t papers_with_cocitation = 0;
    double fraction_with_cocitation = 0.0;
    uint64_t citation_edges = 0;
    uint64_t dangling_references = 0;
};

StatsReport corpus_stats(const Corpus& corpus, const CitationIndex& index);

}  // namespace paperrec
