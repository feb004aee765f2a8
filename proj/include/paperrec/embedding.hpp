#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "paperrec/corpus.hpp"

namespace paperrec {

// Lower-cased tokens split on any non-alphanumeric run. Purely numeric and
// single-character tokens are dropped; order is preserved.
std::vector<std::string> tokenize(std::string_view text);

struct TermStats {
    uint32_t term_id = 0;
    uint32_t document_frequency = 0;
    uint64_t corpus_frequency = 0;
};

struct Vocabulary {
    std::unordered_map<std::string, TermStats> terms;
    uint32_t n_docs = 0;
};

// idf(t) = ln(n_docs / document_frequency(t)) over retained terms. A document
// is the concatenation of title, keywords and abstract tokens.
class TfIdfModel {
public:
    TfIdfModel() = default;

    // Terms whose corpus frequency falls below min_count are excluded.
    static TfIdfModel fit(const Corpus& corpus, int min_count);

    // Builds a model straight from an idf table; the composition path only
    // needs idf values, so externally computed tables plug in here.
    static TfIdfModel from_idf(const std::vector<std::pair<std::string, double>>& idf_table,
                               uint32_t n_docs = 1);

    std::optional<double> idf(std::string_view term) const;
    const Vocabulary& vocabulary() const { return vocab_; }
    size_t term_count() const { return vocab_.terms.size(); }

    // Cache serialization hooks used by the embedding cache format.
    void write(std::ostream& out) const;
    static TfIdfModel read(std::istream& in);

private:
    Vocabulary vocab_;
    std::vector<double> idf_;  // indexed by term_id
};

struct TrainingParams {
    bool skipgram = true;
    int embedding_size = 256;
    int window = 10;
    int max_iterations = 10;  // epochs
    int min_count = 10;
    double subsample = 1e-5;
    int negatives = 10;
    uint64_t seed = 1;
};

// Unit-norm word vectors with a stable term -> row mapping.
class WordEmbeddings {
public:
    explicit WordEmbeddings(int dimension) : dim_(dimension) {}

    int dimension() const { return dim_; }
    size_t size() const { return terms_.size(); }
    const std::vector<std::string>& terms() const { return terms_; }

    // Normalizes before storing; rejects duplicates and dimension mismatches.
    void add(const std::string& term, const std::vector<double>& vec);

    // nullptr when the term is absent.
    const double* vector(std::string_view term) const;
    const double* row(size_t i) const { return data_.data() + i * dim_; }

    void save(const std::string& path) const;
    void save(std::ostream& out) const;

    // Text format: header "<count> <dimension>", then one term per line
    // followed by its components. Vectors are re-normalized on load; header
    // mismatches, ragged rows and duplicate terms are errors.
    static WordEmbeddings load(const std::string& path);
    static WordEmbeddings load(std::istream& in, const std::string& source_name);

private:
    int dim_;
    std::vector<std::string> terms_;
    std::vector<double> data_;  // row-major, unit rows
    std::unordered_map<std::string, uint32_t> index_;
};

struct TrainReport {
    std::vector<double> epoch_loss;  // mean negative-sampling loss per epoch
    size_t vocab_size = 0;
    uint64_t tokens_seen = 0;
};

// Skipgram with negative sampling over per-paper token streams
// (title + keywords + abstract), with frequency subsampling. Deterministic:
// one seeded RNG, sequential passes. Throws when min-count filtering leaves
// an empty vocabulary.
WordEmbeddings train_word_embeddings(const Corpus& corpus, const TrainingParams& params,
                                     TrainReport* report = nullptr);

// Unit-norm paper vector per the weighted bag-of-words rule: title and
// keyword occurrences count twice as much as abstract occurrences, each
// occurrence contributing idf(w) * w_hat. nullopt when no usable token is
// present in both the word store and the tf-idf model (unembeddable; such
// papers get co-citation-only treatment downstream).
std::optional<std::vector<double>> embed_paper(const PaperRecord& record,
                                               const WordEmbeddings& words,
                                               const TfIdfModel& tfidf);

// Arbitrary text treated as title-only.
std::optional<std::vector<double>> embed_text(std::string_view text, const WordEmbeddings& words,
                                              const TfIdfModel& tfidf);

// Per-ordinal embedding matrix for a corpus; rows are unit-norm, unembedded
// papers are flagged.
class EmbeddingSet {
public:
    EmbeddingSet() = default;
    EmbeddingSet(int dim, size_t n) : dim_(dim), data_(dim * n, 0.0), embedded_(n, 0) {}

    int dimension() const { return dim_; }
    size_t size() const { return embedded_.size(); }
    size_t embedded_count() const;
    bool embedded(uint32_t ordinal) const { return embedded_[ordinal] != 0; }
    const double* row(uint32_t ordinal) const { return data_.data() + size_t(ordinal) * dim_; }
    void set(uint32_t ordinal, const std::vector<double>& v);

private:
    int dim_ = 0;
    std::vector<double> data_;
    std::vector<uint8_t> embedded_;
};

EmbeddingSet embed_corpus(const Corpus& corpus, const WordEmbeddings& words,
                          const TfIdfModel& tfidf, int workers = 1);

// Versioned binary cache bundling the paper embeddings with the tf-idf model
// (the query path needs idf at run time). Fingerprint ties it to the corpus.
void save_embedding_cache(const std::string& path, const EmbeddingSet& embeddings,
                          const TfIdfModel& tfidf, uint64_t corpus_fingerprint);
std::pair<EmbeddingSet, TfIdfModel> load_embedding_cache(const std::string& path,
                                                         uint64_t expect_fingerprint);

}  // namespace paperrec
