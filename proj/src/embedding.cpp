#include "paperrec/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "paperrec/detail/binary_io.hpp"
#include "paperrec/io_util.hpp"

namespace paperrec {

namespace {

constexpr double kZeroNorm = 1e-12;

bool all_digits(std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return c >= '0' && c <= '9'; });
}

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void normalize_or_throw(std::vector<double>& v, const std::string& what) {
    double n = norm(v);
    if (n < kZeroNorm) throw std::runtime_error(what + ": zero vector cannot be normalized");
    for (double& x : v) x /= n;
}

// Visits the paper's token stream field by field.
template <typename Fn>
void for_each_field(const PaperRecord& rec, Fn&& fn) {
    fn(rec.title, 2.0);
    for (const auto& kw : rec.keywords) fn(kw, 2.0);
    if (!rec.abstract.empty()) fn(rec.abstract, 1.0);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (current.size() >= 2 && !all_digits(current)) tokens.push_back(current);
        current.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c) && c < 128) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

TfIdfModel TfIdfModel::fit(const Corpus& corpus, int min_count) {
    if (corpus.size() == 0) throw std::runtime_error("cannot fit tf-idf on an empty corpus");
    if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");

    struct Tally {
        uint32_t df = 0;
        uint64_t cf = 0;
        uint32_t last_doc = UINT32_MAX;
    };
    std::unordered_map<std::string, Tally> tally;
    for (uint32_t doc = 0; doc < corpus.size(); ++doc) {
        for_each_field(corpus.record(doc), [&](const std::string& text, double) {
            for (auto& tok : tokenize(text)) {
                Tally& t = tally[tok];
                ++t.cf;
                if (t.last_doc != doc) {
                    ++t.df;
                    t.last_doc = doc;
                }
            }
        });
    }

    std::vector<std::string> retained;
    for (const auto& [term, t] : tally)
        if (t.cf >= uint64_t(min_count)) retained.push_back(term);
    std::sort(retained.begin(), retained.end());

    TfIdfModel model;
    model.vocab_.n_docs = static_cast<uint32_t>(corpus.size());
    model.idf_.resize(retained.size());
    const double n_docs = double(corpus.size());
    for (uint32_t id = 0; id < retained.size(); ++id) {
        const Tally& t = tally[retained[id]];
        model.vocab_.terms.emplace(retained[id], TermStats{id, t.df, t.cf});
        model.idf_[id] = std::log(n_docs / double(t.df));
    }
    return model;
}

TfIdfModel TfIdfModel::from_idf(const std::vector<std::pair<std::string, double>>& idf_table,
                                uint32_t n_docs) {
    TfIdfModel model;
    model.vocab_.n_docs = n_docs;
    std::vector<std::pair<std::string, double>> sorted = idf_table;
    std::sort(sorted.begin(), sorted.end());
    model.idf_.reserve(sorted.size());
    for (const auto& [term, idf] : sorted) {
        if (idf < 0.0) throw std::invalid_argument("idf must be >= 0 for term '" + term + "'");
        auto [it, inserted] = model.vocab_.terms.emplace(
            term, TermStats{uint32_t(model.idf_.size()), 1, 1});
        (void)it;
        if (!inserted) throw std::invalid_argument("duplicate term '" + term + "' in idf table");
        model.idf_.push_back(idf);
    }
    return model;
}

std::optional<double> TfIdfModel::idf(std::string_view term) const {
    auto it = vocab_.terms.find(std::string(term));
    if (it == vocab_.terms.end()) return std::nullopt;
    return idf_[it->second.term_id];
}

void TfIdfModel::write(std::ostream& out) const {
    detail::write_pod<uint32_t>(out, vocab_.n_docs);
    std::vector<const std::string*> order;
    order.reserve(vocab_.terms.size());
    for (const auto& [term, stats] : vocab_.terms) {
        (void)stats;
        order.push_back(&term);
    }
    std::sort(order.begin(), order.end(),
              [](const std::string* a, const std::string* b) { return *a < *b; });
    detail::write_pod<uint64_t>(out, order.size());
    for (const std::string* term : order) {
        const TermStats& stats = vocab_.terms.at(*term);
        detail::write_string(out, *term);
        detail::write_pod<uint32_t>(out, stats.term_id);
        detail::write_pod<uint32_t>(out, stats.document_frequency);
        detail::write_pod<uint64_t>(out, stats.corpus_frequency);
        detail::write_pod<double>(out, idf_[stats.term_id]);
    }
}

TfIdfModel TfIdfModel::read(std::istream& in) {
    TfIdfModel model;
    model.vocab_.n_docs = detail::read_pod<uint32_t>(in);
    auto count = detail::read_pod<uint64_t>(in);
    model.idf_.resize(count);
    for (uint64_t i = 0; i < count; ++i) {
        std::string term = detail::read_string(in);
        TermStats stats;
        stats.term_id = detail::read_pod<uint32_t>(in);
        stats.document_frequency = detail::read_pod<uint32_t>(in);
        stats.corpus_frequency = detail::read_pod<uint64_t>(in);
        double idf = detail::read_pod<double>(in);
        if (stats.term_id >= count) throw std::runtime_error("corrupt tf-idf block");
        model.idf_[stats.term_id] = idf;
        model.vocab_.terms.emplace(std::move(term), stats);
    }
    return model;
}

void WordEmbeddings::add(const std::string& term, const std::vector<double>& vec) {
    if (int(vec.size()) != dim_)
        throw std::runtime_error("word vector for '" + term + "' has dimension " +
                                 std::to_string(vec.size()) + ", expected " +
                                 std::to_string(dim_));
    auto [it, inserted] = index_.emplace(term, static_cast<uint32_t>(terms_.size()));
    (void)it;
    if (!inserted) throw std::runtime_error("duplicate term '" + term + "'");
    std::vector<double> unit = vec;
    normalize_or_throw(unit, "word vector for '" + term + "'");
    terms_.push_back(term);
    data_.insert(data_.end(), unit.begin(), unit.end());
}

const double* WordEmbeddings::vector(std::string_view term) const {
    auto it = index_.find(std::string(term));
    if (it == index_.end()) return nullptr;
    return row(it->second);
}

void WordEmbeddings::save(const std::string& path) const {
    atomic_write(path, [&](std::ostream& out) { save(out); });
}

void WordEmbeddings::save(std::ostream& out) const {
    out << terms_.size() << ' ' << dim_ << '\n';
    char buf[40];
    for (size_t i = 0; i < terms_.size(); ++i) {
        out << terms_[i];
        const double* v = row(i);
        for (int d = 0; d < dim_; ++d) {
            std::snprintf(buf, sizeof(buf), " %.9g", v[d]);
            out << buf;
        }
        out << '\n';
    }
}

WordEmbeddings WordEmbeddings::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read word vectors from " + path);
    return load(in, path);
}

WordEmbeddings WordEmbeddings::load(std::istream& in, const std::string& source_name) {
    uint64_t count = 0;
    int dim = 0;
    if (!(in >> count >> dim) || dim <= 0)
        throw std::runtime_error(source_name + ": bad word-vector header");
    WordEmbeddings store(dim);
    std::string term;
    std::vector<double> vec(dim);
    for (uint64_t i = 0; i < count; ++i) {
        if (!(in >> term))
            throw std::runtime_error(source_name + ": header declares " + std::to_string(count) +
                                     " vectors but only " + std::to_string(i) + " present");
        for (int d = 0; d < dim; ++d) {
            if (!(in >> vec[d]))
                throw std::runtime_error(source_name + ": short row for term '" + term + "'");
        }
        store.add(term, vec);
    }
    std::string extra;
    if (in >> extra)
        throw std::runtime_error(source_name + ": trailing data after declared " +
                                 std::to_string(count) + " vectors");
    return store;
}

namespace {

// Classic skipgram/negative-sampling trainer, deliberately sequential: one
// seeded RNG and a fixed visit order make runs bit-identical.
class SkipgramTrainer {
public:
    SkipgramTrainer(const Corpus& corpus, const TrainingParams& params)
        : params_(params), rng_(params.seed) {
        build_vocab(corpus);
        build_docs(corpus);
        build_negative_table();
        init_weights();
    }

    WordEmbeddings run(TrainReport* report) {
        const uint64_t total = total_tokens_ * uint64_t(params_.max_iterations);
        uint64_t processed = 0;
        std::vector<double> grad(params_.embedding_size);
        std::vector<uint32_t> sent;
        if (report) {
            report->vocab_size = vocab_terms_.size();
            report->tokens_seen = total_tokens_;
        }

        for (int epoch = 0; epoch < params_.max_iterations; ++epoch) {
            double loss = 0.0;
            uint64_t pairs = 0;
            for (const auto& doc : docs_) {
                subsample(doc, sent);
                const int len = static_cast<int>(sent.size());
                for (int i = 0; i < len; ++i) {
                    const double alpha =
                        kAlpha0 * std::max(1.0 - double(processed) / double(total + 1), 1e-4);
                    const int shrink = static_cast<int>(rng_() % uint64_t(params_.window));
                    const int reach = params_.window - shrink;
                    for (int j = std::max(0, i - reach); j <= std::min(len - 1, i + reach); ++j) {
                        if (j == i) continue;
                        loss += train_pair(sent[j], sent[i], alpha, grad);
                        ++pairs;
                    }
                }
                processed += doc.size();
            }
            if (report) report->epoch_loss.push_back(pairs ? loss / double(pairs) : 0.0);
        }

        WordEmbeddings store(params_.embedding_size);
        const int dim = params_.embedding_size;
        for (size_t w = 0; w < vocab_terms_.size(); ++w) {
            std::vector<double> v(syn0_.begin() + w * dim, syn0_.begin() + (w + 1) * dim);
            store.add(vocab_terms_[w], v);
        }
        return store;
    }

private:
    static constexpr double kAlpha0 = 0.025;
    static constexpr size_t kTableSize = 1u << 20;

    void build_vocab(const Corpus& corpus) {
        std::unordered_map<std::string, uint64_t> counts;
        for (const auto& rec : corpus.records()) {
            for_each_field(rec, [&](const std::string& text, double) {
                for (auto& tok : tokenize(text)) ++counts[tok];
            });
        }
        for (auto& [term, count] : counts)
            if (count >= uint64_t(params_.min_count)) vocab_terms_.push_back(term);
        if (vocab_terms_.empty())
            throw std::runtime_error("vocabulary is empty after min-count filtering");
        // frequency-descending order, term ascending on ties
        std::sort(vocab_terms_.begin(), vocab_terms_.end(),
                  [&](const std::string& a, const std::string& b) {
                      uint64_t ca = counts[a], cb = counts[b];
                      if (ca != cb) return ca > cb;
                      return a < b;
                  });
        vocab_counts_.reserve(vocab_terms_.size());
        for (uint32_t i = 0; i < vocab_terms_.size(); ++i) {
            vocab_index_.emplace(vocab_terms_[i], i);
            vocab_counts_.push_back(counts[vocab_terms_[i]]);
            total_tokens_ += counts[vocab_terms_[i]];
        }
    }

    void build_docs(const Corpus& corpus) {
        docs_.reserve(corpus.size());
        for (const auto& rec : corpus.records()) {
            std::vector<uint32_t> doc;
            for_each_field(rec, [&](const std::string& text, double) {
                for (auto& tok : tokenize(text)) {
                    auto it = vocab_index_.find(tok);
                    if (it != vocab_index_.end()) doc.push_back(it->second);
                }
            });
            docs_.push_back(std::move(doc));
        }
    }

    void build_negative_table() {
        table_.resize(kTableSize);
        double total_pow = 0.0;
        for (uint64_t c : vocab_counts_) total_pow += std::pow(double(c), 0.75);
        size_t word = 0;
        double cum = std::pow(double(vocab_counts_[0]), 0.75) / total_pow;
        for (size_t i = 0; i < kTableSize; ++i) {
            table_[i] = static_cast<uint32_t>(word);
            if (double(i + 1) / double(kTableSize) > cum && word + 1 < vocab_counts_.size()) {
                ++word;
                cum += std::pow(double(vocab_counts_[word]), 0.75) / total_pow;
            }
        }
    }

    void init_weights() {
        const size_t n = vocab_terms_.size() * size_t(params_.embedding_size);
        syn0_.resize(n);
        syn1_.assign(n, 0.0);
        for (double& x : syn0_) x = (uniform01() - 0.5) / params_.embedding_size;
    }

    double uniform01() { return double(rng_() >> 11) * (1.0 / 9007199254740992.0); }

    void subsample(const std::vector<uint32_t>& doc, std::vector<uint32_t>& sent) {
        sent.clear();
        if (params_.subsample <= 0.0) {
            sent = doc;
            return;
        }
        const double threshold = params_.subsample * double(total_tokens_);
        for (uint32_t id : doc) {
            const double cf = double(vocab_counts_[id]);
            const double keep = (std::sqrt(cf / threshold) + 1.0) * threshold / cf;
            if (keep >= 1.0 || uniform01() < keep) sent.push_back(id);
        }
    }

    static double sigmoid(double x) {
        if (x > 40.0) return 1.0;
        if (x < -40.0) return 0.0;
        return 1.0 / (1.0 + std::exp(-x));
    }

    // input vector of `context` predicts `center`; returns the pair's NS loss
    double train_pair(uint32_t context, uint32_t center, double alpha, std::vector<double>& grad) {
        const int dim = params_.embedding_size;
        double* in = syn0_.data() + size_t(context) * dim;
        std::fill(grad.begin(), grad.end(), 0.0);
        double loss = 0.0;
        for (int d = 0; d <= params_.negatives; ++d) {
            uint32_t target;
            double label;
            if (d == 0) {
                target = center;
                label = 1.0;
            } else {
                target = table_[rng_() % kTableSize];
                if (target == center) continue;
                label = 0.0;
            }
            double* out = syn1_.data() + size_t(target) * dim;
            double f = 0.0;
            for (int c = 0; c < dim; ++c) f += in[c] * out[c];
            const double p = sigmoid(f);
            const double g = (label - p) * alpha;
            loss += label > 0.5 ? -std::log(std::max(p, 1e-12))
                                : -std::log(std::max(1.0 - p, 1e-12));
            for (int c = 0; c < dim; ++c) grad[c] += g * out[c];
            for (int c = 0; c < dim; ++c) out[c] += g * in[c];
        }
        for (int c = 0; c < dim; ++c) in[c] += grad[c];
        return loss;
    }

    TrainingParams params_;
    std::mt19937_64 rng_;
    std::vector<std::string> vocab_terms_;   // frequency-descending
    std::vector<uint64_t> vocab_counts_;
    std::unordered_map<std::string, uint32_t> vocab_index_;
    std::vector<std::vector<uint32_t>> docs_;
    std::vector<uint32_t> table_;
    std::vector<double> syn0_, syn1_;
    uint64_t total_tokens_ = 0;
};

}  // namespace

WordEmbeddings train_word_embeddings(const Corpus& corpus, const TrainingParams& params,
                                     TrainReport* report) {
    if (!params.skipgram)
        throw std::invalid_argument("only skipgram training is implemented");
    if (params.embedding_size < 1) throw std::invalid_argument("embedding_size must be >= 1");
    if (params.window < 1) throw std::invalid_argument("window must be >= 1");
    if (params.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    if (params.min_count < 1) throw std::invalid_argument("min_count must be >= 1");
    if (params.negatives < 1) throw std::invalid_argument("negatives must be >= 1");
    if (params.subsample < 0.0) throw std::invalid_argument("subsample must be >= 0");
    if (corpus.size() == 0) throw std::runtime_error("cannot train on an empty corpus");
    SkipgramTrainer trainer(corpus, params);
    return trainer.run(report);
}

namespace {

std::optional<std::vector<double>> compose(const WordEmbeddings& words, const TfIdfModel& tfidf,
                                           const PaperRecord& rec) {
    std::vector<double> acc(words.dimension(), 0.0);
    for_each_field(rec, [&](const std::string& text, double weight) {
        for (auto& tok : tokenize(text)) {
            auto idf = tfidf.idf(tok);
            if (!idf) continue;
            const double* wv = words.vector(tok);
            if (!wv) continue;
            const double scale = weight * *idf;
            for (int d = 0; d < words.dimension(); ++d) acc[d] += scale * wv[d];
        }
    });
    double n = norm(acc);
    if (n < kZeroNorm) return std::nullopt;
    for (double& x : acc) x /= n;
    return acc;
}

}  // namespace

std::optional<std::vector<double>> embed_paper(const PaperRecord& record,
                                               const WordEmbeddings& words,
                                               const TfIdfModel& tfidf) {
    return compose(words, tfidf, record);
}

std::optional<std::vector<double>> embed_text(std::string_view text, const WordEmbeddings& words,
                                              const TfIdfModel& tfidf) {
    PaperRecord rec;
    rec.title.assign(text);
    return compose(words, tfidf, rec);
}

size_t EmbeddingSet::embedded_count() const {
    size_t n = 0;
    for (uint8_t f : embedded_) n += f;
    return n;
}

void EmbeddingSet::set(uint32_t ordinal, const std::vector<double>& v) {
    if (int(v.size()) != dim_) throw std::runtime_error("embedding dimension mismatch");
    std::copy(v.begin(), v.end(), data_.begin() + size_t(ordinal) * dim_);
    embedded_[ordinal] = 1;
}

EmbeddingSet embed_corpus(const Corpus& corpus, const WordEmbeddings& words,
                          const TfIdfModel& tfidf, int workers) {
    EmbeddingSet set(words.dimension(), corpus.size());
    const uint32_t n = static_cast<uint32_t>(corpus.size());
    auto work = [&](uint32_t begin, uint32_t end) {
        for (uint32_t i = begin; i < end; ++i) {
            if (auto v = embed_paper(corpus.record(i), words, tfidf)) set.set(i, *v);
        }
    };
    if (workers <= 1 || n < 2) {
        work(0, n);
    } else {
        const uint32_t w = std::min<uint32_t>(workers, n);
        std::vector<std::thread> threads;
        for (uint32_t t = 0; t < w; ++t) {
            uint32_t begin = uint64_t(n) * t / w;
            uint32_t end = uint64_t(n) * (t + 1) / w;
            threads.emplace_back(work, begin, end);
        }
        for (auto& th : threads) th.join();
    }
    return set;
}

namespace {
constexpr char kEmbeddingMagic[] = "PRECEMB1";
}

void save_embedding_cache(const std::string& path, const EmbeddingSet& embeddings,
                          const TfIdfModel& tfidf, uint64_t corpus_fingerprint) {
    atomic_write(path, [&](std::ostream& out) {
        out.write(kEmbeddingMagic, 8);
        detail::write_pod<uint64_t>(out, corpus_fingerprint);
        detail::write_pod<int32_t>(out, embeddings.dimension());
        detail::write_pod<uint64_t>(out, embeddings.size());
        for (uint32_t i = 0; i < embeddings.size(); ++i)
            detail::write_pod<uint8_t>(out, embeddings.embedded(i) ? 1 : 0);
        for (uint32_t i = 0; i < embeddings.size(); ++i)
            out.write(reinterpret_cast<const char*>(embeddings.row(i)),
                      std::streamsize(sizeof(double)) * embeddings.dimension());
        tfidf.write(out);
    });
}

std::pair<EmbeddingSet, TfIdfModel> load_embedding_cache(const std::string& path,
                                                         uint64_t expect_fingerprint) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read embedding cache " + path);
    detail::expect_magic(in, kEmbeddingMagic, path);
    auto fingerprint = detail::read_pod<uint64_t>(in);
    if (fingerprint != expect_fingerprint)
        throw std::runtime_error(path + ": built from a different corpus; re-run embed");
    auto dim = detail::read_pod<int32_t>(in);
    auto n = detail::read_pod<uint64_t>(in);
    EmbeddingSet set(dim, n);
    std::vector<uint8_t> flags(n);
    for (uint64_t i = 0; i < n; ++i) flags[i] = detail::read_pod<uint8_t>(in);
    std::vector<double> row(dim);
    for (uint64_t i = 0; i < n; ++i) {
        in.read(reinterpret_cast<char*>(row.data()), std::streamsize(sizeof(double)) * dim);
        if (!in) throw std::runtime_error(path + ": truncated embedding data");
        if (flags[i]) set.set(static_cast<uint32_t>(i), row);
    }
    TfIdfModel tfidf = TfIdfModel::read(in);
    return {std::move(set), std::move(tfidf)};
}

}  // namespace paperrec
