#include "support/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace paperrec::testsupport {

namespace {

std::string padded(const char* prefix, int value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, value);
    return buf;
}

double uniform01(std::mt19937_64& rng) {
    return double(rng() >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace

Corpus random_citation_corpus(int papers, double edge_prob, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<PaperRecord> records(papers);
    for (int i = 0; i < papers; ++i) {
        records[i].id = padded("n", i, 6);
        records[i].title = "citation graph node " + std::to_string(i);
        for (int j = 0; j < papers; ++j) {
            if (j == i) continue;
            if (uniform01(rng) < edge_prob) records[i].references.push_back(padded("n", j, 6));  // ascending j: already sorted
        }
    }
    return Corpus::from_records(std::move(records));
}

namespace {

std::vector<PaperRecord> synthetic_records(const SynthTextParams& p) {
    std::mt19937_64 rng(p.seed);
    auto skewed = [&](int count) {
        double u = uniform01(rng);
        int idx = int(u * u * count);
        return std::min(idx, count - 1);
    };
    auto topic_word = [&](int topic) { return padded("t", topic, 2) + padded("w", skewed(p.words_per_topic), 3); };
    auto shared_word = [&]() { return padded("common", skewed(p.shared_words), 3); };
    auto draw_word = [&](int topic) {
        return uniform01(rng) < 0.8 ? topic_word(topic) : shared_word();
    };

    std::vector<std::vector<int>> by_topic(p.topics);
    std::vector<PaperRecord> records(p.papers);
    for (int i = 0; i < p.papers; ++i) {
        const int topic = i % p.topics;
        PaperRecord& rec = records[i];
        rec.id = padded("p", i, 6);

        std::string title;
        for (int w = 0; w < p.title_words; ++w) {
            if (w) title += ' ';
            title += draw_word(topic);
        }
        rec.title = title;
        rec.keywords = {topic_word(topic), topic_word(topic)};
        std::string abstract;
        for (int w = 0; w < p.abstract_words; ++w) {
            if (w) abstract += ' ';
            abstract += draw_word(topic);
        }
        rec.abstract = abstract;

        const int refs = int(rng() % uint64_t(p.max_references + 1));
        for (int r = 0; r < refs && i > 0; ++r) {
            int target;
            if (!by_topic[topic].empty() && uniform01(rng) < p.same_topic_reference_bias) {
                target = by_topic[topic][rng() % by_topic[topic].size()];
            } else {
                target = int(rng() % uint64_t(i));
            }
            rec.references.push_back(padded("p", target, 6));
        }

        std::sort(rec.references.begin(), rec.references.end());
        rec.references.erase(std::unique(rec.references.begin(), rec.references.end()),
                             rec.references.end());

        if (p.with_topics) {
            rec.topics.push_back({padded("topic", topic, 3), p.leaf_confidence, true});
            if (i % 10 == 0) rec.topics.push_back({padded("area", topic, 3), 0.3, false});
        }
        by_topic[topic].push_back(i);
    }
    return records;
}

}  // namespace

Corpus synthetic_text_corpus(const SynthTextParams& params) {
    return Corpus::from_records(synthetic_records(params));
}

std::vector<std::string> synthetic_text_corpus_lines(const SynthTextParams& params) {
    Corpus corpus = synthetic_text_corpus(params);
    std::ostringstream out;
    write_corpus(corpus, out);
    std::vector<std::string> lines;
    std::string line;
    std::istringstream in(out.str());
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

}  // namespace paperrec::testsupport

namespace paperrec::testsupport {

EmbeddingSet random_unit_embeddings(size_t n, int dim, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    EmbeddingSet set(dim, n);
    std::vector<double> v(dim);
    for (size_t i = 0; i < n; ++i) {
        double norm = 0.0;
        do {
            norm = 0.0;
            for (int d = 0; d < dim; ++d) {
                v[d] = gauss(rng);
                norm += v[d] * v[d];
            }
            norm = std::sqrt(norm);
        } while (norm < 1e-9);
        for (double& x : v) x /= norm;
        set.set(uint32_t(i), v);
    }
    return set;
}

}  // namespace paperrec::testsupport
