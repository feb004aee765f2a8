#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "paperrec/corpus.hpp"
#include "support/synthetic.hpp"

using namespace paperrec;

namespace {

Corpus parse_lines(const std::string& text) {
    std::istringstream in(text);
    return parse_corpus(in, "test");
}

bool same_records(const Corpus& a, const Corpus& b) {
    if (a.size() != b.size()) return false;
    for (uint32_t i = 0; i < a.size(); ++i) {
        const auto& ra = a.record(i);
        const auto& rb = b.record(i);
        if (ra.id != rb.id || ra.title != rb.title || ra.keywords != rb.keywords ||
            ra.abstract != rb.abstract || ra.references != rb.references)
            return false;
        if (ra.topics.size() != rb.topics.size()) return false;
        for (size_t t = 0; t < ra.topics.size(); ++t) {
            if (ra.topics[t].topic_id != rb.topics[t].topic_id ||
                ra.topics[t].confidence != rb.topics[t].confidence ||
                ra.topics[t].is_leaf != rb.topics[t].is_leaf)
                return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("parse_corpus accepts valid lines and counts them") {
    Corpus c = parse_lines(
        R"({"id":"p1","title":"First paper"})"
        "\n"
        R"({"id":"p2","title":"Second paper","keywords":["kmeans"],"abstract":"text"})"
        "\n"
        R"({"id":"p3","title":"Third paper","references":["p1","p2"]})"
        "\n");
    CHECK(c.size() == 3);
    CHECK(c.find("p2").has_value());
    CHECK_FALSE(c.find("p9").has_value());
}

TEST_CASE("parse_corpus cleans self-references and duplicates") {
    Corpus c = parse_lines(R"({"id":"p1","title":"t","references":["p1","p2","p2","p3"]})"
                           "\n");
    CHECK(c.record(0).references == std::vector<PaperId>{"p2", "p3"});
}

TEST_CASE("parse_corpus rejects duplicate ids naming the id and line") {
    std::string text =
        R"({"id":"p1","title":"a"})"
        "\n"
        R"({"id":"p1","title":"b"})"
        "\n";
    CHECK_THROWS_WITH_AS(parse_lines(text), doctest::Contains("duplicate id 'p1'"),
                         std::runtime_error);
}

TEST_CASE("parse_corpus reports malformed JSON with the line number") {
    std::string text =
        R"({"id":"p1","title":"a"})"
        "\n{broken\n";
    CHECK_THROWS_WITH_AS(parse_lines(text), doctest::Contains("test:2"), std::runtime_error);
}

TEST_CASE("parse_corpus rejects missing or blank titles") {
    CHECK_THROWS_AS(parse_lines(R"({"id":"p1"})"
                                "\n"),
                    std::runtime_error);
    CHECK_THROWS_AS(parse_lines(R"({"id":"p1","title":"   "})"
                                "\n"),
                    std::runtime_error);
}

TEST_CASE("parse_corpus rejects ids with whitespace") {
    CHECK_THROWS_AS(parse_lines(R"({"id":"p 1","title":"t"})"
                                "\n"),
                    std::runtime_error);
    CHECK_THROWS_AS(parse_lines(R"({"id":"","title":"t"})"
                                "\n"),
                    std::runtime_error);
}

TEST_CASE("parse_corpus rejects out-of-range topic confidence") {
    CHECK_THROWS_AS(
        parse_lines(
            R"({"id":"p1","title":"t","topics":[{"topic_id":"x","confidence":1.5,"is_leaf":true}]})"
            "\n"),
        std::runtime_error);
}

TEST_CASE("parse_corpus ignores unknown fields") {
    Corpus c = parse_lines(R"({"id":"p1","title":"t","venue":"x","year":2011})"
                           "\n");
    CHECK(c.size() == 1);
}

TEST_CASE("parse_corpus result does not depend on input order") {
    std::string a =
        R"({"id":"p1","title":"a"})"
        "\n"
        R"({"id":"p2","title":"b"})"
        "\n";
    std::string b =
        R"({"id":"p2","title":"b"})"
        "\n"
        R"({"id":"p1","title":"a"})"
        "\n";
    CHECK(same_records(parse_lines(a), parse_lines(b)));
}

TEST_CASE("parse_corpus round-trips through the canonical serialization") {
    testsupport::SynthTextParams params;
    params.papers = 60;
    params.topics = 4;
    Corpus original = testsupport::synthetic_text_corpus(params);
    std::ostringstream out;
    write_corpus(original, out);
    std::istringstream in(out.str());
    Corpus reparsed = parse_corpus(in, "roundtrip");
    CHECK(same_records(original, reparsed));
    CHECK(original.fingerprint() == reparsed.fingerprint());
}

TEST_CASE("citation index inverts a small chain") {
    Corpus c = parse_lines(
        R"({"id":"A","title":"t","references":["B"]})"
        "\n"
        R"({"id":"B","title":"t","references":["C"]})"
        "\n"
        R"({"id":"C","title":"t"})"
        "\n");
    CitationIndex index(c);
    const uint32_t a = *c.find("A"), b = *c.find("B"), cc = *c.find("C");
    CHECK(index.cited_by(cc) == std::vector<uint32_t>{b});
    CHECK(index.cited_by(b) == std::vector<uint32_t>{a});
    CHECK(index.cited_by(a).empty());
    CHECK(index.dangling_references() == 0);
}

TEST_CASE("citation index drops and counts dangling references") {
    Corpus c = parse_lines(R"({"id":"A","title":"t","references":["X"]})"
                           "\n");
    CitationIndex index(c);
    CHECK(index.cites(0).empty());
    CHECK(index.dangling_references() == 1);
}

TEST_CASE("citation index is the exact inverse on a random graph") {
    Corpus c = testsupport::random_citation_corpus(500, 0.01, 77);
    CitationIndex index(c);
    const size_t n = c.size();
    // brute-force membership check over every ordered pair
    for (uint32_t i = 0; i < n; ++i) {
        for (uint32_t j = 0; j < n; ++j) {
            bool forward = std::binary_search(index.cites(i).begin(), index.cites(i).end(), j);
            bool inverse =
                std::binary_search(index.cited_by(j).begin(), index.cited_by(j).end(), i);
            if (forward != inverse) {
                CAPTURE(i);
                CAPTURE(j);
                REQUIRE(forward == inverse);
            }
        }
    }
    uint64_t out_total = 0, in_total = 0;
    for (uint32_t i = 0; i < n; ++i) {
        out_total += index.cites(i).size();
        in_total += index.cited_by(i).size();
    }
    CHECK(out_total == in_total);
    CHECK(out_total == index.edge_count());
}

TEST_CASE("corpus_stats fractions") {
    SUBCASE("every paper referenced") {
        Corpus c = parse_lines(
            R"({"id":"A","title":"t","references":["B"]})"
            "\n"
            R"({"id":"B","title":"t","references":["A"]})"
            "\n");
        CitationIndex index(c);
        CHECK(corpus_stats(c, index).fraction_with_references == 1.0);
    }
    SUBCASE("4 of 10 papers have references") {
        std::ostringstream text;
        for (int i = 0; i < 10; ++i) {
            text << R"({"id":"p)" << i << R"(","title":"t")";
            if (i < 4) text << R"(,"references":["p9"])";
            text << "}\n";
        }
        Corpus c = parse_lines(text.str());
        CitationIndex index(c);
        StatsReport stats = corpus_stats(c, index);
        CHECK(stats.fraction_with_references == doctest::Approx(0.4));
    }
}

TEST_CASE("corpus_stats mean references matches an independent recount") {
    testsupport::SynthTextParams params;
    params.papers = 1000;
    params.seed = 5;
    Corpus c = testsupport::synthetic_text_corpus(params);
    CitationIndex index(c);
    StatsReport stats = corpus_stats(c, index);

    // recount straight from the records
    uint64_t total = 0, referenced = 0;
    for (uint32_t i = 0; i < c.size(); ++i) {
        uint64_t resolved = 0;
        for (const auto& ref : c.record(i).references)
            if (c.find(ref)) ++resolved;
        if (resolved > 0) {
            ++referenced;
            total += resolved;
        }
    }
    REQUIRE(referenced > 0);
    CHECK(stats.papers_with_references == referenced);
    CHECK(stats.mean_references_per_referenced_paper ==
          doctest::Approx(double(total) / double(referenced)).epsilon(1e-12));
}
