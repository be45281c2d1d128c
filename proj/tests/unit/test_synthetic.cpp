#include <doctest.h>

#include <cmath>

#include "faithsum/metrics.hpp"
#include "faithsum/synthetic.hpp"

using namespace faithsum;

TEST_SUITE("synthetic") {

TEST_CASE("rate 0 gives faithful labels and zero enfs everywhere") {
    GenSpec spec;
    spec.num_pairs = 200;
    spec.hallucination_rate = 0.0;
    spec.seed = 5;
    const Corpus corpus = generate(spec);
    REQUIRE(corpus.size() == 200);
    for (const SummaryPair& pair : corpus.pairs) {
        CHECK(*pair.label == 1);
        CHECK(enfs_pct(pair.summary_text, pair.doc.text) == doctest::Approx(0.0));
    }
}

TEST_CASE("rate 1 plants a detectable sentinel in every pair") {
    GenSpec spec;
    spec.num_pairs = 200;
    spec.hallucination_rate = 1.0;
    spec.seed = 6;
    const Corpus corpus = generate(spec);
    for (const SummaryPair& pair : corpus.pairs) {
        CHECK(*pair.label == 0);
        CHECK(enfs_pct(pair.summary_text, pair.doc.text) > 0.0);
        // the sentinel is absent from the document by construction
        bool has_sentinel = false;
        for (const std::string& tok : pair.summary) {
            if (tok.rfind("zorb", 0) == 0) {
                has_sentinel = true;
                CHECK(pair.doc.text.find("Zorb") == std::string::npos);
            }
        }
        CHECK(has_sentinel);
    }
}

TEST_CASE("hallucinated count stays within 3 sigma of the binomial mean") {
    GenSpec spec;
    spec.num_pairs = 1000;
    spec.hallucination_rate = 0.3;
    spec.seed = 7;
    const Corpus corpus = generate(spec);
    std::size_t negatives = 0;
    for (const SummaryPair& pair : corpus.pairs) {
        if (*pair.label == 0) ++negatives;
    }
    const double mean = 300.0;
    const double sigma = std::sqrt(1000.0 * 0.3 * 0.7);
    CHECK(std::fabs(static_cast<double>(negatives) - mean) <= 3.0 * sigma);
}

TEST_CASE("determinism per seed, divergence across seeds") {
    GenSpec spec;
    spec.num_pairs = 50;
    spec.hallucination_rate = 0.5;
    spec.seed = 11;
    const Corpus a = generate(spec);
    const Corpus b = generate(spec);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.pairs[i].doc.text == b.pairs[i].doc.text);
        CHECK(a.pairs[i].summary_text == b.pairs[i].summary_text);
    }
    spec.seed = 12;
    const Corpus c = generate(spec);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        differs = differs || a.pairs[i].doc.text != c.pairs[i].doc.text;
    }
    CHECK(differs);
}

TEST_CASE("clean summaries are document extracts") {
    GenSpec spec;
    spec.num_pairs = 100;
    spec.hallucination_rate = 0.0;
    spec.seed = 13;
    const Corpus corpus = generate(spec);
    for (const SummaryPair& pair : corpus.pairs) {
        CHECK(novel_ngram_pct(pair.summary, pair.doc.tokens, 2) == doctest::Approx(0.0));
    }
}

TEST_CASE("invalid specs are rejected") {
    GenSpec spec;
    spec.num_pairs = 0;
    CHECK_THROWS_AS(generate(spec), std::invalid_argument);
    spec = GenSpec{};
    spec.hallucination_rate = 1.5;
    CHECK_THROWS_AS(generate(spec), std::invalid_argument);
    spec = GenSpec{};
    spec.summary_len_max = 40;  // cannot fit inside the shortest document
    CHECK_THROWS_AS(generate(spec), std::invalid_argument);
}

}  // TEST_SUITE
