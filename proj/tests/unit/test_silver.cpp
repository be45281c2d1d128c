#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "faithsum/rng.hpp"
#include "faithsum/silver.hpp"

using namespace faithsum;

namespace {

Corpus scored_corpus(const std::vector<std::pair<std::string, double>>& aggregates) {
    Corpus corpus;
    corpus.language = "en";
    for (const auto& [id, agg] : aggregates) {
        SummaryPair pair;
        pair.doc.id = id;
        pair.doc.text = "doc of " + id;
        pair.summary_text = "summary of " + id;
        ScoreVector sv;
        sv.raw["m"] = agg;
        sv.higher_is_faithful["m"] = true;
        sv.normalized["m"] = agg;
        sv.aggregate = agg;
        pair.scores = sv;
        corpus.pairs.push_back(std::move(pair));
    }
    corpus.retokenize();
    return corpus;
}

}  // namespace

TEST_SUITE("silver") {

TEST_CASE("rank_and_select orders by aggregate with id tie-break") {
    const Corpus corpus = scored_corpus({{"d1", 0.9}, {"d2", 0.1}, {"d3", 0.5}});
    auto [pos, neg] = rank_and_select(corpus, 1);
    REQUIRE(pos.size() == 1);
    REQUIRE(neg.size() == 1);
    CHECK(pos.pairs[0].doc.id == "d1");
    CHECK(*pos.pairs[0].label == 1);
    CHECK(neg.pairs[0].doc.id == "d2");
    CHECK(*neg.pairs[0].label == 0);

    const Corpus tied = scored_corpus({{"b", 0.5}, {"a", 0.5}, {"c", 0.5}});
    auto [tp, tn] = rank_and_select(tied, 1);
    CHECK(tp.pairs[0].doc.id == "a");   // smallest id on top
    CHECK(tn.pairs[0].doc.id == "c");   // largest id at the bottom
}

TEST_CASE("rank_and_select with k = N/2 partitions the corpus") {
    const Corpus corpus = scored_corpus({{"a", 0.1}, {"b", 0.9}, {"c", 0.4}, {"d", 0.6}});
    auto [pos, neg] = rank_and_select(corpus, 2);
    std::set<std::string> ids;
    for (const auto& p : pos.pairs) ids.insert(p.doc.id);
    for (const auto& p : neg.pairs) ids.insert(p.doc.id);
    CHECK(ids.size() == 4);
    // min positive aggregate >= max negative aggregate
    double min_pos = 1.0;
    double max_neg = 0.0;
    for (const auto& p : pos.pairs) min_pos = std::min(min_pos, *p.scores->aggregate);
    for (const auto& p : neg.pairs) max_neg = std::max(max_neg, *p.scores->aggregate);
    CHECK(min_pos >= max_neg);
}

TEST_CASE("rank_and_select errors") {
    const Corpus corpus = scored_corpus({{"a", 0.1}, {"b", 0.9}});
    CHECK_THROWS_AS(rank_and_select(corpus, 2), std::invalid_argument);
    Corpus missing = corpus;
    missing.pairs[0].scores.reset();
    CHECK_THROWS_AS(rank_and_select(missing, 1), std::invalid_argument);
}

TEST_CASE("build_silver with identity translator keeps pairs, labels, counts") {
    std::vector<std::pair<std::string, double>> items;
    for (int i = 0; i < 40; ++i) {
        items.emplace_back("p" + std::to_string(i), 1.0 - 0.01 * i);
    }
    const Corpus corpus = scored_corpus(items);
    auto [pos, neg] = rank_and_select(corpus, 10);
    auto translator = make_translator("identity");
    const SplitSpec spec{0.8, 0.1, 0.1, 7};
    const SilverDataset silver = build_silver(pos, neg, *translator, "xx", spec);

    CHECK(silver.k == 10);
    CHECK(silver.positives.size() == 10);
    CHECK(silver.negatives.size() == 10);
    CHECK(silver.splits.train.size() == 16);
    CHECK(silver.splits.val.size() == 2);
    CHECK(silver.splits.test.size() == 2);
    CHECK(silver.splits.train.language == "xx");
    for (const Corpus* part : {&silver.splits.train, &silver.splits.val, &silver.splits.test}) {
        for (const SummaryPair& pair : part->pairs) {
            REQUIRE(pair.label.has_value());
            // identity translation: text unchanged
            CHECK(pair.doc.text == "doc of " + pair.doc.id);
        }
    }

    // same seed twice -> identical artifacts
    const SilverDataset again = build_silver(pos, neg, *translator, "xx", spec);
    REQUIRE(again.splits.train.size() == silver.splits.train.size());
    for (std::size_t i = 0; i < silver.splits.train.size(); ++i) {
        CHECK(again.splits.train.pairs[i].doc.id == silver.splits.train.pairs[i].doc.id);
    }
}

TEST_CASE("build_silver rejects empty sides and shared ids") {
    const Corpus corpus = scored_corpus({{"a", 0.9}, {"b", 0.1}});
    auto [pos, neg] = rank_and_select(corpus, 1);
    auto translator = make_translator("identity");
    const SplitSpec spec{1.0, 0.0, 0.0, 1};
    Corpus empty;
    CHECK_THROWS_AS(build_silver(pos, empty, *translator, "xx", spec), std::invalid_argument);
    CHECK_THROWS_AS(build_silver(empty, neg, *translator, "xx", spec), std::invalid_argument);
    CHECK_THROWS_AS(build_silver(pos, pos, *translator, "xx", spec), std::invalid_argument);
}

TEST_CASE("dictionary translator maps tokens") {
    const auto dict_path = std::filesystem::temp_directory_path() / "faithsum_dict.tsv";
    {
        std::ofstream out(dict_path);
        out << "a\talpha\n";
        out << "b\tbeta\n";
    }
    auto translator = make_translator("dictionary:" + dict_path.string());
    CHECK(translator->translate("a b", "en", "el") == "alpha beta");
    CHECK(translator->translate("a c", "en", "el") == "alpha c");
    std::filesystem::remove(dict_path);

    CHECK_THROWS_AS(make_translator("nope"), std::invalid_argument);
}

TEST_CASE("silver pairs equal source pairs under identity translation") {
    std::vector<std::pair<std::string, double>> items;
    for (int i = 0; i < 20; ++i) items.emplace_back("q" + std::to_string(i), 0.05 * i);
    const Corpus corpus = scored_corpus(items);
    auto [pos, neg] = rank_and_select(corpus, 5);
    auto translator = make_translator("identity");
    const SilverDataset silver =
        build_silver(pos, neg, *translator, "tgt", SplitSpec{1.0, 0.0, 0.0, 3});
    for (const SummaryPair& pair : silver.positives.pairs) {
        bool found = false;
        for (const SummaryPair& src : pos.pairs) {
            if (src.doc.id == pair.doc.id) {
                found = true;
                CHECK(src.doc.text == pair.doc.text);
                CHECK(src.summary_text == pair.summary_text);
            }
        }
        CHECK(found);
    }
}

}  // TEST_SUITE
