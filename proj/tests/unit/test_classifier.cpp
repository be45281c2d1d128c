#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "faithsum/classifier.hpp"
#include "faithsum/rng.hpp"
#include "faithsum/silver.hpp"
#include "faithsum/synthetic.hpp"

using namespace faithsum;

namespace {

SilverDataset separable_silver(std::size_t pairs, std::uint64_t seed) {
    GenSpec spec;
    spec.num_pairs = pairs;
    spec.doc_len_min = 10;
    spec.doc_len_max = 14;
    spec.summary_len_min = 4;
    spec.summary_len_max = 6;
    spec.vocab_size = 30;
    spec.sentinel_pool = 2;
    spec.hallucination_rate = 0.5;
    spec.seed = seed;
    const Corpus corpus = generate(spec);
    SilverDataset silver;
    Corpus merged;
    merged.language = corpus.language;
    for (const SummaryPair& pair : corpus.pairs) {
        (*pair.label == 1 ? silver.positives : silver.negatives).pairs.push_back(pair);
        merged.pairs.push_back(pair);
    }
    silver.k = std::min(silver.positives.size(), silver.negatives.size());
    silver.splits = split_corpus(merged, SplitSpec{0.8, 0.1, 0.1, seed + 1});
    return silver;
}

ClassifierConfig small_classifier() {
    ClassifierConfig cfg;
    cfg.d_model = 16;
    cfg.d_ff = 32;
    cfg.n_heads = 2;
    cfg.layers = 1;
    cfg.max_len = 64;
    return cfg;
}

ClassifierTrainConfig quick_train(std::uint64_t seed) {
    ClassifierTrainConfig tc;
    tc.lr = 0.4;
    tc.batch_size = 16;
    tc.epochs = 4;
    tc.seed = seed;
    return tc;
}

}  // namespace

TEST_SUITE("classifier") {

TEST_CASE("encode_pair layout and truncation") {
    const TokenIds doc{10, 11};
    const TokenIds summ{12};
    CHECK(encode_pair(doc, summ, 16) ==
          TokenIds{Vocabulary::kCls, 10, 11, Vocabulary::kSep, 12, Vocabulary::kSep});

    // long document: truncated from the end, summary intact, length exact
    TokenIds long_doc(600, 10);
    TokenIds summary(10, 12);
    const TokenIds enc = encode_pair(long_doc, summary, 512);
    CHECK(enc.size() == 512);
    CHECK(enc.front() == Vocabulary::kCls);
    CHECK(enc.back() == Vocabulary::kSep);
    // summary segment survives in full
    std::size_t sep_count = 0;
    for (int id : enc) sep_count += id == Vocabulary::kSep ? 1 : 0;
    CHECK(sep_count == 2);
    CHECK(std::count(enc.begin(), enc.end(), 12) == 10);

    // empty summary is representable
    const TokenIds empty = encode_pair(doc, {}, 16);
    CHECK(empty == TokenIds{Vocabulary::kCls, 10, 11, Vocabulary::kSep, Vocabulary::kSep});

    // summary survives even when the document is fully dropped
    const TokenIds tight = encode_pair(long_doc, summary, 8);
    CHECK(tight.size() == 8);
    CHECK(std::count(tight.begin(), tight.end(), 12) == 5);
    CHECK(std::count(tight.begin(), tight.end(), 10) == 0);

    CHECK_THROWS_AS(encode_pair(doc, summ, 3), std::invalid_argument);
}

TEST_CASE("prediction is bounded and deterministic") {
    const SilverDataset silver = separable_silver(40, 3);
    const Vocabulary vocab = Vocabulary::build(silver.splits.train);
    const FaithfulnessClassifier clf =
        FaithfulnessClassifier::init(small_classifier(), vocab, 7);
    for (const SummaryPair& pair : silver.splits.train.pairs) {
        const double p = clf.predict_pair(pair);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK(clf.predict_pair(pair) == p);
    }
}

TEST_CASE("training separates the sentinel signal") {
    const SilverDataset silver = separable_silver(240, 11);
    const FaithfulnessClassifier clf =
        train_classifier(silver, small_classifier(), quick_train(13));

    const ClassifierEval eval = evaluate_classifier(clf, silver.splits.test);
    CHECK(eval.accuracy >= 90.0);
    CHECK(eval.f1 >= 90.0);

    double pos_mean = 0.0;
    double neg_mean = 0.0;
    std::size_t pos_n = 0;
    std::size_t neg_n = 0;
    for (const SummaryPair& pair : silver.splits.test.pairs) {
        const double p = clf.predict_pair(pair);
        if (*pair.label == 1) {
            pos_mean += p;
            ++pos_n;
        } else {
            neg_mean += p;
            ++neg_n;
        }
    }
    REQUIRE(pos_n > 0);
    REQUIRE(neg_n > 0);
    CHECK(pos_mean / static_cast<double>(pos_n) > neg_mean / static_cast<double>(neg_n));
}

TEST_CASE("training determinism and single-class rejection") {
    const SilverDataset silver = separable_silver(60, 17);
    const FaithfulnessClassifier a =
        train_classifier(silver, small_classifier(), quick_train(19));
    const FaithfulnessClassifier b =
        train_classifier(silver, small_classifier(), quick_train(19));
    for (const SummaryPair& pair : silver.splits.test.pairs) {
        CHECK(a.predict_pair(pair) == b.predict_pair(pair));
    }

    SilverDataset single = silver;
    Corpus only_pos;
    only_pos.language = silver.splits.train.language;
    for (const SummaryPair& pair : silver.splits.train.pairs) {
        if (*pair.label == 1) only_pos.pairs.push_back(pair);
    }
    single.splits.train = only_pos;
    CHECK_THROWS_AS(train_classifier(single, small_classifier(), quick_train(19)),
                    std::invalid_argument);

    SilverDataset empty = silver;
    empty.splits.train = Corpus{};
    CHECK_THROWS_AS(train_classifier(empty, small_classifier(), quick_train(19)),
                    std::invalid_argument);
}

TEST_CASE("evaluate_classifier confusion arithmetic") {
    // all-correct and all-negative degenerate predictors via thresholds
    const SilverDataset silver = separable_silver(80, 23);
    const FaithfulnessClassifier clf =
        train_classifier(silver, small_classifier(), quick_train(29));

    // threshold 0 => everything predicted faithful
    const ClassifierEval all_pos = evaluate_classifier(clf, silver.splits.test, 0.0);
    CHECK(all_pos.recall == doctest::Approx(100.0));
    // threshold above 1 => everything predicted hallucinated
    const ClassifierEval all_neg = evaluate_classifier(clf, silver.splits.test, 1.01);
    CHECK(all_neg.recall == doctest::Approx(0.0));
    CHECK(all_neg.precision == doctest::Approx(0.0));
    CHECK(all_neg.f1 == doctest::Approx(0.0));

    Corpus unlabeled = silver.splits.test;
    unlabeled.pairs[0].label.reset();
    CHECK_THROWS_AS(evaluate_classifier(clf, unlabeled), std::invalid_argument);
}

TEST_CASE("checkpoint round-trip preserves predictions bit-exactly") {
    const SilverDataset silver = separable_silver(60, 31);
    const FaithfulnessClassifier clf =
        train_classifier(silver, small_classifier(), quick_train(37));
    const auto path = std::filesystem::temp_directory_path() / "faithsum_clf.ckpt";
    save_checkpoint(clf.to_checkpoint(), path.string());
    const FaithfulnessClassifier restored =
        FaithfulnessClassifier::from_checkpoint(load_checkpoint(path.string()));
    for (const SummaryPair& pair : silver.splits.test.pairs) {
        CHECK(restored.predict_pair(pair) == clf.predict_pair(pair));
    }
    std::filesystem::remove(path);
}

TEST_CASE("classifier scorer adapter") {
    const SilverDataset silver = separable_silver(60, 41);
    auto clf = std::make_shared<FaithfulnessClassifier>(
        train_classifier(silver, small_classifier(), quick_train(43)));
    auto scorer = make_classifier_scorer(clf);
    CHECK(scorer->higher_is_faithful());
    const double score = scorer->score_pair(silver.splits.test.pairs[0]);
    CHECK(score >= 0.0);
    CHECK(score <= 1.0);
}

}  // TEST_SUITE
