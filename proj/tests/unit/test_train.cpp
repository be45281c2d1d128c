#include <doctest.h>

#include <cmath>

#include "faithsum/params.hpp"
#include "faithsum/rng.hpp"
#include "faithsum/synthetic.hpp"
#include "faithsum/train.hpp"

using namespace faithsum;

namespace {

ModelConfig small_config(std::size_t vocab) {
    ModelConfig cfg;
    cfg.vocab_size = vocab;
    cfg.d_model = 16;
    cfg.d_ff = 32;
    cfg.n_heads = 2;
    cfg.enc_layers = 1;
    cfg.dec_layers = 1;
    cfg.max_positions = 64;
    cfg.label_smoothing = 0.0;
    return cfg;
}

struct Fixture {
    Corpus corpus;
    Vocabulary vocab;
    Model model;
    std::vector<std::pair<TokenIds, TokenIds>> batch;
};

Fixture make_fixture(std::size_t pairs, std::uint64_t seed, double rate = 0.0) {
    GenSpec spec;
    spec.num_pairs = pairs;
    spec.doc_len_min = 10;
    spec.doc_len_max = 14;
    spec.summary_len_min = 4;
    spec.summary_len_max = 6;
    spec.vocab_size = 30;
    spec.hallucination_rate = rate;
    spec.sentinel_pool = 1;
    spec.seed = seed;
    Corpus corpus = generate(spec);
    Vocabulary vocab = Vocabulary::build(corpus);
    Model model = Model::init(small_config(vocab.size()), seed + 1);
    std::vector<std::pair<TokenIds, TokenIds>> batch;
    for (std::size_t i = 0; i < std::min<std::size_t>(8, corpus.size()); ++i) {
        batch.push_back(encode_example(vocab, corpus.pairs[i], model.config()));
    }
    return Fixture{std::move(corpus), std::move(vocab), std::move(model), std::move(batch)};
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("all-ones weights reproduce the plain step bitwise") {
    Fixture fx = make_fixture(10, 1);

    Model weighted = fx.model;
    weighted_batch_step(weighted, fx.batch, std::vector<double>(fx.batch.size(), 1.0),
                        0.05);

    // independent plain-SGD comparator
    Model plain = fx.model;
    const auto grads = plain.loss_and_grads(fx.batch);
    std::vector<double> update(plain.params().size(), 0.0);
    for (const ParamVector& g : grads.grads) {
        for (std::size_t i = 0; i < update.size(); ++i) update[i] += g.values[i];
    }
    const double inv_m = 1.0 / static_cast<double>(fx.batch.size());
    for (double& u : update) u *= inv_m;
    ParamVector params = plain.params();
    for (std::size_t i = 0; i < update.size(); ++i) {
        params.values[i] += -0.05 * update[i];
    }
    plain.set_params(params);

    CHECK(weighted.params().values == plain.params().values);
}

TEST_CASE("all-zero weights leave parameters untouched") {
    Fixture fx = make_fixture(10, 2);
    Model model = fx.model;
    weighted_batch_step(model, fx.batch, std::vector<double>(fx.batch.size(), 0.0), 0.05);
    CHECK(model.params().values == fx.model.params().values);
}

TEST_CASE("constant weights c equal learning rate c*alpha") {
    Fixture fx = make_fixture(10, 3);
    const double alpha = 0.08;
    const double c = 0.37;

    Model weighted = fx.model;
    weighted_batch_step(weighted, fx.batch, std::vector<double>(fx.batch.size(), c), alpha);

    Model scaled = fx.model;
    weighted_batch_step(scaled, fx.batch, std::vector<double>(fx.batch.size(), 1.0),
                        c * alpha);

    double max_diff = 0.0;
    for (std::size_t i = 0; i < weighted.params().size(); ++i) {
        max_diff = std::max(max_diff, std::fabs(weighted.params().values[i] -
                                                scaled.params().values[i]));
    }
    CHECK(max_diff < 1e-12);
}

TEST_CASE("weights outside [0,1] are rejected") {
    Fixture fx = make_fixture(4, 4);
    Model model = fx.model;
    std::vector<double> weights(fx.batch.size(), 1.0);
    weights[0] = 1.5;
    CHECK_THROWS_AS(weighted_batch_step(model, fx.batch, weights, 0.05),
                    std::invalid_argument);
    weights[0] = -0.1;
    CHECK_THROWS_AS(weighted_batch_step(model, fx.batch, weights, 0.05),
                    std::invalid_argument);
    weights.pop_back();
    CHECK_THROWS_AS(weighted_batch_step(model, fx.batch, weights, 0.05),
                    std::invalid_argument);
}

TEST_CASE("weight providers") {
    Fixture fx = make_fixture(6, 5, 1.0);  // all hallucinated
    auto uniform = make_weight_provider("uniform");
    auto enfs = make_weight_provider("enfs");
    auto label = make_weight_provider("label");
    for (const SummaryPair& pair : fx.corpus.pairs) {
        CHECK(uniform->weight(pair) == 1.0);
        CHECK(label->weight(pair) == 0.0);
        const double z = enfs->weight(pair);
        CHECK(z >= 0.0);
        CHECK(z < 1.0);  // sentinel always raises ENFS above zero
    }
    CHECK_THROWS_AS(make_weight_provider("nope"), std::invalid_argument);
}

TEST_CASE("training run is deterministic and selects the history argmax") {
    Fixture fx = make_fixture(24, 6);
    const CorpusSplits splits = split_corpus(fx.corpus, SplitSpec{0.75, 0.25, 0.0, 9});

    TrainConfig tc;
    tc.lr = 0.05;
    tc.batch_size = 6;
    tc.epochs = 3;
    tc.warmup_steps = 0;
    tc.weight_decay = 0.0;
    tc.clip_norm = 0.0;
    tc.seed = 17;
    tc.val_max_len = 8;
    tc.label_smoothing = 0.0;

    const TrainResult a = train(fx.model, splits.train, splits.val, fx.vocab, tc);
    const TrainResult b = train(fx.model, splits.train, splits.val, fx.vocab, tc);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].step == b.history[i].step);
        CHECK(a.history[i].loss == b.history[i].loss);
        CHECK(a.history[i].criterion == b.history[i].criterion);
    }
    CHECK(a.best.params().values == b.best.params().values);

    // selection: earliest global argmax of the criterion sequence
    std::size_t want = 0;
    for (std::size_t i = 1; i < a.history.size(); ++i) {
        if (a.history[i].criterion > a.history[want].criterion) want = i;
    }
    CHECK(a.best_step == a.history[want].step);
    CHECK(a.best_criterion == doctest::Approx(a.history[want].criterion));
}

TEST_CASE("faithfulness criterion without classifier is rejected") {
    Fixture fx = make_fixture(8, 7);
    const CorpusSplits splits = split_corpus(fx.corpus, SplitSpec{0.75, 0.25, 0.0, 9});
    TrainConfig tc;
    tc.criterion = SelectionCriterion::faithfulness;
    CHECK_THROWS_AS(train(fx.model, splits.train, splits.val, fx.vocab, tc),
                    std::invalid_argument);
}

TEST_CASE("memorization: loss drops below 0.1 per token") {
    Fixture fx = make_fixture(50, 8);
    std::vector<std::pair<TokenIds, TokenIds>> all;
    for (const SummaryPair& pair : fx.corpus.pairs) {
        all.push_back(encode_example(fx.vocab, pair, fx.model.config()));
    }
    Model model = fx.model;
    const std::vector<double> ones(all.size(), 1.0);
    double loss = 1e9;
    for (int step = 0; step < 800 && loss > 0.05; ++step) {
        weighted_batch_step(model, all, ones, 1.0, 0.0, 0.0, 0.0);
        if (step % 25 == 24) loss = model.loss_and_grads(all, 0.0).mean_loss;
    }
    loss = model.loss_and_grads(all, 0.0).mean_loss;
    CHECK(loss < 0.1);
}

TEST_CASE("finetune zero epochs is a no-op; subsets diverge") {
    Fixture fx = make_fixture(30, 9, 0.5);
    TrainConfig tc;
    tc.lr = 0.05;
    tc.batch_size = 8;
    tc.epochs = 0;
    tc.warmup_steps = 0;
    tc.clip_norm = 0.0;
    tc.weight_decay = 0.0;
    const FinetuneResult same = finetune_subset(fx.model, fx.corpus, fx.vocab, tc);
    CHECK(same.model.params().values == fx.model.params().values);
    CHECK(same.steps == 0);

    Corpus pos;
    Corpus neg;
    pos.language = neg.language = fx.corpus.language;
    for (const SummaryPair& pair : fx.corpus.pairs) {
        (*pair.label == 1 ? pos : neg).pairs.push_back(pair);
    }
    REQUIRE(!pos.empty());
    REQUIRE(!neg.empty());
    tc.epochs = 1;
    const FinetuneResult expert = finetune_subset(fx.model, pos, fx.vocab, tc);
    const FinetuneResult anti = finetune_subset(fx.model, neg, fx.vocab, tc);
    CHECK(expert.model.params().values != anti.model.params().values);
    CHECK(expert.epoch_pairs == pos.size());
}

TEST_CASE("few-shot continuation logs the sampled epoch size") {
    Fixture fx = make_fixture(1000, 10);
    TrainConfig tc;
    tc.lr = 0.01;
    tc.batch_size = 100;
    tc.epochs = 1;
    tc.warmup_steps = 0;
    const FinetuneResult result = finetune_subset(fx.model, fx.corpus, fx.vocab, tc);
    CHECK(result.epoch_pairs == 1000);
    CHECK(result.steps == 10);
}

}  // TEST_SUITE
