#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "faithsum/corpus.hpp"
#include "faithsum/metrics.hpp"
#include "faithsum/nn.hpp"
#include "faithsum/params.hpp"
#include "faithsum/silver.hpp"

namespace faithsum {

struct ClassifierConfig {
    std::size_t vocab_size = 64;
    std::size_t d_model = 16;
    std::size_t d_ff = 32;
    std::size_t n_heads = 2;
    std::size_t layers = 1;
    std::size_t max_len = 512;

    void validate() const;
    bool operator==(const ClassifierConfig&) const = default;
};

// [CLS] document [SEP] summary [SEP], truncated to max_len by dropping
// document tokens from the end first, then summary tokens from the end; the
// summary is never removed entirely. Throws when max_len < 4.
TokenIds encode_pair(const TokenIds& document, const TokenIds& summary,
                     std::size_t max_len);

// Binary faithfulness classifier: encoder over the pair encoding, logistic
// head on the CLS position. Carries its own vocabulary so a checkpoint is
// self-contained.
class FaithfulnessClassifier {
public:
    static FaithfulnessClassifier init(const ClassifierConfig& config,
                                       const Vocabulary& vocab, std::uint64_t seed);

    const ClassifierConfig& config() const { return config_; }
    const Vocabulary& vocab() const { return vocab_; }
    const ParamVector& params() const { return params_; }
    void set_params(ParamVector params);

    // p(faithful) in [0,1] for an already-encoded pair.
    double predict(const TokenIds& encoding) const;
    // Encodes (document, summary) with the classifier's vocabulary first.
    double predict_pair(const SummaryPair& pair) const;

    struct ExampleGrad {
        double loss = 0.0;
        ParamVector grad;
    };
    // Binary cross-entropy against label in {0,1}.
    ExampleGrad loss_and_grad(const TokenIds& encoding, int label) const;

    Checkpoint to_checkpoint() const;
    static FaithfulnessClassifier from_checkpoint(const Checkpoint& ckpt);

private:
    FaithfulnessClassifier() = default;
    void rebuild();

    ClassifierConfig config_;
    Vocabulary vocab_;
    ParamVector params_;
    struct Refs;
    std::shared_ptr<const Refs> refs_;
};

struct ClassifierTrainConfig {
    double lr = 5e-5;  // paper-scale default; desk-scale runs set their own
    std::size_t batch_size = 32;
    std::size_t epochs = 2;
    std::uint64_t seed = 0;
    // Adam moments; the summarizer sticks to plain SGD so its weighting
    // identities stay exact, but nothing here depends on them.
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
};

// Trains with Adam on silver.splits.train, keeps the best-validation-
// accuracy checkpoint (ties to the earlier one). Throws when the training
// split is empty or single-class.
FaithfulnessClassifier train_classifier(const SilverDataset& silver,
                                        const ClassifierConfig& config,
                                        const ClassifierTrainConfig& train_config);

struct ClassifierEval {
    double accuracy = 0.0;  // all four as percentages
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Standard binary metrics with faithful (label 1) as the positive class.
// Throws on unlabeled pairs.
ClassifierEval evaluate_classifier(const FaithfulnessClassifier& classifier,
                                   const Corpus& test, double threshold = 0.5);

// Exposes the classifier through the scorer interface (higher = faithful).
std::unique_ptr<FaithfulnessScorer> make_classifier_scorer(
    std::shared_ptr<const FaithfulnessClassifier> classifier);

}  // namespace faithsum
