#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "faithsum/corpus.hpp"
#include "faithsum/decode.hpp"
#include "faithsum/model.hpp"

namespace faithsum {

class FaithfulnessClassifier;

enum class SelectionCriterion { rouge1, faithfulness };

struct TrainConfig {
    double lr = 1e-4;
    std::size_t batch_size = 32;
    std::size_t epochs = 10;
    std::size_t warmup_steps = 500;
    double weight_decay = 0.01;
    double clip_norm = 0.1;     // 0 disables clipping
    double poly_power = 1.0;    // decay exponent after warm-up
    std::uint64_t seed = 0;
    SelectionCriterion criterion = SelectionCriterion::rouge1;
    std::size_t validate_every = 0;    // steps; 0 = once per epoch
    double label_smoothing = -1.0;     // < 0: use the model's configured value
    std::size_t val_max_len = 24;      // greedy validation decode bounds
    std::size_t val_min_len = 1;
    std::size_t val_block_ngram = 3;

    void validate() const;
};

// Per-pair loss weight z in [0,1] (the faithfulness score of the pair).
class WeightProvider {
public:
    virtual ~WeightProvider() = default;
    virtual std::string name() const = 0;
    virtual double weight(const SummaryPair& pair) const = 0;
};

// "uniform", "label", "enfs" (z = 1 - ENFS%/100); classifier-backed
// providers come from make_classifier_weight_provider.
std::unique_ptr<WeightProvider> make_weight_provider(const std::string& name);
std::unique_ptr<WeightProvider> make_classifier_weight_provider(
    std::shared_ptr<const FaithfulnessClassifier> classifier);

// One SGD step: theta <- theta - lr * clip((1/m) sum_i z_i grad_i) minus the
// decoupled weight-decay term. Weights must lie in [0,1].
void weighted_batch_step(Model& model,
                         const std::vector<std::pair<TokenIds, TokenIds>>& batch,
                         const std::vector<double>& weights, double lr,
                         double clip_norm = 0.0, double weight_decay = 0.0,
                         double label_smoothing = -1.0);

struct HistoryEntry {
    std::size_t step = 0;
    double loss = 0.0;       // mean train loss since the previous validation
    double criterion = 0.0;  // validation score at this step
};

struct TrainResult {
    Model best;
    std::size_t best_step = 0;
    double best_criterion = 0.0;
    std::vector<HistoryEntry> history;
};

// Source/target token encoding of a pair, truncated to the model's limits.
std::pair<TokenIds, TokenIds> encode_example(const Vocabulary& vocab,
                                             const SummaryPair& pair,
                                             const ModelConfig& config);

// Trains with per-step LR warm-up + polynomial decay, validates by greedy
// decoding and returns the checkpoint with the best criterion value (ties
// to the earliest step). weights == nullptr means unweighted; the provider
// is evaluated once, before training. criterion == faithfulness requires a
// classifier.
TrainResult train(const Model& model, const Corpus& train_split, const Corpus& val_split,
                  const Vocabulary& vocab, const TrainConfig& config,
                  const WeightProvider* weights = nullptr,
                  const FaithfulnessClassifier* classifier = nullptr);

struct FinetuneResult {
    Model model;
    std::size_t steps = 0;
    std::size_t epoch_pairs = 0;  // pairs per epoch, for the run log
};

// Continues training from a base model on a subset (expert / anti-expert
// construction and few-shot continuation). No validation or selection.
FinetuneResult finetune_subset(const Model& base, const Corpus& subset,
                               const Vocabulary& vocab, const TrainConfig& config);

// Mean criterion value of greedily decoded summaries on a corpus.
double evaluate_criterion(const Model& model, const Corpus& corpus,
                          const Vocabulary& vocab, const TrainConfig& config,
                          const FaithfulnessClassifier* classifier);

}  // namespace faithsum
