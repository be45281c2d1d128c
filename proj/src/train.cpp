#include "faithsum/train.hpp"

#include <algorithm>
#include <cmath>

#include "faithsum/classifier.hpp"
#include "faithsum/kernels.hpp"
#include "faithsum/metrics.hpp"
#include "faithsum/rng.hpp"

namespace faithsum {

void TrainConfig::validate() const {
    if (lr <= 0.0) throw std::invalid_argument("train: learning rate must be positive");
    if (batch_size == 0) throw std::invalid_argument("train: batch size must be >= 1");
    if (weight_decay < 0.0 || clip_norm < 0.0) {
        throw std::invalid_argument("train: decay and clip must be non-negative");
    }
    if (val_min_len == 0 || val_min_len > val_max_len) {
        throw std::invalid_argument("train: invalid validation decode lengths");
    }
}

namespace {

class UniformWeight final : public WeightProvider {
public:
    std::string name() const override { return "uniform"; }
    double weight(const SummaryPair&) const override { return 1.0; }
};

class LabelWeight final : public WeightProvider {
public:
    std::string name() const override { return "label"; }
    double weight(const SummaryPair& pair) const override {
        if (!pair.label) throw std::invalid_argument("label weight: unlabeled pair");
        return static_cast<double>(*pair.label);
    }
};

class EnfsWeight final : public WeightProvider {
public:
    std::string name() const override { return "enfs"; }
    double weight(const SummaryPair& pair) const override {
        return 1.0 - enfs_pct(pair.summary_text, pair.doc.text) / 100.0;
    }
};

class ClassifierWeight final : public WeightProvider {
public:
    explicit ClassifierWeight(std::shared_ptr<const FaithfulnessClassifier> clf)
        : clf_(std::move(clf)) {}
    std::string name() const override { return "classifier"; }
    double weight(const SummaryPair& pair) const override {
        return clf_->predict_pair(pair);
    }

private:
    std::shared_ptr<const FaithfulnessClassifier> clf_;
};

}  // namespace

std::unique_ptr<WeightProvider> make_weight_provider(const std::string& name) {
    if (name == "uniform") return std::make_unique<UniformWeight>();
    if (name == "label") return std::make_unique<LabelWeight>();
    if (name == "enfs") return std::make_unique<EnfsWeight>();
    throw std::invalid_argument("unknown weight provider: " + name);
}

std::unique_ptr<WeightProvider> make_classifier_weight_provider(
    std::shared_ptr<const FaithfulnessClassifier> classifier) {
    return std::make_unique<ClassifierWeight>(std::move(classifier));
}

void weighted_batch_step(Model& model,
                         const std::vector<std::pair<TokenIds, TokenIds>>& batch,
                         const std::vector<double>& weights, double lr, double clip_norm,
                         double weight_decay, double label_smoothing) {
    if (weights.size() != batch.size()) {
        throw std::invalid_argument("weighted_batch_step: |weights| != |batch|");
    }
    for (double z : weights) {
        if (!(z >= 0.0 && z <= 1.0)) {
            throw std::invalid_argument("weighted_batch_step: weight outside [0,1]");
        }
    }
    const double eps = label_smoothing < 0.0 ? model.config().label_smoothing
                                             : label_smoothing;
    Model::BatchGrads grads = model.loss_and_grads(batch, eps);

    ParamVector update = ParamVector::zeros(model.params().layout);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        param_axpy(weights[i], grads.grads[i], update);
    }
    kernels::scale(1.0 / static_cast<double>(batch.size()), update.values.data(),
                   update.size());
    if (clip_norm > 0.0) {
        const double norm = update.norm2();
        if (norm > clip_norm) {
            kernels::scale(clip_norm / norm, update.values.data(), update.size());
        }
    }
    ParamVector params = model.params();
    if (weight_decay > 0.0) {
        // decoupled decay on trainable tensors only
        for (const TensorSpec& spec : params.layout->tensors()) {
            if (!spec.trainable) continue;
            kernels::axpy(lr * weight_decay, params.values.data() + spec.offset,
                          update.values.data() + spec.offset, spec.size());
        }
    }
    param_axpy(-lr, update, params);
    model.set_params(std::move(params));
}

std::pair<TokenIds, TokenIds> encode_example(const Vocabulary& vocab,
                                             const SummaryPair& pair,
                                             const ModelConfig& config) {
    TokenIds source = vocab.encode(pair.doc.tokens);
    if (source.size() > config.max_positions) source.resize(config.max_positions);
    TokenIds target = vocab.encode(pair.summary);
    if (target.size() > config.max_positions - 1) target.resize(config.max_positions - 1);
    return {std::move(source), std::move(target)};
}

namespace {

double criterion_for_pair(const Model& model, const SummaryPair& pair,
                          const Vocabulary& vocab, const TrainConfig& config,
                          const FaithfulnessClassifier* classifier) {
    auto [source, reference] = encode_example(vocab, pair, model.config());
    DecodeConfig dc;
    dc.beam_size = 1;  // greedy during validation
    dc.min_len = config.val_min_len;
    dc.max_len = std::min(config.val_max_len, model.config().max_positions - 1);
    dc.length_penalty = 1.0;
    dc.block_ngram = config.val_block_ngram;
    const DecodeResult decoded = decode_summary(model, source, dc);
    if (config.criterion == SelectionCriterion::rouge1) {
        return rouge_n(vocab.decode(decoded.tokens), vocab.decode(reference), 1).f1;
    }
    SummaryPair scored = pair;
    scored.summary = vocab.decode(decoded.tokens);
    return classifier->predict_pair(scored);
}

}  // namespace

double evaluate_criterion(const Model& model, const Corpus& corpus,
                          const Vocabulary& vocab, const TrainConfig& config,
                          const FaithfulnessClassifier* classifier) {
    if (corpus.empty()) return 0.0;
    double total = 0.0;
    for (const SummaryPair& pair : corpus.pairs) {
        total += criterion_for_pair(model, pair, vocab, config, classifier);
    }
    return total / static_cast<double>(corpus.size());
}

TrainResult train(const Model& model, const Corpus& train_split, const Corpus& val_split,
                  const Vocabulary& vocab, const TrainConfig& config,
                  const WeightProvider* weights, const FaithfulnessClassifier* classifier) {
    config.validate();
    if (train_split.empty()) throw std::invalid_argument("train: empty training split");
    if (val_split.empty()) throw std::invalid_argument("train: empty validation split");
    if (config.criterion == SelectionCriterion::faithfulness && classifier == nullptr) {
        throw std::invalid_argument("train: faithfulness criterion needs a classifier");
    }

    std::vector<std::pair<TokenIds, TokenIds>> examples;
    std::vector<double> pair_weights;
    examples.reserve(train_split.size());
    for (const SummaryPair& pair : train_split.pairs) {
        examples.push_back(encode_example(vocab, pair, model.config()));
        pair_weights.push_back(weights != nullptr ? weights->weight(pair) : 1.0);
    }

    Model current = model;
    const std::size_t batches_per_epoch =
        (train_split.size() + config.batch_size - 1) / config.batch_size;
    const std::size_t total_steps = config.epochs * batches_per_epoch;
    const std::size_t cadence =
        config.validate_every > 0 ? config.validate_every : batches_per_epoch;

    TrainResult result{current, 0, -1.0, {}};
    double loss_accum = 0.0;
    std::size_t loss_count = 0;
    std::size_t step = 0;

    auto run_validation = [&]() {
        const double value =
            evaluate_criterion(current, val_split, vocab, config, classifier);
        const double mean_loss =
            loss_count > 0 ? loss_accum / static_cast<double>(loss_count) : 0.0;
        result.history.push_back(HistoryEntry{step, mean_loss, value});
        if (value > result.best_criterion) {
            result.best_criterion = value;
            result.best = current;
            result.best_step = step;
        }
        loss_accum = 0.0;
        loss_count = 0;
    };

    Rng rng(config.seed);
    std::vector<std::size_t> order(train_split.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        Rng epoch_rng = rng.fork(epoch);
        epoch_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            std::vector<std::pair<TokenIds, TokenIds>> batch;
            std::vector<double> batch_weights;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(examples[order[i]]);
                batch_weights.push_back(pair_weights[order[i]]);
            }
            // linear warm-up, then polynomial decay to zero
            double lr = config.lr;
            if (config.warmup_steps > 0 && step < config.warmup_steps) {
                lr = config.lr * static_cast<double>(step + 1) /
                     static_cast<double>(config.warmup_steps);
            } else if (total_steps > config.warmup_steps) {
                const double progress =
                    static_cast<double>(step - config.warmup_steps) /
                    static_cast<double>(total_steps - config.warmup_steps);
                lr = config.lr * std::pow(1.0 - progress, config.poly_power);
            }
            const Model::BatchGrads probe = current.loss_and_grads(batch,
                config.label_smoothing < 0.0 ? current.config().label_smoothing
                                             : config.label_smoothing);
            loss_accum += probe.mean_loss;
            // reuse the per-example grads rather than recomputing
            ParamVector update = ParamVector::zeros(current.params().layout);
            for (std::size_t i = 0; i < batch.size(); ++i) {
                param_axpy(batch_weights[i], probe.grads[i], update);
            }
            kernels::scale(1.0 / static_cast<double>(batch.size()), update.values.data(),
                           update.size());
            if (config.clip_norm > 0.0) {
                const double norm = update.norm2();
                if (norm > config.clip_norm) {
                    kernels::scale(config.clip_norm / norm, update.values.data(),
                                   update.size());
                }
            }
            ParamVector params = current.params();
            if (config.weight_decay > 0.0) {
                for (const TensorSpec& spec : params.layout->tensors()) {
                    if (!spec.trainable) continue;
                    kernels::axpy(lr * config.weight_decay,
                                  params.values.data() + spec.offset,
                                  update.values.data() + spec.offset, spec.size());
                }
            }
            param_axpy(-lr, update, params);
            current.set_params(std::move(params));
            ++loss_count;
            ++step;
            if (step % cadence == 0) run_validation();
        }
    }
    if (result.history.empty() || result.history.back().step != step) run_validation();
    return result;
}

FinetuneResult finetune_subset(const Model& base, const Corpus& subset,
                               const Vocabulary& vocab, const TrainConfig& config) {
    config.validate();
    if (subset.empty()) throw std::invalid_argument("finetune: empty subset");
    FinetuneResult result{base, 0, subset.size()};
    if (config.epochs == 0) return result;

    std::vector<std::pair<TokenIds, TokenIds>> examples;
    examples.reserve(subset.size());
    for (const SummaryPair& pair : subset.pairs) {
        examples.push_back(encode_example(vocab, pair, base.config()));
    }
    Rng rng(config.seed);
    std::vector<std::size_t> order(subset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        Rng epoch_rng = rng.fork(epoch);
        epoch_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            std::vector<std::pair<TokenIds, TokenIds>> batch;
            for (std::size_t i = start; i < end; ++i) batch.push_back(examples[order[i]]);
            std::vector<double> ones(batch.size(), 1.0);
            weighted_batch_step(result.model, batch, ones, config.lr, config.clip_norm,
                                config.weight_decay, config.label_smoothing);
            ++result.steps;
        }
    }
    return result;
}

}  // namespace faithsum
