#include "faithsum/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "faithsum/kernels.hpp"
#include "faithsum/rng.hpp"
#include "transformer.hpp"

namespace faithsum {

void ClassifierConfig::validate() const {
    if (vocab_size < Vocabulary::kNumReserved) {
        throw std::invalid_argument("classifier: vocab_size below the reserved id count");
    }
    if (d_model == 0 || d_ff == 0 || n_heads == 0 || layers == 0) {
        throw std::invalid_argument("classifier: all dimensions must be positive");
    }
    if (d_model % n_heads != 0) {
        throw std::invalid_argument("classifier: d_model must be divisible by n_heads");
    }
    if (max_len < 4) throw std::invalid_argument("classifier: max_len must be >= 4");
}

TokenIds encode_pair(const TokenIds& document, const TokenIds& summary,
                     std::size_t max_len) {
    if (max_len < 4) throw std::invalid_argument("encode_pair: max_len must be >= 4");
    // [CLS] doc [SEP] summ [SEP] -> 3 structural tokens
    std::size_t doc_len = document.size();
    std::size_t summ_len = summary.size();
    if (3 + doc_len + summ_len > max_len) {
        const std::size_t budget = max_len - 3;
        // drop document tokens first, but keep at least one summary token
        const std::size_t summ_keep = std::min(summ_len, budget == 0 ? 0 : budget);
        if (summ_keep >= budget) {
            doc_len = 0;
            summ_len = budget;
        } else {
            summ_len = summ_keep;
            doc_len = budget - summ_len;
        }
    }
    TokenIds out;
    out.reserve(3 + doc_len + summ_len);
    out.push_back(Vocabulary::kCls);
    out.insert(out.end(), document.begin(), document.begin() + static_cast<std::ptrdiff_t>(doc_len));
    out.push_back(Vocabulary::kSep);
    out.insert(out.end(), summary.begin(), summary.begin() + static_cast<std::ptrdiff_t>(summ_len));
    out.push_back(Vocabulary::kSep);
    return out;
}

struct FaithfulnessClassifier::Refs {
    tf::Dims dims;
    tf::StackRef enc;
    tf::LinRef head;
};

void FaithfulnessClassifier::rebuild() {
    auto layout = std::make_shared<Layout>();
    auto refs = std::make_shared<Refs>();
    refs->dims = tf::Dims{config_.vocab_size, config_.d_model, config_.d_ff,
                          config_.n_heads, config_.max_len};
    refs->enc.tok_emb = layout->add("tok_emb", config_.vocab_size, config_.d_model);
    refs->enc.pos_emb = layout->add("pos_emb", config_.max_len, config_.d_model);
    for (std::size_t i = 0; i < config_.layers; ++i) {
        const std::string base = "enc" + std::to_string(i);
        tf::SubRef attn;
        attn.kind = tf::SubRef::self_attn;
        attn.attn = tf::add_attn(*layout, base + ".attn", config_.d_model);
        refs->enc.subs.push_back(attn);
        tf::SubRef ff;
        ff.kind = tf::SubRef::ff;
        ff.ffr = tf::add_ff(*layout, base + ".ff", config_.d_model, config_.d_ff);
        refs->enc.subs.push_back(ff);
    }
    refs->head = tf::add_linear(*layout, "head", config_.d_model, 1);
    params_ = ParamVector::zeros(layout);
    refs_ = std::move(refs);
}

FaithfulnessClassifier FaithfulnessClassifier::init(const ClassifierConfig& config,
                                                    const Vocabulary& vocab,
                                                    std::uint64_t seed) {
    ClassifierConfig cfg = config;
    cfg.vocab_size = vocab.size();
    cfg.validate();
    FaithfulnessClassifier clf;
    clf.config_ = cfg;
    clf.vocab_ = vocab;
    clf.rebuild();
    Rng rng(seed);
    for (double& v : clf.params_.values) v = rng.uniform(-0.08, 0.08);
    return clf;
}

void FaithfulnessClassifier::set_params(ParamVector params) {
    if (!params.layout || !params.layout->compatible(*params_.layout)) {
        throw std::invalid_argument("classifier: parameter layout does not match");
    }
    params_.values = std::move(params.values);
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_encoding(const TokenIds& encoding, std::size_t vocab, std::size_t max_len) {
    if (encoding.empty() || encoding.size() > max_len) {
        throw std::invalid_argument("classifier: encoding length out of range");
    }
    for (int id : encoding) {
        if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
            throw std::invalid_argument("classifier: encoding id out of vocabulary range");
        }
    }
}

}  // namespace

double FaithfulnessClassifier::predict(const TokenIds& encoding) const {
    check_encoding(encoding, config_.vocab_size, config_.max_len);
    tf::Workspace ws{params_.values.data(), nullptr, refs_->dims};
    nn::Mat enc = tf::run_stack(ws, refs_->enc, encoding, nullptr, nullptr, nullptr,
                                false, nullptr);
    nn::Mat cls(1, config_.d_model);
    std::copy(enc.row(0), enc.row(0) + config_.d_model, cls.row(0));
    nn::Mat logit = nn::linear(cls, ws.p + refs_->head.w, ws.p + refs_->head.b,
                               config_.d_model, 1);
    return sigmoid(logit.at(0, 0));
}

double FaithfulnessClassifier::predict_pair(const SummaryPair& pair) const {
    const TokenIds encoding = encode_pair(vocab_.encode(pair.doc.tokens),
                                          vocab_.encode(pair.summary), config_.max_len);
    return predict(encoding);
}

FaithfulnessClassifier::ExampleGrad FaithfulnessClassifier::loss_and_grad(
    const TokenIds& encoding, int label) const {
    check_encoding(encoding, config_.vocab_size, config_.max_len);
    if (label != 0 && label != 1) {
        throw std::invalid_argument("classifier: label must be 0 or 1");
    }
    ExampleGrad out;
    out.grad = ParamVector::zeros(params_.layout);
    tf::Workspace ws{params_.values.data(), out.grad.values.data(), refs_->dims};

    tf::StackTape tape;
    nn::Mat enc = tf::run_stack(ws, refs_->enc, encoding, nullptr, nullptr, nullptr,
                                false, &tape);
    nn::Mat cls(1, config_.d_model);
    std::copy(enc.row(0), enc.row(0) + config_.d_model, cls.row(0));
    nn::Mat logit = nn::linear(cls, ws.p + refs_->head.w, ws.p + refs_->head.b,
                               config_.d_model, 1);
    const double z = logit.at(0, 0);
    const double p = sigmoid(z);
    const auto y = static_cast<double>(label);
    // numerically stable BCE: log(1+e^-|z|) + max(z,0) - z*y
    out.loss = std::log1p(std::exp(-std::fabs(z))) + std::max(z, 0.0) - z * y;

    nn::Mat dlogit(1, 1);
    dlogit.at(0, 0) = p - y;
    nn::Mat dcls = nn::linear_backward(cls, dlogit, ws.p + refs_->head.w,
                                       ws.g + refs_->head.w, ws.g + refs_->head.b,
                                       config_.d_model, 1);
    nn::Mat denc(enc.rows, enc.cols);
    std::copy(dcls.row(0), dcls.row(0) + config_.d_model, denc.row(0));
    tf::run_stack_backward(ws, refs_->enc, encoding, nullptr, nullptr, nullptr, false,
                           tape, denc, nullptr);
    return out;
}

Checkpoint FaithfulnessClassifier::to_checkpoint() const {
    Checkpoint ckpt;
    ckpt.kind = "classifier";
    ckpt.config["vocab_size"] = std::to_string(config_.vocab_size);
    ckpt.config["d_model"] = std::to_string(config_.d_model);
    ckpt.config["d_ff"] = std::to_string(config_.d_ff);
    ckpt.config["n_heads"] = std::to_string(config_.n_heads);
    ckpt.config["layers"] = std::to_string(config_.layers);
    ckpt.config["max_len"] = std::to_string(config_.max_len);
    ckpt.vocab_tokens = vocab_.tokens();
    ckpt.params = params_;
    return ckpt;
}

FaithfulnessClassifier FaithfulnessClassifier::from_checkpoint(const Checkpoint& ckpt) {
    if (ckpt.kind != "classifier") {
        throw std::invalid_argument("checkpoint kind is not classifier: " + ckpt.kind);
    }
    ClassifierConfig config;
    config.vocab_size = std::stoull(ckpt.config.at("vocab_size"));
    config.d_model = std::stoull(ckpt.config.at("d_model"));
    config.d_ff = std::stoull(ckpt.config.at("d_ff"));
    config.n_heads = std::stoull(ckpt.config.at("n_heads"));
    config.layers = std::stoull(ckpt.config.at("layers"));
    config.max_len = std::stoull(ckpt.config.at("max_len"));
    FaithfulnessClassifier clf =
        init(config, Vocabulary::from_tokens(ckpt.vocab_tokens), 0);
    if (!clf.params_.layout->compatible(*ckpt.params.layout)) {
        throw std::runtime_error("classifier checkpoint layout does not match its config");
    }
    clf.params_.values = ckpt.params.values;
    return clf;
}

FaithfulnessClassifier train_classifier(const SilverDataset& silver,
                                        const ClassifierConfig& config,
                                        const ClassifierTrainConfig& train_config) {
    const Corpus& train = silver.splits.train;
    if (train.empty()) throw std::invalid_argument("train_classifier: empty training split");
    std::size_t pos = 0;
    std::size_t neg = 0;
    for (const SummaryPair& pair : train.pairs) {
        if (!pair.label) throw std::invalid_argument("train_classifier: unlabeled pair");
        (*pair.label == 1 ? pos : neg) += 1;
    }
    if (pos == 0 || neg == 0) {
        throw std::invalid_argument("train_classifier: training data has a single class");
    }

    const Vocabulary vocab = Vocabulary::build(train);
    FaithfulnessClassifier clf =
        FaithfulnessClassifier::init(config, vocab, train_config.seed);

    std::vector<TokenIds> encodings;
    std::vector<int> labels;
    encodings.reserve(train.size());
    for (const SummaryPair& pair : train.pairs) {
        encodings.push_back(encode_pair(vocab.encode(pair.doc.tokens),
                                        vocab.encode(pair.summary),
                                        clf.config().max_len));
        labels.push_back(*pair.label);
    }

    auto val_accuracy = [&]() {
        const Corpus& val = silver.splits.val;
        if (val.empty()) return 0.0;
        std::size_t correct = 0;
        for (const SummaryPair& pair : val.pairs) {
            const int predicted = clf.predict_pair(pair) >= 0.5 ? 1 : 0;
            if (pair.label && predicted == *pair.label) ++correct;
        }
        return static_cast<double>(correct) / static_cast<double>(val.size());
    };

    ParamVector best = clf.params();
    double best_acc = -1.0;
    const bool track_best = !silver.splits.val.empty();

    std::vector<double> m(clf.params().size(), 0.0);
    std::vector<double> v(clf.params().size(), 0.0);
    std::size_t step = 0;

    Rng rng(train_config.seed);
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t epoch = 0; epoch < train_config.epochs; ++epoch) {
        Rng epoch_rng = rng.fork(epoch);
        epoch_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += train_config.batch_size) {
            const std::size_t end = std::min(order.size(), start + train_config.batch_size);
            ParamVector grad = ParamVector::zeros(clf.params().layout);
            for (std::size_t i = start; i < end; ++i) {
                auto eg = clf.loss_and_grad(encodings[order[i]], labels[order[i]]);
                param_axpy(1.0, eg.grad, grad);
            }
            kernels::scale(1.0 / static_cast<double>(end - start), grad.values.data(),
                           grad.size());
            ++step;
            const double b1 = train_config.adam_beta1;
            const double b2 = train_config.adam_beta2;
            const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step));
            ParamVector params = clf.params();
            for (std::size_t i = 0; i < grad.size(); ++i) {
                const double g = grad.values[i];
                m[i] = b1 * m[i] + (1.0 - b1) * g;
                v[i] = b2 * v[i] + (1.0 - b2) * g * g;
                params.values[i] -= train_config.lr * (m[i] / bc1) /
                                    (std::sqrt(v[i] / bc2) + train_config.adam_eps);
            }
            clf.set_params(std::move(params));
        }
        if (track_best) {
            const double acc = val_accuracy();
            if (acc > best_acc) {
                best_acc = acc;
                best = clf.params();
            }
        }
    }
    if (track_best && best_acc >= 0.0) clf.set_params(std::move(best));
    return clf;
}

ClassifierEval evaluate_classifier(const FaithfulnessClassifier& classifier,
                                   const Corpus& test, double threshold) {
    if (test.empty()) throw std::invalid_argument("evaluate_classifier: empty test corpus");
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;
    for (const SummaryPair& pair : test.pairs) {
        if (!pair.label) {
            throw std::invalid_argument("evaluate_classifier: unlabeled pair \"" +
                                        pair.doc.id + "\"");
        }
        const bool predicted = classifier.predict_pair(pair) >= threshold;
        const bool actual = *pair.label == 1;
        if (predicted && actual) ++tp;
        else if (predicted && !actual) ++fp;
        else if (!predicted && actual) ++fn;
        else ++tn;
    }
    const auto total = static_cast<double>(tp + fp + tn + fn);
    ClassifierEval eval;
    eval.accuracy = 100.0 * static_cast<double>(tp + tn) / total;
    eval.precision = tp + fp > 0 ? 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    eval.recall = tp + fn > 0 ? 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    eval.f1 = eval.precision + eval.recall > 0.0
                  ? 2.0 * eval.precision * eval.recall / (eval.precision + eval.recall)
                  : 0.0;
    return eval;
}

namespace {

class ClassifierScorer final : public FaithfulnessScorer {
public:
    explicit ClassifierScorer(std::shared_ptr<const FaithfulnessClassifier> clf)
        : clf_(std::move(clf)) {}
    std::string name() const override { return "classifier"; }
    bool higher_is_faithful() const override { return true; }
    double score_pair(const SummaryPair& pair) const override {
        return clf_->predict_pair(pair);
    }

private:
    std::shared_ptr<const FaithfulnessClassifier> clf_;
};

}  // namespace

std::unique_ptr<FaithfulnessScorer> make_classifier_scorer(
    std::shared_ptr<const FaithfulnessClassifier> classifier) {
    return std::make_unique<ClassifierScorer>(std::move(classifier));
}

}  // namespace faithsum
