#include "faithsum/model.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <sstream>

#include "faithsum/kernels.hpp"
#include "faithsum/rng.hpp"
#include "transformer.hpp"

namespace faithsum {

void ModelConfig::validate() const {
    if (vocab_size < Vocabulary::kNumReserved) {
        throw std::invalid_argument("model: vocab_size below the reserved id count");
    }
    if (d_model == 0 || d_ff == 0 || n_heads == 0 || enc_layers == 0 || dec_layers == 0 ||
        max_positions < 2 || adapter_dim == 0) {
        throw std::invalid_argument("model: all dimensions must be positive");
    }
    if (d_model % n_heads != 0) {
        throw std::invalid_argument("model: d_model must be divisible by n_heads");
    }
    if (label_smoothing < 0.0 || label_smoothing >= 1.0) {
        throw std::invalid_argument("model: label_smoothing must be in [0,1)");
    }
}

struct Model::Refs {
    tf::Dims dims;
    tf::StackRef enc;
    tf::StackRef dec;
    tf::LinRef out;
};

namespace {

constexpr double kInitRange = 0.08;

void uniform_fill(double* data, std::size_t n, Rng& rng) {
    for (std::size_t i = 0; i < n; ++i) data[i] = rng.uniform(-kInitRange, kInitRange);
}

std::string adapter_prefix(const std::string& name, std::size_t pos) {
    return "adapter." + name + ".p" + std::to_string(pos);
}

}  // namespace

void Model::rebuild() {
    auto layout = std::make_shared<Layout>();
    auto refs = std::make_shared<Refs>();
    refs->dims = tf::Dims{config_.vocab_size, config_.d_model, config_.d_ff,
                          config_.n_heads, config_.max_positions};

    refs->enc.tok_emb = layout->add("tok_emb", config_.vocab_size, config_.d_model);
    refs->enc.pos_emb = layout->add("pos_emb", config_.max_positions, config_.d_model);
    refs->dec.tok_emb = refs->enc.tok_emb;  // shared embeddings
    refs->dec.pos_emb = refs->enc.pos_emb;

    for (std::size_t i = 0; i < config_.enc_layers; ++i) {
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
    for (std::size_t i = 0; i < config_.dec_layers; ++i) {
        const std::string base = "dec" + std::to_string(i);
        tf::SubRef self;
        self.kind = tf::SubRef::self_attn;
        self.attn = tf::add_attn(*layout, base + ".self", config_.d_model);
        refs->dec.subs.push_back(self);
        tf::SubRef cross;
        cross.kind = tf::SubRef::cross_attn;
        cross.attn = tf::add_attn(*layout, base + ".cross", config_.d_model);
        refs->dec.subs.push_back(cross);
        tf::SubRef ff;
        ff.kind = tf::SubRef::ff;
        ff.ffr = tf::add_ff(*layout, base + ".ff", config_.d_model, config_.d_ff);
        refs->dec.subs.push_back(ff);
    }
    refs->out = tf::add_linear(*layout, "out", config_.d_model, config_.vocab_size);

    const std::size_t n_positions = refs->enc.subs.size() + refs->dec.subs.size();
    std::map<std::string, std::vector<tf::AdapterRef>> adapter_refs;
    for (const AdapterDef& def : registry_) {
        std::vector<tf::AdapterRef> per_pos;
        for (std::size_t pos = 0; pos < n_positions; ++pos) {
            tf::AdapterRef ref;
            ref.down = tf::add_linear(*layout, adapter_prefix(def.name, pos) + ".down",
                                      config_.d_model, config_.adapter_dim);
            ref.up = tf::add_linear(*layout, adapter_prefix(def.name, pos) + ".up",
                                    config_.adapter_dim, config_.d_model);
            ref.dim = config_.adapter_dim;
            per_pos.push_back(ref);
        }
        adapter_refs.emplace(def.name, std::move(per_pos));
    }

    // Attach the active stack to every sublayer position, encoder first.
    for (const AdapterStackEntry& entry : stack_) {
        const auto& per_pos = adapter_refs.at(entry.name);
        for (std::size_t pos = 0; pos < refs->enc.subs.size(); ++pos) {
            refs->enc.subs[pos].adapters.push_back(per_pos[pos]);
        }
        for (std::size_t pos = 0; pos < refs->dec.subs.size(); ++pos) {
            refs->dec.subs[pos].adapters.push_back(per_pos[refs->enc.subs.size() + pos]);
        }
    }

    layout->set_trainable("", base_trainable_);
    for (const AdapterDef& def : registry_) {
        bool active = false;
        bool frozen = false;
        for (const AdapterStackEntry& entry : stack_) {
            if (entry.name == def.name) {
                active = true;
                frozen = entry.frozen;
            }
        }
        layout->set_trainable("adapter." + def.name + ".", active && !frozen);
    }

    ParamVector next = ParamVector::zeros(layout);
    if (params_.layout) {
        for (const TensorSpec& spec : layout->tensors()) {
            const TensorSpec* old = params_.layout->find(spec.name);
            if (old != nullptr && old->size() == spec.size()) {
                std::memcpy(next.values.data() + spec.offset,
                            params_.values.data() + old->offset,
                            spec.size() * sizeof(double));
            }
        }
    }
    params_ = std::move(next);
    refs_ = std::move(refs);
}

Model Model::init(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Model model;
    model.config_ = config;
    model.rebuild();
    Rng rng(seed);
    for (const TensorSpec& spec : model.params_.layout->tensors()) {
        uniform_fill(model.params_.values.data() + spec.offset, spec.size(), rng);
    }
    return model;
}

void Model::set_params(ParamVector params) {
    if (!params.layout || !params.layout->compatible(*params_.layout)) {
        throw std::invalid_argument("model: parameter layout does not match");
    }
    params_.values = std::move(params.values);
}

void Model::register_adapter(const std::string& name, AdapterKind kind,
                             std::uint64_t seed) {
    if (name.empty() || name.find_first_of(".;: \t\n") != std::string::npos) {
        throw std::invalid_argument("model: bad adapter name \"" + name + "\"");
    }
    if (has_adapter(name)) {
        throw std::invalid_argument("model: adapter \"" + name + "\" already registered");
    }
    registry_.push_back(AdapterDef{name, kind});
    rebuild();
    // Down-projections get small random weights, up-projections stay zero so
    // an untrained adapter is an exact no-op.
    Rng rng(seed);
    const std::size_t n_positions = refs_->enc.subs.size() + refs_->dec.subs.size();
    for (std::size_t pos = 0; pos < n_positions; ++pos) {
        const std::string prefix = adapter_prefix(name, pos);
        const TensorSpec& w = params_.layout->at(prefix + ".down.w");
        uniform_fill(params_.values.data() + w.offset, w.size(), rng);
        const TensorSpec& b = params_.layout->at(prefix + ".down.b");
        uniform_fill(params_.values.data() + b.offset, b.size(), rng);
    }
}

bool Model::has_adapter(const std::string& name) const {
    for (const AdapterDef& def : registry_) {
        if (def.name == name) return true;
    }
    return false;
}

void Model::attach_adapters(const AdapterStackSpec& spec) {
    std::size_t languages = 0;
    std::size_t tasks = 0;
    for (const AdapterStackEntry& entry : spec.stack) {
        bool found = false;
        for (const AdapterDef& def : registry_) {
            if (def.name == entry.name) {
                found = true;
                (def.kind == AdapterKind::language ? languages : tasks) += 1;
            }
        }
        if (!found) {
            throw std::invalid_argument("model: unknown adapter \"" + entry.name + "\"");
        }
    }
    if (languages > 1 || tasks > 1) {
        throw std::invalid_argument(
            "model: at most one language and one task adapter per position");
    }
    stack_ = spec.stack;
    rebuild();
}

void Model::set_base_trainable(bool trainable) {
    base_trainable_ = trainable;
    rebuild();
}

namespace {

void check_ids(const TokenIds& ids, std::size_t vocab, std::size_t max_pos,
               const char* what) {
    if (ids.size() > max_pos) {
        throw std::invalid_argument(std::string("model: ") + what + " exceeds max positions");
    }
    for (int id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
            throw std::invalid_argument(std::string("model: ") + what +
                                        " id out of vocabulary range");
        }
    }
}

std::vector<bool> source_visibility(const TokenIds& source) {
    std::vector<bool> visible(source.size());
    bool any = false;
    for (std::size_t i = 0; i < source.size(); ++i) {
        visible[i] = source[i] != Vocabulary::kPad;
        any = any || visible[i];
    }
    if (!any) throw std::invalid_argument("model: source has no non-pad tokens");
    return visible;
}

}  // namespace

nn::Mat Model::forward(const TokenIds& source, const TokenIds& target_prefix) const {
    return decode_prefix(encode_source(source), target_prefix);
}

Model::EncodedSource Model::encode_source(const TokenIds& source) const {
    check_ids(source, config_.vocab_size, config_.max_positions, "source");
    EncodedSource enc;
    enc.visible = source_visibility(source);
    tf::Workspace ws{params_.values.data(), nullptr, refs_->dims};
    enc.memory = tf::run_stack(ws, refs_->enc, source, nullptr, nullptr, &enc.visible,
                               false, nullptr);
    return enc;
}

nn::Mat Model::decode_prefix(const EncodedSource& source,
                             const TokenIds& target_prefix) const {
    check_ids(target_prefix, config_.vocab_size, config_.max_positions, "prefix");
    if (target_prefix.empty()) {
        throw std::invalid_argument("model: target prefix must be non-empty");
    }
    tf::Workspace ws{params_.values.data(), nullptr, refs_->dims};
    nn::Mat dec_out = tf::run_stack(ws, refs_->dec, target_prefix, &source.memory,
                                    &source.visible, nullptr, true, nullptr);
    return nn::linear(dec_out, ws.p + refs_->out.w, ws.p + refs_->out.b, config_.d_model,
                      config_.vocab_size);
}

Model::BatchGrads Model::loss_and_grads(
    const std::vector<std::pair<TokenIds, TokenIds>>& batch) const {
    return loss_and_grads(batch, config_.label_smoothing);
}

Model::BatchGrads Model::loss_and_grads(
    const std::vector<std::pair<TokenIds, TokenIds>>& batch, double label_smoothing) const {
    if (batch.empty()) throw std::invalid_argument("model: empty batch");
    BatchGrads out;
    out.losses.reserve(batch.size());
    out.grads.reserve(batch.size());

    const std::size_t vocab = config_.vocab_size;
    for (const auto& [source, target] : batch) {
        check_ids(source, vocab, config_.max_positions, "source");
        check_ids(target, vocab, config_.max_positions - 1, "target");
        TokenIds prefix;
        prefix.reserve(target.size() + 1);
        prefix.push_back(Vocabulary::kBos);
        prefix.insert(prefix.end(), target.begin(), target.end());
        TokenIds gold = target;
        gold.push_back(Vocabulary::kEos);

        const std::vector<bool> visible = source_visibility(source);
        ParamVector grad = ParamVector::zeros(params_.layout);
        tf::Workspace ws{params_.values.data(), grad.values.data(), refs_->dims};

        tf::StackTape enc_tape;
        tf::StackTape dec_tape;
        nn::Mat enc_out = tf::run_stack(ws, refs_->enc, source, nullptr, nullptr, &visible,
                                        false, &enc_tape);
        nn::Mat dec_out = tf::run_stack(ws, refs_->dec, prefix, &enc_out, &visible,
                                        nullptr, true, &dec_tape);
        nn::Mat logits = nn::linear(dec_out, ws.p + refs_->out.w, ws.p + refs_->out.b,
                                    config_.d_model, vocab);

        // label-smoothed cross-entropy, mean over target positions
        const double eps = label_smoothing;
        const double uniform = eps / static_cast<double>(vocab);
        const auto t_count = static_cast<double>(gold.size());
        double loss = 0.0;
        nn::Mat dlogits(logits.rows, logits.cols);
        for (std::size_t t = 0; t < gold.size(); ++t) {
            std::vector<double> row(logits.row(t), logits.row(t) + vocab);
            const std::vector<double> logp = nn::log_softmax(row);
            double smoothed = 0.0;
            for (double lp : logp) smoothed += lp;
            loss += -((1.0 - eps) * logp[static_cast<std::size_t>(gold[t])] +
                      uniform * smoothed);
            double* drow = dlogits.row(t);
            for (std::size_t v = 0; v < vocab; ++v) {
                drow[v] = (std::exp(logp[v]) - uniform) / t_count;
            }
            drow[static_cast<std::size_t>(gold[t])] -= (1.0 - eps) / t_count;
        }
        loss /= t_count;

        nn::Mat d_dec_out = nn::linear_backward(dec_out, dlogits, ws.p + refs_->out.w,
                                                ws.g + refs_->out.w, ws.g + refs_->out.b,
                                                config_.d_model, vocab);
        nn::Mat d_enc_out(enc_out.rows, enc_out.cols);
        tf::run_stack_backward(ws, refs_->dec, prefix, &enc_out, &visible, nullptr, true,
                               dec_tape, d_dec_out, &d_enc_out);
        tf::run_stack_backward(ws, refs_->enc, source, nullptr, nullptr, &visible, false,
                               enc_tape, d_enc_out, nullptr);

        // freeze contract: frozen tensors report exactly zero gradient
        for (const TensorSpec& spec : params_.layout->tensors()) {
            if (!spec.trainable) {
                std::memset(grad.values.data() + spec.offset, 0,
                            spec.size() * sizeof(double));
            }
        }
        out.losses.push_back(loss);
        out.grads.push_back(std::move(grad));
    }
    double total = 0.0;
    for (double l : out.losses) total += l;
    out.mean_loss = total / static_cast<double>(out.losses.size());
    return out;
}

Checkpoint Model::to_checkpoint(const std::vector<std::string>& vocab_tokens) const {
    Checkpoint ckpt;
    ckpt.kind = "summarizer";
    ckpt.config["vocab_size"] = std::to_string(config_.vocab_size);
    ckpt.config["d_model"] = std::to_string(config_.d_model);
    ckpt.config["d_ff"] = std::to_string(config_.d_ff);
    ckpt.config["n_heads"] = std::to_string(config_.n_heads);
    ckpt.config["enc_layers"] = std::to_string(config_.enc_layers);
    ckpt.config["dec_layers"] = std::to_string(config_.dec_layers);
    ckpt.config["max_positions"] = std::to_string(config_.max_positions);
    ckpt.config["adapter_dim"] = std::to_string(config_.adapter_dim);
    {
        std::ostringstream ls;
        ls << config_.label_smoothing;
        ckpt.config["label_smoothing"] = ls.str();
    }
    std::ostringstream adapters;
    for (std::size_t i = 0; i < registry_.size(); ++i) {
        if (i) adapters << ";";
        adapters << registry_[i].name << ":"
                 << (registry_[i].kind == AdapterKind::language ? "language" : "task");
    }
    ckpt.config["adapters"] = adapters.str();
    std::ostringstream stack;
    for (std::size_t i = 0; i < stack_.size(); ++i) {
        if (i) stack << ";";
        stack << stack_[i].name << ":" << (stack_[i].frozen ? "frozen" : "trainable");
    }
    ckpt.config["stack"] = stack.str();
    ckpt.config["base_trainable"] = base_trainable_ ? "1" : "0";
    ckpt.vocab_tokens = vocab_tokens;
    ckpt.params = params_;
    return ckpt;
}

Model Model::from_checkpoint(const Checkpoint& ckpt) {
    if (ckpt.kind != "summarizer") {
        throw std::invalid_argument("checkpoint kind is not summarizer: " + ckpt.kind);
    }
    ModelConfig config;
    config.vocab_size = std::stoull(ckpt.config.at("vocab_size"));
    config.d_model = std::stoull(ckpt.config.at("d_model"));
    config.d_ff = std::stoull(ckpt.config.at("d_ff"));
    config.n_heads = std::stoull(ckpt.config.at("n_heads"));
    config.enc_layers = std::stoull(ckpt.config.at("enc_layers"));
    config.dec_layers = std::stoull(ckpt.config.at("dec_layers"));
    config.max_positions = std::stoull(ckpt.config.at("max_positions"));
    config.adapter_dim = std::stoull(ckpt.config.at("adapter_dim"));
    config.label_smoothing = std::stod(ckpt.config.at("label_smoothing"));

    Model model = Model::init(config, 0);
    auto split = [](const std::string& joined) {
        std::vector<std::string> parts;
        std::istringstream ss(joined);
        std::string part;
        while (std::getline(ss, part, ';')) {
            if (!part.empty()) parts.push_back(part);
        }
        return parts;
    };
    for (const std::string& item : split(ckpt.config.at("adapters"))) {
        const auto colon = item.find(':');
        const std::string name = item.substr(0, colon);
        const AdapterKind kind = item.substr(colon + 1) == "language"
                                     ? AdapterKind::language
                                     : AdapterKind::task;
        model.register_adapter(name, kind, 0);
    }
    AdapterStackSpec spec;
    for (const std::string& item : split(ckpt.config.at("stack"))) {
        const auto colon = item.find(':');
        spec.stack.push_back(
            AdapterStackEntry{item.substr(0, colon), item.substr(colon + 1) == "frozen"});
    }
    model.attach_adapters(spec);
    model.set_base_trainable(ckpt.config.at("base_trainable") == "1");

    if (!model.params_.layout->compatible(*ckpt.params.layout)) {
        throw std::runtime_error("checkpoint layout does not match its config");
    }
    model.params_.values = ckpt.params.values;
    return model;
}

}  // namespace faithsum
