#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "faithsum/corpus.hpp"
#include "faithsum/nn.hpp"
#include "faithsum/params.hpp"

namespace faithsum {

struct ModelConfig {
    std::size_t vocab_size = 64;
    std::size_t d_model = 16;
    std::size_t d_ff = 32;
    std::size_t n_heads = 2;
    std::size_t enc_layers = 1;
    std::size_t dec_layers = 1;
    std::size_t max_positions = 128;
    std::size_t adapter_dim = 8;
    double label_smoothing = 0.1;

    void validate() const;  // throws std::invalid_argument
    bool operator==(const ModelConfig&) const = default;
};

enum class AdapterKind { language, task };

struct AdapterStackEntry {
    std::string name;
    bool frozen = false;
};

struct AdapterStackSpec {
    std::vector<AdapterStackEntry> stack;
};

// Tiny encoder-decoder summarizer over a flat parameter vector, with
// hand-written backprop and MAD-X style stackable bottleneck adapters.
// Adapters are registered (allocating their tensors, up-projection
// zero-initialized) and then attached, which selects the active stack and
// applies frozen flags.
class Model {
public:
    static Model init(const ModelConfig& config, std::uint64_t seed);

    const ModelConfig& config() const { return config_; }
    const ParamVector& params() const { return params_; }
    void set_params(ParamVector params);

    void register_adapter(const std::string& name, AdapterKind kind, std::uint64_t seed);
    bool has_adapter(const std::string& name) const;
    void attach_adapters(const AdapterStackSpec& spec);
    const std::vector<AdapterStackEntry>& active_adapters() const { return stack_; }
    // Freeze or unfreeze everything outside the adapters.
    void set_base_trainable(bool trainable);

    // Next-token logits for every prefix position (prefix length x vocab).
    // The caller supplies the BOS-led prefix.
    nn::Mat forward(const TokenIds& source, const TokenIds& target_prefix) const;

    // Split forward pass so decoding can reuse the encoded source.
    struct EncodedSource {
        nn::Mat memory;
        std::vector<bool> visible;
    };
    EncodedSource encode_source(const TokenIds& source) const;
    nn::Mat decode_prefix(const EncodedSource& source, const TokenIds& target_prefix) const;

    struct BatchGrads {
        double mean_loss = 0.0;
        std::vector<double> losses;
        std::vector<ParamVector> grads;  // one per example, frozen spans zeroed
    };
    // Label-smoothed cross-entropy (mean over target positions) per example.
    // target excludes BOS/EOS; internally the prefix is BOS+target and the
    // gold sequence target+EOS.
    BatchGrads loss_and_grads(const std::vector<std::pair<TokenIds, TokenIds>>& batch) const;
    BatchGrads loss_and_grads(const std::vector<std::pair<TokenIds, TokenIds>>& batch,
                              double label_smoothing) const;

    Checkpoint to_checkpoint(const std::vector<std::string>& vocab_tokens) const;
    static Model from_checkpoint(const Checkpoint& ckpt);

private:
    Model() = default;
    void rebuild();

    struct AdapterDef {
        std::string name;
        AdapterKind kind;
    };

    ModelConfig config_;
    std::vector<AdapterDef> registry_;
    std::vector<AdapterStackEntry> stack_;
    bool base_trainable_ = true;
    ParamVector params_;

    struct Refs;
    std::shared_ptr<const Refs> refs_;
};

}  // namespace faithsum
