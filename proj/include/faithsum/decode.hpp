#pragma once

#include <memory>
#include <vector>

#include "faithsum/corpus.hpp"
#include "faithsum/model.hpp"

namespace faithsum {

struct DecodeConfig {
    std::size_t beam_size = 6;
    std::size_t min_len = 30;
    std::size_t max_len = 84;
    double length_penalty = 0.6;
    std::size_t block_ngram = 3;  // 0 disables repeated-n-gram pruning
    double lambda = 0.0;          // expert/anti-expert fusion coefficient

    void validate() const;
};

// softmax(z + lambda * (z_plus - z_minus)); the returned distribution sums
// to 1 within 1e-12. Throws on dimension mismatch.
std::vector<double> dexpert_step(const std::vector<double>& z,
                                 const std::vector<double>& z_plus,
                                 const std::vector<double>& z_minus, double lambda);

// Next-token logits for a partial hypothesis; lets toy models, fused
// expert ensembles and the exhaustive test oracle share one decoder.
class StepScorer {
public:
    virtual ~StepScorer() = default;
    virtual std::size_t vocab_size() const = 0;
    virtual std::vector<double> step_logits(const TokenIds& generated) const = 0;
};

// Scores the summarizer on a fixed source; prefix = BOS + generated.
class ModelStepScorer final : public StepScorer {
public:
    ModelStepScorer(const Model& model, TokenIds source);
    std::size_t vocab_size() const override;
    std::vector<double> step_logits(const TokenIds& generated) const override;

private:
    const Model& model_;
    TokenIds source_;
    Model::EncodedSource encoded_;
};

// z + lambda * (z+ - z-) at every step.
class FusedStepScorer final : public StepScorer {
public:
    FusedStepScorer(const StepScorer& base, const StepScorer& expert,
                    const StepScorer& anti, double lambda);
    std::size_t vocab_size() const override;
    std::vector<double> step_logits(const TokenIds& generated) const override;

private:
    const StepScorer& base_;
    const StepScorer& expert_;
    const StepScorer& anti_;
    double lambda_;
};

struct DecodeResult {
    TokenIds tokens;      // generated content tokens, EOS stripped
    double score = 0.0;   // sum of log-probs (incl. EOS) / len^penalty
};

// Beam search over log-probabilities with length normalization at ranking
// time, repeated-n-gram pruning, EOS forbidden before min_len and forced at
// max_len. Candidate ties break on lower token id then lower hypothesis
// index; final ties on shorter, then lexicographically smaller output.
DecodeResult beam_search(const StepScorer& scorer, const DecodeConfig& config,
                         int eos_id, const std::vector<int>& forbidden = {});

// Convenience wrapper: decodes a source with the summarizer (optionally
// expert-fused) forbidding the reserved non-EOS ids.
DecodeResult decode_summary(const Model& model, const TokenIds& source,
                            const DecodeConfig& config, const Model* expert = nullptr,
                            const Model* anti_expert = nullptr);

}  // namespace faithsum
