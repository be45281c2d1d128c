#include "faithsum/decode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "faithsum/nn.hpp"

namespace faithsum {

void DecodeConfig::validate() const {
    if (beam_size == 0) throw std::invalid_argument("decode: beam_size must be >= 1");
    if (min_len == 0 || min_len > max_len) {
        throw std::invalid_argument("decode: need 1 <= min_len <= max_len");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("decode: lambda must be finite and >= 0");
    }
}

std::vector<double> dexpert_step(const std::vector<double>& z,
                                 const std::vector<double>& z_plus,
                                 const std::vector<double>& z_minus, double lambda) {
    if (z.size() != z_plus.size() || z.size() != z_minus.size()) {
        throw std::invalid_argument("dexpert_step: logit dimensions differ");
    }
    if (z.empty()) throw std::invalid_argument("dexpert_step: empty logits");
    std::vector<double> fused(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        fused[i] = z[i] + lambda * (z_plus[i] - z_minus[i]);
    }
    return nn::softmax(fused);
}

ModelStepScorer::ModelStepScorer(const Model& model, TokenIds source)
    : model_(model), source_(std::move(source)), encoded_(model.encode_source(source_)) {}

std::size_t ModelStepScorer::vocab_size() const { return model_.config().vocab_size; }

std::vector<double> ModelStepScorer::step_logits(const TokenIds& generated) const {
    TokenIds prefix;
    prefix.reserve(generated.size() + 1);
    prefix.push_back(Vocabulary::kBos);
    prefix.insert(prefix.end(), generated.begin(), generated.end());
    nn::Mat logits = model_.decode_prefix(encoded_, prefix);
    const double* last = logits.row(logits.rows - 1);
    return std::vector<double>(last, last + logits.cols);
}

FusedStepScorer::FusedStepScorer(const StepScorer& base, const StepScorer& expert,
                                 const StepScorer& anti, double lambda)
    : base_(base), expert_(expert), anti_(anti), lambda_(lambda) {
    if (base.vocab_size() != expert.vocab_size() ||
        base.vocab_size() != anti.vocab_size()) {
        throw std::invalid_argument("fused scorer: vocabulary sizes differ");
    }
}

std::size_t FusedStepScorer::vocab_size() const { return base_.vocab_size(); }

std::vector<double> FusedStepScorer::step_logits(const TokenIds& generated) const {
    std::vector<double> z = base_.step_logits(generated);
    const std::vector<double> zp = expert_.step_logits(generated);
    const std::vector<double> zm = anti_.step_logits(generated);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += lambda_ * (zp[i] - zm[i]);
    return z;
}

namespace {

// true if appending tok would complete an n-gram already present
bool completes_repeated_ngram(const TokenIds& toks, int tok, std::size_t n) {
    if (n == 0 || toks.size() + 1 < n) return false;
    const std::size_t tail = n - 1;  // last n-1 existing tokens + tok
    const std::size_t tail_start = toks.size() - tail;
    for (std::size_t s = 0; s + n <= toks.size(); ++s) {
        bool match = true;
        for (std::size_t k = 0; k < tail && match; ++k) {
            match = toks[s + k] == toks[tail_start + k];
        }
        if (match && toks[s + tail] == tok) return true;
    }
    return false;
}

struct Hyp {
    TokenIds toks;
    double logp = 0.0;
};

double normalized(double logp, std::size_t len, double penalty) {
    return logp / std::pow(static_cast<double>(len), penalty);
}

bool better_final(const DecodeResult& a, const DecodeResult& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
    return a.tokens < b.tokens;
}

}  // namespace

DecodeResult beam_search(const StepScorer& scorer, const DecodeConfig& config,
                         int eos_id, const std::vector<int>& forbidden) {
    config.validate();
    const std::size_t vocab = scorer.vocab_size();
    if (eos_id < 0 || static_cast<std::size_t>(eos_id) >= vocab) {
        throw std::invalid_argument("beam_search: eos id out of range");
    }
    std::vector<bool> banned(vocab, false);
    for (int id : forbidden) {
        if (id >= 0 && static_cast<std::size_t>(id) < vocab) banned[static_cast<std::size_t>(id)] = true;
    }

    std::vector<Hyp> live;
    live.push_back(Hyp{});
    bool have_best = false;
    DecodeResult best;

    struct Cand {
        double logp;
        int tok;
        std::size_t hyp;
    };

    while (!live.empty()) {
        std::vector<Cand> cands;
        for (std::size_t hi = 0; hi < live.size(); ++hi) {
            const Hyp& hyp = live[hi];
            const std::vector<double> logp = nn::log_softmax(scorer.step_logits(hyp.toks));
            if (hyp.toks.size() >= config.min_len) {
                DecodeResult finished;
                finished.tokens = hyp.toks;
                finished.score = normalized(hyp.logp + logp[static_cast<std::size_t>(eos_id)],
                                            hyp.toks.size(), config.length_penalty);
                if (!have_best || better_final(finished, best)) {
                    best = std::move(finished);
                    have_best = true;
                }
            }
            if (hyp.toks.size() >= config.max_len) continue;  // EOS forced above
            for (std::size_t tok = 0; tok < vocab; ++tok) {
                if (static_cast<int>(tok) == eos_id || banned[tok]) continue;
                if (completes_repeated_ngram(hyp.toks, static_cast<int>(tok),
                                             config.block_ngram)) {
                    continue;
                }
                cands.push_back(Cand{hyp.logp + logp[tok], static_cast<int>(tok), hi});
            }
        }
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.logp != b.logp) return a.logp > b.logp;
            if (a.tok != b.tok) return a.tok < b.tok;
            return a.hyp < b.hyp;
        });
        const std::size_t keep = std::min(cands.size(), config.beam_size);
        std::vector<Hyp> next;
        next.reserve(keep);
        for (std::size_t i = 0; i < keep; ++i) {
            Hyp hyp = live[cands[i].hyp];
            hyp.toks.push_back(cands[i].tok);
            hyp.logp = cands[i].logp;
            next.push_back(std::move(hyp));
        }
        live = std::move(next);
    }
    if (!have_best) {
        throw std::runtime_error("beam_search: no hypothesis satisfied the constraints");
    }
    return best;
}

DecodeResult decode_summary(const Model& model, const TokenIds& source,
                            const DecodeConfig& config, const Model* expert,
                            const Model* anti_expert) {
    const std::vector<int> reserved = {Vocabulary::kPad, Vocabulary::kBos,
                                       Vocabulary::kUnk, Vocabulary::kSep,
                                       Vocabulary::kCls};
    ModelStepScorer base(model, source);
    if (expert != nullptr || anti_expert != nullptr) {
        if (expert == nullptr || anti_expert == nullptr) {
            throw std::invalid_argument("decode: expert fusion needs both expert and anti-expert");
        }
        ModelStepScorer plus(*expert, source);
        ModelStepScorer minus(*anti_expert, source);
        FusedStepScorer fused(base, plus, minus, config.lambda);
        return beam_search(fused, config, Vocabulary::kEos, reserved);
    }
    return beam_search(base, config, Vocabulary::kEos, reserved);
}

}  // namespace faithsum
