#pragma once

// Internal transformer machinery shared by the summarizer and the
// classifier: parameter layout assembly over a flat buffer, forward passes
// that record tapes, and the matching hand-written backward passes.

#include <string>
#include <vector>

#include "faithsum/corpus.hpp"
#include "faithsum/params.hpp"
#include "faithsum/nn.hpp"

namespace faithsum::tf {

struct Dims {
    std::size_t vocab = 0;
    std::size_t d = 0;
    std::size_t ff = 0;
    std::size_t heads = 0;
    std::size_t max_pos = 0;
    std::size_t head_dim() const { return d / heads; }
};

struct LinRef {
    std::size_t w = 0;
    std::size_t b = 0;
};
struct AttnRef {
    LinRef q, k, v, o;
};
struct FfRef {
    LinRef l1, l2;
};
struct AdapterRef {
    LinRef down, up;
    std::size_t dim = 0;
};

struct SubRef {
    enum Kind { self_attn, cross_attn, ff } kind = self_attn;
    AttnRef attn;
    FfRef ffr;
    std::vector<AdapterRef> adapters;  // active stack at this position
};

struct StackRef {
    std::size_t tok_emb = 0;
    std::size_t pos_emb = 0;
    std::vector<SubRef> subs;
};

// Registers the linear pair <name>.w / <name>.b.
LinRef add_linear(Layout& layout, const std::string& name, std::size_t d_in,
                  std::size_t d_out);
AttnRef add_attn(Layout& layout, const std::string& prefix, std::size_t d);
FfRef add_ff(Layout& layout, const std::string& prefix, std::size_t d, std::size_t ff);

struct AttnTape {
    nn::Mat xq, xkv;          // normalized linear inputs
    nn::Mat q, k, v, o;       // o = concatenated head outputs, pre-output-proj
    std::vector<nn::Mat> a;   // per-head attention weights
};

struct SubTape {
    nn::Mat res_in;                        // residual stream entering the sublayer
    AttnTape attn;                         // attention sublayers
    nn::Mat ff_in, ff_hpre;                // ff sublayer
    std::vector<nn::Mat> adapter_in;       // input to each active adapter
    std::vector<nn::Mat> adapter_dpre;     // pre-relu bottleneck activations
};

struct StackTape {
    std::vector<SubTape> subs;
    nn::Mat final_in;  // input of the closing rmsnorm
};

struct Workspace {
    const double* p = nullptr;  // parameter base
    double* g = nullptr;        // gradient base, null outside training
    Dims dims;
};

// Token + position embedding rows for ids.
nn::Mat embed(const Workspace& ws, const StackRef& sr, const TokenIds& ids);
void embed_backward(const Workspace& ws, const StackRef& sr, const TokenIds& ids,
                    const nn::Mat& dx);

// Runs embedding, all sublayers and the closing rmsnorm. memory != null
// feeds cross-attention sublayers. visible flags mask key positions
// (nullptr = all visible); causal applies to self-attention.
nn::Mat run_stack(const Workspace& ws, const StackRef& sr, const TokenIds& ids,
                  const nn::Mat* memory, const std::vector<bool>* memory_visible,
                  const std::vector<bool>* self_visible, bool causal,
                  StackTape* tape);

// Accumulates weight gradients into ws.g and, for decoder stacks, the
// gradient w.r.t. memory into d_memory.
void run_stack_backward(const Workspace& ws, const StackRef& sr, const TokenIds& ids,
                        const nn::Mat* memory, const std::vector<bool>* memory_visible,
                        const std::vector<bool>* self_visible, bool causal,
                        const StackTape& tape, const nn::Mat& d_out, nn::Mat* d_memory);

}  // namespace faithsum::tf
