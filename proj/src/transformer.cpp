#include "transformer.hpp"

#include <cassert>
#include <cmath>
#include <limits>

#include "faithsum/kernels.hpp"

namespace faithsum::tf {

namespace {

constexpr double kMaskedScore = -std::numeric_limits<double>::infinity();

nn::Mat head_slice(const nn::Mat& m, std::size_t h, std::size_t head_dim) {
    nn::Mat out(m.rows, head_dim);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* src = m.row(i) + h * head_dim;
        std::copy(src, src + head_dim, out.row(i));
    }
    return out;
}

void head_unslice_acc(nn::Mat& full, const nn::Mat& part, std::size_t h,
                      std::size_t head_dim) {
    for (std::size_t i = 0; i < part.rows; ++i) {
        kernels::axpy(1.0, part.row(i), full.row(i) + h * head_dim, head_dim);
    }
}

}  // namespace

LinRef add_linear(Layout& layout, const std::string& name, std::size_t d_in,
                  std::size_t d_out) {
    LinRef ref;
    ref.w = layout.add(name + ".w", d_in, d_out);
    ref.b = layout.add(name + ".b", 1, d_out);
    return ref;
}

AttnRef add_attn(Layout& layout, const std::string& prefix, std::size_t d) {
    AttnRef ref;
    ref.q = add_linear(layout, prefix + ".q", d, d);
    ref.k = add_linear(layout, prefix + ".k", d, d);
    ref.v = add_linear(layout, prefix + ".v", d, d);
    ref.o = add_linear(layout, prefix + ".o", d, d);
    return ref;
}

FfRef add_ff(Layout& layout, const std::string& prefix, std::size_t d, std::size_t ff) {
    FfRef ref;
    ref.l1 = add_linear(layout, prefix + ".l1", d, ff);
    ref.l2 = add_linear(layout, prefix + ".l2", ff, d);
    return ref;
}

nn::Mat embed(const Workspace& ws, const StackRef& sr, const TokenIds& ids) {
    const std::size_t d = ws.dims.d;
    nn::Mat x(ids.size(), d);
    for (std::size_t t = 0; t < ids.size(); ++t) {
        const double* tok = ws.p + sr.tok_emb + static_cast<std::size_t>(ids[t]) * d;
        const double* pos = ws.p + sr.pos_emb + t * d;
        kernels::affine(1.0, tok, 1.0, pos, x.row(t), d);
    }
    return x;
}

void embed_backward(const Workspace& ws, const StackRef& sr, const TokenIds& ids,
                    const nn::Mat& dx) {
    const std::size_t d = ws.dims.d;
    for (std::size_t t = 0; t < ids.size(); ++t) {
        kernels::axpy(1.0, dx.row(t),
                      ws.g + sr.tok_emb + static_cast<std::size_t>(ids[t]) * d, d);
        kernels::axpy(1.0, dx.row(t), ws.g + sr.pos_emb + t * d, d);
    }
}

namespace {

// xq/xkv are the normalized sublayer inputs.
nn::Mat attn_forward(const Workspace& ws, const AttnRef& ar, const nn::Mat& xq,
                     const nn::Mat& xkv, const std::vector<bool>* key_visible,
                     bool causal, AttnTape* tape) {
    const Dims& dm = ws.dims;
    const std::size_t hd = dm.head_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

    nn::Mat q = nn::linear(xq, ws.p + ar.q.w, ws.p + ar.q.b, dm.d, dm.d);
    nn::Mat k = nn::linear(xkv, ws.p + ar.k.w, ws.p + ar.k.b, dm.d, dm.d);
    nn::Mat v = nn::linear(xkv, ws.p + ar.v.w, ws.p + ar.v.b, dm.d, dm.d);

    nn::Mat o(q.rows, dm.d);
    std::vector<nn::Mat> weights;
    weights.reserve(dm.heads);
    for (std::size_t h = 0; h < dm.heads; ++h) {
        nn::Mat qh = head_slice(q, h, hd);
        nn::Mat kh = head_slice(k, h, hd);
        nn::Mat vh = head_slice(v, h, hd);
        nn::Mat s = nn::matmul_Bt(qh, kh);
        kernels::scale(scale, s.v.data(), s.size());
        for (std::size_t i = 0; i < s.rows; ++i) {
            double* srow = s.row(i);
            for (std::size_t j = 0; j < s.cols; ++j) {
                const bool hidden = (key_visible != nullptr && !(*key_visible)[j]) ||
                                    (causal && j > i);
                if (hidden) srow[j] = kMaskedScore;
            }
        }
        nn::softmax_rows(s);
        nn::Mat oh = nn::matmul(s, vh);
        for (std::size_t i = 0; i < oh.rows; ++i) {
            std::copy(oh.row(i), oh.row(i) + hd, o.row(i) + h * hd);
        }
        weights.push_back(std::move(s));
    }
    nn::Mat out = nn::linear(o, ws.p + ar.o.w, ws.p + ar.o.b, dm.d, dm.d);
    if (tape != nullptr) {
        tape->xq = xq;
        tape->xkv = xkv;
        tape->q = std::move(q);
        tape->k = std::move(k);
        tape->v = std::move(v);
        tape->o = std::move(o);
        tape->a = std::move(weights);
    }
    return out;
}

// Returns (d_xq, d_xkv).
std::pair<nn::Mat, nn::Mat> attn_backward(const Workspace& ws, const AttnRef& ar,
                                          const AttnTape& tape, const nn::Mat& d_out) {
    const Dims& dm = ws.dims;
    const std::size_t hd = dm.head_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

    nn::Mat d_o = nn::linear_backward(tape.o, d_out, ws.p + ar.o.w, ws.g + ar.o.w,
                                      ws.g + ar.o.b, dm.d, dm.d);
    nn::Mat dq(tape.q.rows, dm.d);
    nn::Mat dk(tape.k.rows, dm.d);
    nn::Mat dv(tape.v.rows, dm.d);
    for (std::size_t h = 0; h < dm.heads; ++h) {
        const nn::Mat& a = tape.a[h];
        nn::Mat qh = head_slice(tape.q, h, hd);
        nn::Mat kh = head_slice(tape.k, h, hd);
        nn::Mat vh = head_slice(tape.v, h, hd);
        nn::Mat d_oh = head_slice(d_o, h, hd);

        nn::Mat da = nn::matmul_Bt(d_oh, vh);    // Tq x Tk
        nn::Mat dvh = nn::matmul_tA(a, d_oh);    // Tk x hd
        nn::Mat ds = nn::softmax_rows_backward(a, da);
        kernels::scale(scale, ds.v.data(), ds.size());
        nn::Mat dqh = nn::matmul(ds, kh);
        nn::Mat dkh = nn::matmul_tA(ds, qh);

        head_unslice_acc(dq, dqh, h, hd);
        head_unslice_acc(dk, dkh, h, hd);
        head_unslice_acc(dv, dvh, h, hd);
    }
    nn::Mat d_xq = nn::linear_backward(tape.xq, dq, ws.p + ar.q.w, ws.g + ar.q.w,
                                       ws.g + ar.q.b, dm.d, dm.d);
    nn::Mat d_xkv = nn::linear_backward(tape.xkv, dk, ws.p + ar.k.w, ws.g + ar.k.w,
                                        ws.g + ar.k.b, dm.d, dm.d);
    nn::Mat d_xkv2 = nn::linear_backward(tape.xkv, dv, ws.p + ar.v.w, ws.g + ar.v.w,
                                         ws.g + ar.v.b, dm.d, dm.d);
    nn::add_inplace(d_xkv, d_xkv2);
    return {std::move(d_xq), std::move(d_xkv)};
}

}  // namespace

nn::Mat run_stack(const Workspace& ws, const StackRef& sr, const TokenIds& ids,
                  const nn::Mat* memory, const std::vector<bool>* memory_visible,
                  const std::vector<bool>* self_visible, bool causal,
                  StackTape* tape) {
    const Dims& dm = ws.dims;
    nn::Mat x = embed(ws, sr, ids);
    if (tape != nullptr) tape->subs.resize(sr.subs.size());

    for (std::size_t si = 0; si < sr.subs.size(); ++si) {
        const SubRef& sub = sr.subs[si];
        SubTape* st = tape != nullptr ? &tape->subs[si] : nullptr;
        if (st != nullptr) st->res_in = x;

        nn::Mat normed = nn::rmsnorm(x);
        nn::Mat core;
        switch (sub.kind) {
            case SubRef::self_attn:
                core = attn_forward(ws, sub.attn, normed, normed, self_visible, causal,
                                    st != nullptr ? &st->attn : nullptr);
                break;
            case SubRef::cross_attn:
                core = attn_forward(ws, sub.attn, normed, *memory, memory_visible, false,
                                    st != nullptr ? &st->attn : nullptr);
                break;
            case SubRef::ff: {
                nn::Mat hpre = nn::linear(normed, ws.p + sub.ffr.l1.w, ws.p + sub.ffr.l1.b,
                                          dm.d, dm.ff);
                nn::Mat hact = nn::relu(hpre);
                core = nn::linear(hact, ws.p + sub.ffr.l2.w, ws.p + sub.ffr.l2.b, dm.ff,
                                  dm.d);
                if (st != nullptr) {
                    st->ff_in = std::move(normed);
                    st->ff_hpre = std::move(hpre);
                }
                break;
            }
        }
        nn::add_inplace(x, core);

        for (std::size_t ai = 0; ai < sub.adapters.size(); ++ai) {
            const AdapterRef& ad = sub.adapters[ai];
            if (st != nullptr) st->adapter_in.push_back(x);
            nn::Mat dpre = nn::linear(x, ws.p + ad.down.w, ws.p + ad.down.b, dm.d, ad.dim);
            nn::Mat dact = nn::relu(dpre);
            nn::Mat up = nn::linear(dact, ws.p + ad.up.w, ws.p + ad.up.b, ad.dim, dm.d);
            nn::add_inplace(x, up);
            if (st != nullptr) st->adapter_dpre.push_back(std::move(dpre));
        }
    }
    if (tape != nullptr) tape->final_in = x;
    return nn::rmsnorm(x);
}

void run_stack_backward(const Workspace& ws, const StackRef& sr, const TokenIds& ids,
                        const nn::Mat* memory, const std::vector<bool>* memory_visible,
                        const std::vector<bool>* self_visible, bool causal,
                        const StackTape& tape, const nn::Mat& d_out, nn::Mat* d_memory) {
    (void)memory;
    (void)memory_visible;
    (void)self_visible;
    (void)causal;
    const Dims& dm = ws.dims;
    nn::Mat dx = nn::rmsnorm_backward(tape.final_in, d_out);

    for (std::size_t si = sr.subs.size(); si-- > 0;) {
        const SubRef& sub = sr.subs[si];
        const SubTape& st = tape.subs[si];

        for (std::size_t ai = sub.adapters.size(); ai-- > 0;) {
            const AdapterRef& ad = sub.adapters[ai];
            const nn::Mat& h_in = st.adapter_in[ai];
            const nn::Mat& dpre = st.adapter_dpre[ai];
            nn::Mat dact_saved = nn::relu(dpre);
            nn::Mat d_dact = nn::linear_backward(dact_saved, dx, ws.p + ad.up.w,
                                                 ws.g + ad.up.w, ws.g + ad.up.b, ad.dim,
                                                 dm.d);
            nn::Mat d_dpre = nn::relu_backward(dpre, d_dact);
            nn::Mat dh = nn::linear_backward(h_in, d_dpre, ws.p + ad.down.w,
                                             ws.g + ad.down.w, ws.g + ad.down.b, dm.d,
                                             ad.dim);
            nn::add_inplace(dx, dh);
        }

        // dx is now the gradient at the residual output of the core sublayer
        nn::Mat d_norm;
        switch (sub.kind) {
            case SubRef::self_attn: {
                auto [d_xq, d_xkv] = attn_backward(ws, sub.attn, st.attn, dx);
                nn::add_inplace(d_xq, d_xkv);  // same normalized input on both sides
                d_norm = std::move(d_xq);
                break;
            }
            case SubRef::cross_attn: {
                auto [d_xq, d_xkv] = attn_backward(ws, sub.attn, st.attn, dx);
                if (d_memory != nullptr) nn::add_inplace(*d_memory, d_xkv);
                d_norm = std::move(d_xq);
                break;
            }
            case SubRef::ff: {
                nn::Mat hact = nn::relu(st.ff_hpre);
                nn::Mat d_hact = nn::linear_backward(hact, dx, ws.p + sub.ffr.l2.w,
                                                     ws.g + sub.ffr.l2.w,
                                                     ws.g + sub.ffr.l2.b, dm.ff, dm.d);
                nn::Mat d_hpre = nn::relu_backward(st.ff_hpre, d_hact);
                d_norm = nn::linear_backward(st.ff_in, d_hpre, ws.p + sub.ffr.l1.w,
                                             ws.g + sub.ffr.l1.w, ws.g + sub.ffr.l1.b,
                                             dm.d, dm.ff);
                break;
            }
        }
        nn::Mat d_res = nn::rmsnorm_backward(st.res_in, d_norm);
        nn::add_inplace(dx, d_res);
    }
    embed_backward(ws, sr, ids, dx);
}

}  // namespace faithsum::tf
