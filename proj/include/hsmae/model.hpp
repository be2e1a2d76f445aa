#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "hsmae/masking.hpp"
#include "hsmae/pos_encoding.hpp"
#include "hsmae/rng.hpp"
#include "hsmae/tensor_store.hpp"
#include "hsmae/tokenizer.hpp"

namespace hsmae {

struct MaeConfig {
    int embed_dim = 64;   // encoder width (1024 at paper scale)
    int enc_depth = 4;
    int enc_heads = 4;
    int dec_dim = 32;     // decoder width
    int dec_depth = 2;
    int dec_heads = 2;
    double mlp_ratio = 4.0;
    int grid_h = 14;      // spatial table extent
    int grid_w = 14;
    int patch = kPatchSize;
    bool normalize_targets = false;  // per-patch target normalization, off by default

    int patch_values() const { return patch * patch; }
    int mlp_hidden(int dim) const { return static_cast<int>(dim * mlp_ratio); }
    void check() const {
        if (embed_dim < 2 || embed_dim % 2 != 0 || dec_dim < 2 || dec_dim % 2 != 0)
            throw Error(ErrorCode::ConfigError, "embed_dim and dec_dim must be even and >= 2");
        if (enc_heads < 1 || embed_dim % enc_heads != 0)
            throw Error(ErrorCode::ConfigError, "embed_dim must divide by enc_heads");
        if (dec_heads < 1 || dec_dim % dec_heads != 0)
            throw Error(ErrorCode::ConfigError, "dec_dim must divide by dec_heads");
        if (enc_depth < 0 || dec_depth < 0 || grid_h < 1 || grid_w < 1)
            throw Error(ErrorCode::ConfigError, "bad depth or grid");
    }
};

// Tensor-store indices for one transformer block.
struct BlockIdx {
    std::size_t ln1_g, ln1_b;
    std::size_t wq, bq, wk, bk, wv, bv, wo, bo;
    std::size_t ln2_g, ln2_b;
    std::size_t w1, b1, w2, b2;
};

struct PosIdx {
    std::size_t table;                // [positions x dim]
    std::size_t wl, bl, wb, bb;       // spectral affine halves
};

template <typename T>
struct MaeParams {
    MaeConfig cfg;
    TensorStore<T> store;

    std::size_t patch_w, patch_b;
    PosIdx enc_pos, dec_pos;
    std::vector<BlockIdx> enc_blocks, dec_blocks;
    std::size_t enc_norm_g, enc_norm_b;
    std::size_t e2d_w, e2d_b;
    std::size_t mask_token;
    std::size_t dec_norm_g, dec_norm_b;
    std::size_t recon_w, recon_b;

    // Multi-label head, present only after add_head().
    int n_labels = 0;
    std::size_t head_w = 0, head_b = 0;

    static MaeParams init(const MaeConfig& cfg, Rng& rng);
    void add_head(int labels, Rng& rng);

    template <typename U>
    MaeParams<U> cast() const {
        MaeParams<U> out;
        out.cfg = cfg;
        out.store = store.template cast<U>();
        out.patch_w = patch_w;
        out.patch_b = patch_b;
        out.enc_pos = enc_pos;
        out.dec_pos = dec_pos;
        out.enc_blocks = enc_blocks;
        out.dec_blocks = dec_blocks;
        out.enc_norm_g = enc_norm_g;
        out.enc_norm_b = enc_norm_b;
        out.e2d_w = e2d_w;
        out.e2d_b = e2d_b;
        out.mask_token = mask_token;
        out.dec_norm_g = dec_norm_g;
        out.dec_norm_b = dec_norm_b;
        out.recon_w = recon_w;
        out.recon_b = recon_b;
        out.n_labels = n_labels;
        out.head_w = head_w;
        out.head_b = head_b;
        return out;
    }
};

// ---------------------------------------------------------------------------
// primitive layers (double accumulation, deterministic loop order)

template <typename T>
void linear_forward(const T* X, int n, int in, const T* W, const T* b, int out, T* Y) {
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < out; ++j) {
            double acc = b ? static_cast<double>(b[j]) : 0.0;
            for (int k = 0; k < in; ++k)
                acc += static_cast<double>(X[static_cast<std::size_t>(i) * in + k]) *
                       static_cast<double>(W[static_cast<std::size_t>(k) * out + j]);
            Y[static_cast<std::size_t>(i) * out + j] = static_cast<T>(acc);
        }
    }
}

template <typename T>
void linear_backward(const T* X, const T* W, const T* dY, int n, int in, int out, T* dX, T* dW,
                     T* dB) {
    if (dX) {
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < in; ++k) {
                double acc = 0.0;
                for (int j = 0; j < out; ++j)
                    acc += static_cast<double>(dY[static_cast<std::size_t>(i) * out + j]) *
                           static_cast<double>(W[static_cast<std::size_t>(k) * out + j]);
                dX[static_cast<std::size_t>(i) * in + k] =
                    static_cast<T>(static_cast<double>(dX[static_cast<std::size_t>(i) * in + k]) + acc);
            }
        }
    }
    if (dW) {
        for (int k = 0; k < in; ++k) {
            for (int j = 0; j < out; ++j) {
                double acc = 0.0;
                for (int i = 0; i < n; ++i)
                    acc += static_cast<double>(X[static_cast<std::size_t>(i) * in + k]) *
                           static_cast<double>(dY[static_cast<std::size_t>(i) * out + j]);
                dW[static_cast<std::size_t>(k) * out + j] =
                    static_cast<T>(static_cast<double>(dW[static_cast<std::size_t>(k) * out + j]) + acc);
            }
        }
    }
    if (dB) {
        for (int j = 0; j < out; ++j) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += static_cast<double>(dY[static_cast<std::size_t>(i) * out + j]);
            dB[j] = static_cast<T>(static_cast<double>(dB[j]) + acc);
        }
    }
}

inline constexpr double kLayerNormEps = 1e-6;

template <typename T>
void layernorm_forward(const T* X, int n, int d, const T* g, const T* b, T* Y, double* mean,
                       double* rstd) {
    for (int i = 0; i < n; ++i) {
        const T* row = X + static_cast<std::size_t>(i) * d;
        double mu = 0.0;
        for (int j = 0; j < d; ++j) mu += static_cast<double>(row[j]);
        mu /= d;
        double var = 0.0;
        for (int j = 0; j < d; ++j) {
            double c = static_cast<double>(row[j]) - mu;
            var += c * c;
        }
        var /= d;
        double rs = 1.0 / std::sqrt(var + kLayerNormEps);
        mean[i] = mu;
        rstd[i] = rs;
        T* out = Y + static_cast<std::size_t>(i) * d;
        for (int j = 0; j < d; ++j) {
            double xhat = (static_cast<double>(row[j]) - mu) * rs;
            out[j] = static_cast<T>(xhat * static_cast<double>(g[j]) + static_cast<double>(b[j]));
        }
    }
}

template <typename T>
void layernorm_backward(const T* X, const T* g, const double* mean, const double* rstd,
                        const T* dY, int n, int d, T* dX, T* dG, T* dB) {
    std::vector<double> xhat(d), dxhat(d);
    for (int i = 0; i < n; ++i) {
        const T* xrow = X + static_cast<std::size_t>(i) * d;
        const T* dyrow = dY + static_cast<std::size_t>(i) * d;
        double m1 = 0.0, m2 = 0.0;
        for (int j = 0; j < d; ++j) {
            xhat[j] = (static_cast<double>(xrow[j]) - mean[i]) * rstd[i];
            dxhat[j] = static_cast<double>(dyrow[j]) * static_cast<double>(g[j]);
            m1 += dxhat[j];
            m2 += dxhat[j] * xhat[j];
        }
        m1 /= d;
        m2 /= d;
        T* dxrow = dX + static_cast<std::size_t>(i) * d;
        for (int j = 0; j < d; ++j) {
            double v = rstd[i] * (dxhat[j] - m1 - xhat[j] * m2);
            dxrow[j] = static_cast<T>(static_cast<double>(dxrow[j]) + v);
        }
        if (dG)
            for (int j = 0; j < d; ++j)
                dG[j] = static_cast<T>(static_cast<double>(dG[j]) +
                                       static_cast<double>(dyrow[j]) * xhat[j]);
        if (dB)
            for (int j = 0; j < d; ++j)
                dB[j] = static_cast<T>(static_cast<double>(dB[j]) + static_cast<double>(dyrow[j]));
    }
}

inline double gelu_fn(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }
inline double gelu_grad(double x) {
    return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))) +
           x * std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

// ---------------------------------------------------------------------------
// transformer blocks

template <typename T>
struct BlockCache {
    int n = 0;
    std::vector<T> x;                  // block input
    std::vector<double> ln1_mean, ln1_rstd;
    std::vector<T> a;                  // LN1 output
    std::vector<T> Q, K, V;
    std::vector<T> attn;               // softmax weights, heads x n x n
    std::vector<T> O;                  // head-concatenated attention values
    std::vector<T> h;                  // x + attention residual
    std::vector<double> ln2_mean, ln2_rstd;
    std::vector<T> m;                  // LN2 output
    std::vector<T> z1;                 // MLP pre-activation
    std::vector<T> g1;                 // gelu(z1)
    std::vector<T> y;                  // block output
};

template <typename T>
void block_forward(const TensorStore<T>& s, const BlockIdx& b, int heads, const T* X, int n, int d,
                   int hidden, BlockCache<T>& c) {
    const int hd = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
    const std::size_t nd = static_cast<std::size_t>(n) * d;

    c.n = n;
    c.x.assign(X, X + nd);
    c.ln1_mean.resize(n);
    c.ln1_rstd.resize(n);
    c.a.resize(nd);
    layernorm_forward(X, n, d, s.data(b.ln1_g), s.data(b.ln1_b), c.a.data(), c.ln1_mean.data(),
                      c.ln1_rstd.data());

    c.Q.resize(nd);
    c.K.resize(nd);
    c.V.resize(nd);
    linear_forward(c.a.data(), n, d, s.data(b.wq), s.data(b.bq), d, c.Q.data());
    linear_forward(c.a.data(), n, d, s.data(b.wk), s.data(b.bk), d, c.K.data());
    linear_forward(c.a.data(), n, d, s.data(b.wv), s.data(b.bv), d, c.V.data());

    c.attn.assign(static_cast<std::size_t>(heads) * n * n, T(0));
    c.O.assign(nd, T(0));
    std::vector<double> row(n);
    for (int h = 0; h < heads; ++h) {
        const int off = h * hd;
        T* A = c.attn.data() + static_cast<std::size_t>(h) * n * n;
        for (int i = 0; i < n; ++i) {
            double mx = -1e300;
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int k = 0; k < hd; ++k)
                    acc += static_cast<double>(c.Q[static_cast<std::size_t>(i) * d + off + k]) *
                           static_cast<double>(c.K[static_cast<std::size_t>(j) * d + off + k]);
                row[j] = acc * scale;
                mx = std::max(mx, row[j]);
            }
            double sum = 0.0;
            for (int j = 0; j < n; ++j) {
                row[j] = std::exp(row[j] - mx);
                sum += row[j];
            }
            for (int j = 0; j < n; ++j)
                A[static_cast<std::size_t>(i) * n + j] = static_cast<T>(row[j] / sum);
            for (int k = 0; k < hd; ++k) {
                double acc = 0.0;
                for (int j = 0; j < n; ++j)
                    acc += static_cast<double>(A[static_cast<std::size_t>(i) * n + j]) *
                           static_cast<double>(c.V[static_cast<std::size_t>(j) * d + off + k]);
                c.O[static_cast<std::size_t>(i) * d + off + k] = static_cast<T>(acc);
            }
        }
    }

    c.h.resize(nd);
    std::vector<T> attn_out(nd);
    linear_forward(c.O.data(), n, d, s.data(b.wo), s.data(b.bo), d, attn_out.data());
    for (std::size_t i = 0; i < nd; ++i)
        c.h[i] = static_cast<T>(static_cast<double>(X[i]) + static_cast<double>(attn_out[i]));

    c.ln2_mean.resize(n);
    c.ln2_rstd.resize(n);
    c.m.resize(nd);
    layernorm_forward(c.h.data(), n, d, s.data(b.ln2_g), s.data(b.ln2_b), c.m.data(),
                      c.ln2_mean.data(), c.ln2_rstd.data());

    const std::size_t nh = static_cast<std::size_t>(n) * hidden;
    c.z1.resize(nh);
    c.g1.resize(nh);
    linear_forward(c.m.data(), n, d, s.data(b.w1), s.data(b.b1), hidden, c.z1.data());
    for (std::size_t i = 0; i < nh; ++i) c.g1[i] = static_cast<T>(gelu_fn(static_cast<double>(c.z1[i])));

    c.y.resize(nd);
    std::vector<T> mlp_out(nd);
    linear_forward(c.g1.data(), n, hidden, s.data(b.w2), s.data(b.b2), d, mlp_out.data());
    for (std::size_t i = 0; i < nd; ++i)
        c.y[i] = static_cast<T>(static_cast<double>(c.h[i]) + static_cast<double>(mlp_out[i]));
}

template <typename T>
void block_backward(const TensorStore<T>& s, const BlockIdx& b, int heads, const BlockCache<T>& c,
                    int d, int hidden, const T* dY, T* dX, TensorStore<T>& grads) {
    const int n = c.n;
    const int hd = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
    const std::size_t nd = static_cast<std::size_t>(n) * d;
    const std::size_t nh = static_cast<std::size_t>(n) * hidden;

    // y = h + W2 gelu(W1 m + b1) + b2
    std::vector<T> dh(dY, dY + nd);
    std::vector<T> dg1(nh, T(0));
    linear_backward(c.g1.data(), s.data(b.w2), dY, n, hidden, d, dg1.data(), grads.data(b.w2),
                    grads.data(b.b2));
    std::vector<T> dz1(nh);
    for (std::size_t i = 0; i < nh; ++i)
        dz1[i] = static_cast<T>(static_cast<double>(dg1[i]) * gelu_grad(static_cast<double>(c.z1[i])));
    std::vector<T> dm(nd, T(0));
    linear_backward(c.m.data(), s.data(b.w1), dz1.data(), n, d, hidden, dm.data(), grads.data(b.w1),
                    grads.data(b.b1));
    layernorm_backward(c.h.data(), s.data(b.ln2_g), c.ln2_mean.data(), c.ln2_rstd.data(), dm.data(),
                       n, d, dh.data(), grads.data(b.ln2_g), grads.data(b.ln2_b));

    // h = x + Wo O + bo
    std::vector<T> dO(nd, T(0));
    linear_backward(c.O.data(), s.data(b.wo), dh.data(), n, d, d, dO.data(), grads.data(b.wo),
                    grads.data(b.bo));

    std::vector<T> dQ(nd, T(0)), dK(nd, T(0)), dV(nd, T(0));
    std::vector<double> dA(static_cast<std::size_t>(n) * n);
    for (int h = 0; h < heads; ++h) {
        const int off = h * hd;
        const T* A = c.attn.data() + static_cast<std::size_t>(h) * n * n;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int k = 0; k < hd; ++k)
                    acc += static_cast<double>(dO[static_cast<std::size_t>(i) * d + off + k]) *
                           static_cast<double>(c.V[static_cast<std::size_t>(j) * d + off + k]);
                dA[static_cast<std::size_t>(i) * n + j] = acc;
            }
        }
        // dV = A^T dO
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < hd; ++k) {
                double acc = 0.0;
                for (int i = 0; i < n; ++i)
                    acc += static_cast<double>(A[static_cast<std::size_t>(i) * n + j]) *
                           static_cast<double>(dO[static_cast<std::size_t>(i) * d + off + k]);
                dV[static_cast<std::size_t>(j) * d + off + k] =
                    static_cast<T>(static_cast<double>(dV[static_cast<std::size_t>(j) * d + off + k]) + acc);
            }
        }
        // softmax backward then dQ, dK
        for (int i = 0; i < n; ++i) {
            double dot = 0.0;
            for (int j = 0; j < n; ++j)
                dot += dA[static_cast<std::size_t>(i) * n + j] *
                       static_cast<double>(A[static_cast<std::size_t>(i) * n + j]);
            for (int j = 0; j < n; ++j)
                dA[static_cast<std::size_t>(i) * n + j] =
                    static_cast<double>(A[static_cast<std::size_t>(i) * n + j]) *
                    (dA[static_cast<std::size_t>(i) * n + j] - dot);
        }
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < hd; ++k) {
                double acc = 0.0;
                for (int j = 0; j < n; ++j)
                    acc += dA[static_cast<std::size_t>(i) * n + j] *
                           static_cast<double>(c.K[static_cast<std::size_t>(j) * d + off + k]);
                dQ[static_cast<std::size_t>(i) * d + off + k] =
                    static_cast<T>(static_cast<double>(dQ[static_cast<std::size_t>(i) * d + off + k]) +
                                   acc * scale);
            }
        }
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < hd; ++k) {
                double acc = 0.0;
                for (int i = 0; i < n; ++i)
                    acc += dA[static_cast<std::size_t>(i) * n + j] *
                           static_cast<double>(c.Q[static_cast<std::size_t>(i) * d + off + k]);
                dK[static_cast<std::size_t>(j) * d + off + k] =
                    static_cast<T>(static_cast<double>(dK[static_cast<std::size_t>(j) * d + off + k]) +
                                   acc * scale);
            }
        }
    }

    std::vector<T> da(nd, T(0));
    linear_backward(c.a.data(), s.data(b.wq), dQ.data(), n, d, d, da.data(), grads.data(b.wq),
                    grads.data(b.bq));
    linear_backward(c.a.data(), s.data(b.wk), dK.data(), n, d, d, da.data(), grads.data(b.wk),
                    grads.data(b.bk));
    linear_backward(c.a.data(), s.data(b.wv), dV.data(), n, d, d, da.data(), grads.data(b.wv),
                    grads.data(b.bv));
    layernorm_backward(c.x.data(), s.data(b.ln1_g), c.ln1_mean.data(), c.ln1_rstd.data(), da.data(),
                       n, d, dh.data(), grads.data(b.ln1_g), grads.data(b.ln1_b));

    for (std::size_t i = 0; i < nd; ++i)
        dX[i] = static_cast<T>(static_cast<double>(dX[i]) + static_cast<double>(dh[i]));
}

// Block stack plus final norm. The final norm is applied only when the stack
// has at least one block, so a depth-0 stack is the identity.
template <typename T>
struct StackCache {
    int n = 0, d = 0;
    std::vector<BlockCache<T>> blocks;
    std::vector<T> final_in;
    std::vector<double> fn_mean, fn_rstd;
    std::vector<T> out;
};

template <typename T>
void stack_forward(const TensorStore<T>& s, const std::vector<BlockIdx>& blocks,
                   std::size_t norm_g, std::size_t norm_b, int heads, int d, int hidden,
                   const T* X, int n, StackCache<T>& c) {
    const std::size_t nd = static_cast<std::size_t>(n) * d;
    c.n = n;
    c.d = d;
    c.blocks.resize(blocks.size());
    const T* cur = X;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        block_forward(s, blocks[i], heads, cur, n, d, hidden, c.blocks[i]);
        cur = c.blocks[i].y.data();
    }
    if (blocks.empty()) {
        c.out.assign(X, X + nd);
        return;
    }
    c.final_in.assign(cur, cur + nd);
    c.fn_mean.resize(n);
    c.fn_rstd.resize(n);
    c.out.resize(nd);
    layernorm_forward(c.final_in.data(), n, d, s.data(norm_g), s.data(norm_b), c.out.data(),
                      c.fn_mean.data(), c.fn_rstd.data());
}

template <typename T>
void stack_backward(const TensorStore<T>& s, const std::vector<BlockIdx>& blocks,
                    std::size_t norm_g, std::size_t norm_b, int heads, int d, int hidden,
                    const StackCache<T>& c, const T* dOut, T* dX, TensorStore<T>& grads) {
    const int n = c.n;
    const std::size_t nd = static_cast<std::size_t>(n) * d;
    std::vector<T> cur(nd, T(0));
    if (blocks.empty()) {
        for (std::size_t i = 0; i < nd; ++i)
            dX[i] = static_cast<T>(static_cast<double>(dX[i]) + static_cast<double>(dOut[i]));
        return;
    }
    layernorm_backward(c.final_in.data(), s.data(norm_g), c.fn_mean.data(), c.fn_rstd.data(), dOut,
                       n, d, cur.data(), grads.data(norm_g), grads.data(norm_b));
    for (std::size_t i = blocks.size(); i-- > 0;) {
        std::vector<T> prev(nd, T(0));
        T* target = i == 0 ? dX : prev.data();
        block_backward(s, blocks[i], heads, c.blocks[i], d, hidden, cur.data(), target, grads);
        if (i != 0) cur = std::move(prev);
    }
}

// ---------------------------------------------------------------------------
// parameter construction

template <typename T>
MaeParams<T> MaeParams<T>::init(const MaeConfig& cfg, Rng& rng) {
    cfg.check();
    MaeParams p;
    p.cfg = cfg;
    auto& s = p.store;
    const int D = cfg.embed_dim, Dd = cfg.dec_dim, P = cfg.grid_h * cfg.grid_w;
    const int pv = cfg.patch_values();

    p.patch_w = s.add("patch.w", {pv, D}, true);
    p.patch_b = s.add("patch.b", {D}, false);

    auto add_pos = [&](const std::string& prefix, int dim) {
        PosIdx pos;
        pos.table = s.add(prefix + ".pos.table", {P, dim}, false);
        pos.wl = s.add(prefix + ".spec.wl", {dim / 2}, true);
        pos.bl = s.add(prefix + ".spec.bl", {dim / 2}, false);
        pos.wb = s.add(prefix + ".spec.wb", {dim / 2}, true);
        pos.bb = s.add(prefix + ".spec.bb", {dim / 2}, false);
        return pos;
    };
    auto add_block = [&](const std::string& prefix, int dim, int hidden) {
        BlockIdx b;
        b.ln1_g = s.add(prefix + ".ln1.g", {dim}, false);
        b.ln1_b = s.add(prefix + ".ln1.b", {dim}, false);
        b.wq = s.add(prefix + ".attn.wq", {dim, dim}, true);
        b.bq = s.add(prefix + ".attn.bq", {dim}, false);
        b.wk = s.add(prefix + ".attn.wk", {dim, dim}, true);
        b.bk = s.add(prefix + ".attn.bk", {dim}, false);
        b.wv = s.add(prefix + ".attn.wv", {dim, dim}, true);
        b.bv = s.add(prefix + ".attn.bv", {dim}, false);
        b.wo = s.add(prefix + ".attn.wo", {dim, dim}, true);
        b.bo = s.add(prefix + ".attn.bo", {dim}, false);
        b.ln2_g = s.add(prefix + ".ln2.g", {dim}, false);
        b.ln2_b = s.add(prefix + ".ln2.b", {dim}, false);
        b.w1 = s.add(prefix + ".mlp.w1", {dim, hidden}, true);
        b.b1 = s.add(prefix + ".mlp.b1", {hidden}, false);
        b.w2 = s.add(prefix + ".mlp.w2", {hidden, dim}, true);
        b.b2 = s.add(prefix + ".mlp.b2", {dim}, false);
        return b;
    };

    p.enc_pos = add_pos("enc", D);
    for (int i = 0; i < cfg.enc_depth; ++i)
        p.enc_blocks.push_back(add_block("enc." + std::to_string(i), D, cfg.mlp_hidden(D)));
    p.enc_norm_g = s.add("enc.norm.g", {D}, false);
    p.enc_norm_b = s.add("enc.norm.b", {D}, false);

    p.e2d_w = s.add("e2d.w", {D, Dd}, true);
    p.e2d_b = s.add("e2d.b", {Dd}, false);
    p.mask_token = s.add("mask.token", {Dd}, false);

    p.dec_pos = add_pos("dec", Dd);
    for (int i = 0; i < cfg.dec_depth; ++i)
        p.dec_blocks.push_back(add_block("dec." + std::to_string(i), Dd, cfg.mlp_hidden(Dd)));
    p.dec_norm_g = s.add("dec.norm.g", {Dd}, false);
    p.dec_norm_b = s.add("dec.norm.b", {Dd}, false);

    p.recon_w = s.add("recon.w", {Dd, pv}, true);
    p.recon_b = s.add("recon.b", {pv}, false);

    // truncated normal 0.02 for weights and tables, ones for norm gains
    for (auto& e : s.entries) {
        bool is_gain = e.name.ends_with("norm.g") || e.name.ends_with("ln1.g") || e.name.ends_with("ln2.g");
        bool is_weight = e.decay || e.name.ends_with("pos.table") || e.name == "mask.token";
        if (is_gain)
            std::fill(e.data.begin(), e.data.end(), T(1));
        else if (is_weight)
            for (auto& v : e.data) v = static_cast<T>(rng.truncated_normal(0.02));
    }
    return p;
}

template <typename T>
void MaeParams<T>::add_head(int labels, Rng& rng) {
    if (labels < 1) throw Error(ErrorCode::ConfigError, "head needs at least one label");
    n_labels = labels;
    head_w = store.add("head.w", {cfg.embed_dim, labels}, true);
    head_b = store.add("head.b", {labels}, false);
    for (auto& v : store.at(head_w).data) v = static_cast<T>(rng.truncated_normal(0.02));
}

// ---------------------------------------------------------------------------
// encoder / decoder forward-backward

template <typename T>
struct EncoderCache {
    std::vector<T> embedded;  // n x D, projection + positional embedding
    StackCache<T> stack;
    int n = 0;
};

template <typename T>
void embed_tokens(const MaeParams<T>& p, const TokenBatch& tokens, const PosIdx& pos, int dim,
                  std::size_t proj_w, std::size_t proj_b, bool project, std::vector<T>& out) {
    const auto& s = p.store;
    const int pv = p.cfg.patch_values();
    const int n = static_cast<int>(tokens.size());
    if (n > 0 && tokens.values.size() != tokens.size() * static_cast<std::size_t>(pv))
        throw Error(ErrorCode::ShapeMismatch, "token values do not match the configured patch size");
    out.assign(static_cast<std::size_t>(n) * dim, T(0));
    std::vector<T> pe(dim);
    for (int t = 0; t < n; ++t) {
        auto [row, col] = tokens.spatial_index[t];
        if (row < 0 || row >= p.cfg.grid_h || col < 0 || col >= p.cfg.grid_w)
            throw Error(ErrorCode::IndexOutOfRange, "token position outside the spatial table");
        T* x = out.data() + static_cast<std::size_t>(t) * dim;
        if (project) {
            const float* v = tokens.patch(t);
            const T* W = s.data(proj_w);
            const T* b = s.data(proj_b);
            for (int j = 0; j < dim; ++j) {
                double acc = static_cast<double>(b[j]);
                for (int k = 0; k < pv; ++k)
                    acc += static_cast<double>(v[k]) *
                           static_cast<double>(W[static_cast<std::size_t>(k) * dim + j]);
                x[j] = static_cast<T>(acc);
            }
        }
        positional_embedding(row, col, p.cfg.grid_w, tokens.channel_meta[t], s.data(pos.table),
                             s.data(pos.wl), s.data(pos.bl), s.data(pos.wb), s.data(pos.bb), dim,
                             pe.data());
        for (int j = 0; j < dim; ++j)
            x[j] = static_cast<T>(static_cast<double>(x[j]) + static_cast<double>(pe[j]));
    }
}

template <typename T>
void embed_tokens_backward(const MaeParams<T>& p, const TokenBatch& tokens, const PosIdx& pos,
                           int dim, std::size_t proj_w, std::size_t proj_b, bool project,
                           const T* dX, TensorStore<T>& grads) {
    const int pv = p.cfg.patch_values();
    const int n = static_cast<int>(tokens.size());
    for (int t = 0; t < n; ++t) {
        auto [row, col] = tokens.spatial_index[t];
        const T* dx = dX + static_cast<std::size_t>(t) * dim;
        if (project) {
            const float* v = tokens.patch(t);
            T* dW = grads.data(proj_w);
            T* db = grads.data(proj_b);
            for (int j = 0; j < dim; ++j) {
                double d = static_cast<double>(dx[j]);
                db[j] = static_cast<T>(static_cast<double>(db[j]) + d);
                for (int k = 0; k < pv; ++k) {
                    std::size_t idx = static_cast<std::size_t>(k) * dim + j;
                    dW[idx] = static_cast<T>(static_cast<double>(dW[idx]) +
                                             static_cast<double>(v[k]) * d);
                }
            }
        }
        T* dtab = grads.data(pos.table) + static_cast<std::size_t>(row * p.cfg.grid_w + col) * dim;
        for (int j = 0; j < dim; ++j)
            dtab[j] = static_cast<T>(static_cast<double>(dtab[j]) + static_cast<double>(dx[j]));
        spectral_embedding_backward(tokens.channel_meta[t], dx, dim / 2, grads.data(pos.wl),
                                    grads.data(pos.bl), grads.data(pos.wb), grads.data(pos.bb));
    }
}

// Projection + positional embedding + encoder stack over visible tokens.
template <typename T>
std::vector<T> encode(const MaeParams<T>& p, const TokenBatch& visible, EncoderCache<T>* cache) {
    const int n = static_cast<int>(visible.size());
    if (n < 1) throw Error(ErrorCode::ShapeMismatch, "encoder needs at least one token");
    EncoderCache<T> local;
    EncoderCache<T>& c = cache ? *cache : local;
    c.n = n;
    embed_tokens(p, visible, p.enc_pos, p.cfg.embed_dim, p.patch_w, p.patch_b, true, c.embedded);
    stack_forward(p.store, p.enc_blocks, p.enc_norm_g, p.enc_norm_b, p.cfg.enc_heads,
                  p.cfg.embed_dim, p.cfg.mlp_hidden(p.cfg.embed_dim), c.embedded.data(), n, c.stack);
    return c.stack.out;
}

template <typename T>
void encode_backward(const MaeParams<T>& p, const TokenBatch& visible, const EncoderCache<T>& c,
                     const T* dLatents, TensorStore<T>& grads) {
    const int n = c.n;
    std::vector<T> dEmbed(static_cast<std::size_t>(n) * p.cfg.embed_dim, T(0));
    stack_backward(p.store, p.enc_blocks, p.enc_norm_g, p.enc_norm_b, p.cfg.enc_heads,
                   p.cfg.embed_dim, p.cfg.mlp_hidden(p.cfg.embed_dim), c.stack, dLatents,
                   dEmbed.data(), grads);
    embed_tokens_backward(p, visible, p.enc_pos, p.cfg.embed_dim, p.patch_w, p.patch_b, true,
                          dEmbed.data(), grads);
}

template <typename T>
struct MaeForwardCache {
    TokenBatch visible;
    EncoderCache<T> enc;
    std::vector<T> dec_in;     // N x dec_dim before the decoder stack
    StackCache<T> dec_stack;
    std::vector<T> pred;       // n_masked x patch_values
    double loss = 0.0;
};

// Full MAE forward: encode visible tokens, fill masked slots with the mask
// token, decode the complete sequence, reconstruct masked patches, and take
// MSE against the target batch on masked patches only.
template <typename T>
double mae_forward(const MaeParams<T>& p, const TokenBatch& input_tokens,
                   const TokenBatch& target_tokens, const MaskPlan& plan, MaeForwardCache<T>* out) {
    const int N = plan.grid.token_count();
    if (static_cast<int>(input_tokens.size()) != N || static_cast<int>(target_tokens.size()) != N)
        throw Error(ErrorCode::GridMismatch, "token batches do not match the mask plan");
    if (plan.masked_token_ids.empty())
        throw Error(ErrorCode::AlignmentError, "mask plan has no masked tokens");
    const int D = p.cfg.embed_dim, Dd = p.cfg.dec_dim, pv = p.cfg.patch_values();

    MaeForwardCache<T> local;
    MaeForwardCache<T>& c = out ? *out : local;
    c.visible = select_tokens(input_tokens, plan.visible_token_ids);
    std::vector<T> latents = encode(p, c.visible, &c.enc);

    // decoder input: visible slots get projected latents, masked slots the mask token
    c.dec_in.assign(static_cast<std::size_t>(N) * Dd, T(0));
    const T* e2dW = p.store.data(p.e2d_w);
    const T* e2dB = p.store.data(p.e2d_b);
    for (std::size_t k = 0; k < plan.visible_token_ids.size(); ++k) {
        const T* lat = latents.data() + k * D;
        T* dst = c.dec_in.data() + static_cast<std::size_t>(plan.visible_token_ids[k]) * Dd;
        for (int j = 0; j < Dd; ++j) {
            double acc = static_cast<double>(e2dB[j]);
            for (int i = 0; i < D; ++i)
                acc += static_cast<double>(lat[i]) *
                       static_cast<double>(e2dW[static_cast<std::size_t>(i) * Dd + j]);
            dst[j] = static_cast<T>(acc);
        }
    }
    const T* mtok = p.store.data(p.mask_token);
    for (int id : plan.masked_token_ids) {
        T* dst = c.dec_in.data() + static_cast<std::size_t>(id) * Dd;
        for (int j = 0; j < Dd; ++j) dst[j] = mtok[j];
    }
    // decoder positional embedding for every slot, from the token it stands for
    std::vector<T> pe;
    embed_tokens(p, input_tokens, p.dec_pos, Dd, 0, 0, false, pe);
    for (std::size_t i = 0; i < c.dec_in.size(); ++i)
        c.dec_in[i] = static_cast<T>(static_cast<double>(c.dec_in[i]) + static_cast<double>(pe[i]));

    stack_forward(p.store, p.dec_blocks, p.dec_norm_g, p.dec_norm_b, p.cfg.dec_heads, Dd,
                  p.cfg.mlp_hidden(Dd), c.dec_in.data(), N, c.dec_stack);

    // reconstruction head on masked slots only
    const std::size_t M = plan.masked_token_ids.size();
    c.pred.resize(M * pv);
    const T* rW = p.store.data(p.recon_w);
    const T* rB = p.store.data(p.recon_b);
    for (std::size_t k = 0; k < M; ++k) {
        const T* z = c.dec_stack.out.data() + static_cast<std::size_t>(plan.masked_token_ids[k]) * Dd;
        T* pr = c.pred.data() + k * pv;
        for (int j = 0; j < pv; ++j) {
            double acc = static_cast<double>(rB[j]);
            for (int i = 0; i < Dd; ++i)
                acc += static_cast<double>(z[i]) *
                       static_cast<double>(rW[static_cast<std::size_t>(i) * pv + j]);
            pr[j] = static_cast<T>(acc);
        }
    }

    double loss = 0.0;
    for (std::size_t k = 0; k < M; ++k) {
        const float* tgt = target_tokens.patch(static_cast<std::size_t>(plan.masked_token_ids[k]));
        const T* pr = c.pred.data() + k * pv;
        for (int j = 0; j < pv; ++j) {
            double diff = static_cast<double>(pr[j]) - static_cast<double>(tgt[j]);
            loss += diff * diff;
        }
    }
    loss /= static_cast<double>(M) * pv;
    if (!std::isfinite(loss)) throw Error(ErrorCode::NonFinite, "MAE loss is not finite");
    c.loss = loss;
    return loss;
}

// Exact gradients of the masked MSE with respect to every parameter tensor.
// grads must be zeros_like(params.store) or an accumulator; contributions are
// scaled by `weight` (1/batch_size for batch averaging).
template <typename T>
double mae_forward_backward(const MaeParams<T>& p, const TokenBatch& input_tokens,
                            const TokenBatch& target_tokens, const MaskPlan& plan,
                            TensorStore<T>& grads, double weight = 1.0) {
    MaeForwardCache<T> c;
    double loss = mae_forward(p, input_tokens, target_tokens, plan, &c);

    const int N = plan.grid.token_count();
    const int D = p.cfg.embed_dim, Dd = p.cfg.dec_dim, pv = p.cfg.patch_values();
    const std::size_t M = plan.masked_token_ids.size();

    // d loss / d pred
    std::vector<T> dPred(M * pv);
    const double inv = 2.0 * weight / (static_cast<double>(M) * pv);
    for (std::size_t k = 0; k < M; ++k) {
        const float* tgt = target_tokens.patch(static_cast<std::size_t>(plan.masked_token_ids[k]));
        const T* pr = c.pred.data() + k * pv;
        T* dp = dPred.data() + k * pv;
        for (int j = 0; j < pv; ++j)
            dp[j] = static_cast<T>((static_cast<double>(pr[j]) - static_cast<double>(tgt[j])) * inv);
    }

    // recon head backward into the decoder output rows
    std::vector<T> dDecOut(static_cast<std::size_t>(N) * Dd, T(0));
    const T* rW = p.store.data(p.recon_w);
    T* dRW = grads.data(p.recon_w);
    T* dRB = grads.data(p.recon_b);
    for (std::size_t k = 0; k < M; ++k) {
        int id = plan.masked_token_ids[k];
        const T* z = c.dec_stack.out.data() + static_cast<std::size_t>(id) * Dd;
        const T* dp = dPred.data() + k * pv;
        T* dz = dDecOut.data() + static_cast<std::size_t>(id) * Dd;
        for (int j = 0; j < pv; ++j) {
            double d = static_cast<double>(dp[j]);
            dRB[j] = static_cast<T>(static_cast<double>(dRB[j]) + d);
            for (int i = 0; i < Dd; ++i) {
                std::size_t idx = static_cast<std::size_t>(i) * pv + j;
                dRW[idx] = static_cast<T>(static_cast<double>(dRW[idx]) + static_cast<double>(z[i]) * d);
            }
        }
        for (int i = 0; i < Dd; ++i) {
            double acc = 0.0;
            for (int j = 0; j < pv; ++j)
                acc += static_cast<double>(dp[j]) *
                       static_cast<double>(rW[static_cast<std::size_t>(i) * pv + j]);
            dz[i] = static_cast<T>(acc);
        }
    }

    std::vector<T> dDecIn(static_cast<std::size_t>(N) * Dd, T(0));
    stack_backward(p.store, p.dec_blocks, p.dec_norm_g, p.dec_norm_b, p.cfg.dec_heads, Dd,
                   p.cfg.mlp_hidden(Dd), c.dec_stack, dDecOut.data(), dDecIn.data(), grads);

    // decoder positional embedding gets gradient from every slot
    embed_tokens_backward(p, input_tokens, p.dec_pos, Dd, 0, 0, false, dDecIn.data(), grads);

    // mask token: sum over masked slots
    T* dMtok = grads.data(p.mask_token);
    for (int id : plan.masked_token_ids) {
        const T* dx = dDecIn.data() + static_cast<std::size_t>(id) * Dd;
        for (int j = 0; j < Dd; ++j)
            dMtok[j] = static_cast<T>(static_cast<double>(dMtok[j]) + static_cast<double>(dx[j]));
    }

    // enc_to_dec backward into latents
    const std::size_t nvis = plan.visible_token_ids.size();
    std::vector<T> dLat(nvis * D, T(0));
    const T* e2dW = p.store.data(p.e2d_w);
    T* dW = grads.data(p.e2d_w);
    T* dB = grads.data(p.e2d_b);
    for (std::size_t k = 0; k < nvis; ++k) {
        int id = plan.visible_token_ids[k];
        const T* lat = c.enc.stack.out.data() + k * D;
        const T* dx = dDecIn.data() + static_cast<std::size_t>(id) * Dd;
        T* dl = dLat.data() + k * D;
        for (int j = 0; j < Dd; ++j) {
            double d = static_cast<double>(dx[j]);
            dB[j] = static_cast<T>(static_cast<double>(dB[j]) + d);
            for (int i = 0; i < D; ++i) {
                std::size_t idx = static_cast<std::size_t>(i) * Dd + j;
                dW[idx] = static_cast<T>(static_cast<double>(dW[idx]) + static_cast<double>(lat[i]) * d);
            }
        }
        for (int i = 0; i < D; ++i) {
            double acc = 0.0;
            for (int j = 0; j < Dd; ++j)
                acc += static_cast<double>(dx[j]) *
                       static_cast<double>(e2dW[static_cast<std::size_t>(i) * Dd + j]);
            dl[i] = static_cast<T>(acc);
        }
    }

    encode_backward(p, c.visible, c.enc, dLat.data(), grads);
    return loss;
}

// Mean over masked tokens and patch values of the squared error. pred rows
// align with masked_ids.
template <typename T>
double mae_loss(const std::vector<T>& pred, const TokenBatch& target_tokens,
                const std::vector<int>& masked_ids, int patch_values = kPatchValues) {
    if (masked_ids.empty()) throw Error(ErrorCode::AlignmentError, "no masked tokens");
    if (pred.size() != masked_ids.size() * static_cast<std::size_t>(patch_values))
        throw Error(ErrorCode::AlignmentError, "prediction rows do not align with masked ids");
    double loss = 0.0;
    for (std::size_t k = 0; k < masked_ids.size(); ++k) {
        int id = masked_ids[k];
        if (id < 0 || id >= static_cast<int>(target_tokens.size()))
            throw Error(ErrorCode::AlignmentError, "masked id outside target batch");
        const float* tgt = target_tokens.patch(static_cast<std::size_t>(id));
        for (int j = 0; j < patch_values; ++j) {
            double diff = static_cast<double>(pred[k * patch_values + j]) - static_cast<double>(tgt[j]);
            loss += diff * diff;
        }
    }
    return loss / (static_cast<double>(masked_ids.size()) * patch_values);
}

// ---------------------------------------------------------------------------
// classifier path (mean-pooled tokens -> affine head)

template <typename T>
std::vector<T> classifier_logits(const MaeParams<T>& p, const TokenBatch& tokens,
                                 EncoderCache<T>* cache = nullptr) {
    if (p.n_labels < 1) throw Error(ErrorCode::ConfigError, "model has no classifier head");
    EncoderCache<T> local;
    EncoderCache<T>& c = cache ? *cache : local;
    std::vector<T> latents = encode(p, tokens, &c);
    const int n = static_cast<int>(tokens.size());
    const int D = p.cfg.embed_dim;
    std::vector<T> pooled(D);
    for (int j = 0; j < D; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += static_cast<double>(latents[static_cast<std::size_t>(i) * D + j]);
        pooled[j] = static_cast<T>(acc / n);
    }
    std::vector<T> logits(p.n_labels);
    linear_forward(pooled.data(), 1, D, p.store.data(p.head_w), p.store.data(p.head_b), p.n_labels,
                   logits.data());
    return logits;
}

template <typename T>
std::vector<double> sigmoid_vec(const std::vector<T>& logits) {
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i)
        out[i] = 1.0 / (1.0 + std::exp(-static_cast<double>(logits[i])));
    return out;
}

// Mean binary cross-entropy over labels against soft targets, with exact
// gradients through the head and the encoder.
template <typename T>
double classify_forward_backward(const MaeParams<T>& p, const TokenBatch& tokens,
                                 const std::vector<float>& targets, TensorStore<T>& grads,
                                 double weight = 1.0) {
    if (static_cast<int>(targets.size()) != p.n_labels)
        throw Error(ErrorCode::ShapeMismatch, "target vector does not match head width");
    EncoderCache<T> cache;
    std::vector<T> logits = classifier_logits(p, tokens, &cache);
    const int L = p.n_labels, D = p.cfg.embed_dim;
    const int n = static_cast<int>(tokens.size());

    double loss = 0.0;
    std::vector<T> dLogits(L);
    for (int i = 0; i < L; ++i) {
        double z = static_cast<double>(logits[i]);
        double y = static_cast<double>(targets[i]);
        // numerically stable BCE-with-logits
        loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::fabs(z)));
        double s = 1.0 / (1.0 + std::exp(-z));
        dLogits[i] = static_cast<T>((s - y) * weight / L);
    }
    loss /= L;

    // recompute pooled features for the head backward
    std::vector<T> pooled(D);
    for (int j = 0; j < D; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            acc += static_cast<double>(cache.stack.out[static_cast<std::size_t>(i) * D + j]);
        pooled[j] = static_cast<T>(acc / n);
    }
    std::vector<T> dPooled(D, T(0));
    linear_backward(pooled.data(), p.store.data(p.head_w), dLogits.data(), 1, D, L, dPooled.data(),
                    grads.data(p.head_w), grads.data(p.head_b));

    std::vector<T> dLatents(static_cast<std::size_t>(n) * D);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < D; ++j)
            dLatents[static_cast<std::size_t>(i) * D + j] =
                static_cast<T>(static_cast<double>(dPooled[j]) / n);
    encode_backward(p, tokens, cache, dLatents.data(), grads);
    return loss;
}

}  // namespace hsmae
