#ifndef GRIDSEQ_MODEL_HPP
#define GRIDSEQ_MODEL_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "gridseq/datapipe.hpp"
#include "gridseq/matrix.hpp"

namespace gridseq {

inline constexpr double kLayerNormEps = 1e-5;

enum class AttentionMode { causal, bidirectional };

struct ModelConfig {
    std::size_t layers = 3;       // L
    std::size_t heads = 4;        // h
    std::size_t dim = 64;         // d
    std::size_t ffn_dim = 256;    // d_ff
    std::size_t l_seq = 65;
    std::size_t l_pred = 1;
    std::size_t patch_len = 16;   // L_p
    std::size_t stride = 8;       // S
    AttentionMode mode = AttentionMode::causal;

    std::size_t head_dim() const { return dim / heads; }
    std::size_t patch_count() const {
        return PatchConfig{patch_len, stride}.patch_count(l_seq);
    }
    PatchConfig patch_config() const { return {patch_len, stride}; }

    void validate() const {
        if (dim % heads != 0) throw ConfigError("ModelConfig: d must be divisible by h");
        patch_count();  // throws on inconsistent pipeline geometry
    }
};

// Desk profile: grad-checkable and trainable in minutes on one core.
inline ModelConfig desk_config() { return ModelConfig{}; }

// Reference full-scale profile (12 layers, 12 heads, 768 wide; d_ff = 4d).
inline ModelConfig full_config() {
    ModelConfig c;
    c.layers = 12;
    c.heads = 12;
    c.dim = 768;
    c.ffn_dim = 4 * 768;
    return c;
}

// Bidirectional-attention baseline: 3 layers, 6 heads, width 128.
inline ModelConfig enc_baseline_config() {
    ModelConfig c;
    c.layers = 3;
    c.heads = 6;
    c.dim = 128;
    c.ffn_dim = 4 * 128;
    c.mode = AttentionMode::bidirectional;
    return c;
}

struct LayerParams {
    Matrix w_q, w_k, w_v, w_o;        // d x d
    Matrix ln1_gain, ln1_bias;        // 1 x d
    Matrix w_1, b_1;                  // d x d_ff, 1 x d_ff
    Matrix w_2, b_2;                  // d_ff x d, 1 x d
    Matrix ln2_gain, ln2_bias;        // 1 x d
};

struct ModelParameters {
    Matrix w_p;    // L_p x d
    Matrix b_p;    // 1 x d
    Matrix e_pos;  // P x d
    std::vector<LayerParams> layers;
    Matrix w_out;  // P*d x L_pred
    Matrix b_out;  // 1 x L_pred
};

// Visits every learnable array with a stable name; iteration order is
// fixed so checkpoints and optimizer state are deterministic.
template <class Params, class Fn>
void for_each_array(Params& p, Fn&& fn) {
    fn("embed.W_p", p.w_p);
    fn("embed.b_p", p.b_p);
    fn("embed.E_pos", p.e_pos);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const std::string pre = "layer" + std::to_string(l) + ".";
        auto& lp = p.layers[l];
        fn(pre + "attn.W_q", lp.w_q);
        fn(pre + "attn.W_k", lp.w_k);
        fn(pre + "attn.W_v", lp.w_v);
        fn(pre + "attn.W_o", lp.w_o);
        fn(pre + "ln1.gain", lp.ln1_gain);
        fn(pre + "ln1.bias", lp.ln1_bias);
        fn(pre + "ffn.W_1", lp.w_1);
        fn(pre + "ffn.b_1", lp.b_1);
        fn(pre + "ffn.W_2", lp.w_2);
        fn(pre + "ffn.b_2", lp.b_2);
        fn(pre + "ln2.gain", lp.ln2_gain);
        fn(pre + "ln2.bias", lp.ln2_bias);
    }
    fn("head.W_out", p.w_out);
    fn("head.b_out", p.b_out);
}

// Flat view of all arrays in the fixed visitation order; index-aligned
// across parameter/gradient/moment structs.
inline std::vector<std::pair<std::string, Matrix*>> named_arrays(ModelParameters& p) {
    std::vector<std::pair<std::string, Matrix*>> out;
    for_each_array(p, [&](const std::string& name, Matrix& m) { out.emplace_back(name, &m); });
    return out;
}

struct FreezeMask {
    std::map<std::string, bool> trainable;

    bool is_trainable(const std::string& name) const {
        auto it = trainable.find(name);
        if (it == trainable.end()) throw ConfigError("FreezeMask: unknown array " + name);
        return it->second;
    }
};

// Default freeze policy: T-block attention/FFN arrays frozen; the
// embedding, every layer-norm gain/bias, and the output head train.
inline FreezeMask default_freeze_mask(ModelParameters& params, bool freeze_blocks = true) {
    FreezeMask mask;
    for_each_array(params, [&](const std::string& name, Matrix&) {
        const bool block =
            name.find(".attn.") != std::string::npos || name.find(".ffn.") != std::string::npos;
        mask.trainable[name] = !(freeze_blocks && block);
    });
    return mask;
}

inline FreezeMask all_trainable_mask(ModelParameters& params) {
    return default_freeze_mask(params, false);
}

inline ModelParameters init_parameters(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const std::size_t d = cfg.dim, dff = cfg.ffn_dim, p_cnt = cfg.patch_count();
    ModelParameters params;
    params.w_p = Matrix(cfg.patch_len, d);
    params.b_p = Matrix(1, d);
    params.e_pos = Matrix(p_cnt, d);
    params.layers.resize(cfg.layers);
    for (auto& lp : params.layers) {
        lp.w_q = Matrix(d, d);
        lp.w_k = Matrix(d, d);
        lp.w_v = Matrix(d, d);
        lp.w_o = Matrix(d, d);
        lp.ln1_gain = Matrix(1, d, 1.0);
        lp.ln1_bias = Matrix(1, d);
        lp.w_1 = Matrix(d, dff);
        lp.b_1 = Matrix(1, dff);
        lp.w_2 = Matrix(dff, d);
        lp.b_2 = Matrix(1, d);
        lp.ln2_gain = Matrix(1, d, 1.0);
        lp.ln2_bias = Matrix(1, d);
    }
    params.w_out = Matrix(p_cnt * d, cfg.l_pred);
    params.b_out = Matrix(1, cfg.l_pred);

    Rng rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 0.02);
    for_each_array(params, [&](const std::string& name, Matrix& m) {
        const bool weight = name.find(".W_") != std::string::npos ||
                            name.find("embed.W_p") != std::string::npos ||
                            name.find("head.W_out") != std::string::npos;
        if (!weight) return;  // biases, norms, E_pos keep their defaults
        for (double& v : m.data) v = gauss(rng);
    });
    return params;
}

inline ModelParameters zero_like(const ModelParameters& params) {
    ModelParameters g = params;
    for_each_array(g, [](const std::string&, Matrix& m) {
        std::fill(m.data.begin(), m.data.end(), 0.0);
    });
    return g;
}

// Lower-triangular-zero causal mask: entry (r, c) is 0 when r >= c and
// the sentinel otherwise.
inline Matrix causal_mask(std::size_t p) {
    Matrix m(p, p);
    for (std::size_t r = 0; r < p; ++r)
        for (std::size_t c = r + 1; c < p; ++c) m(r, c) = kMaskSentinel;
    return m;
}

// ---------------------------------------------------------------------
// Forward pass with optional cache for backprop / diagnostics.
// ---------------------------------------------------------------------
struct LayerCache {
    Matrix z_in;                 // P x d
    Matrix q, k, v;              // P x d, head-partitioned column blocks
    std::vector<Matrix> attn;    // h matrices, P x P
    Matrix head_concat;          // P x d
    Matrix attn_out;             // P x d
    Matrix res1;                 // P x d
    Matrix ln1_xhat;             // P x d
    std::vector<double> ln1_inv; // P, 1/sqrt(var+eps)
    Matrix h_att;                // P x d
    Matrix ffn_pre;              // P x d_ff
    Matrix ffn_act;              // P x d_ff
    Matrix res2;                 // P x d
    Matrix ln2_xhat;             // P x d
    std::vector<double> ln2_inv; // P
    Matrix z_out;                // P x d
};

struct ForwardCache {
    Matrix patches;  // P x L_p
    Matrix z0;
    std::vector<LayerCache> layers;
    std::vector<double> flat;        // P*d
    std::vector<double> prediction;  // normalized space, L_pred
};

// Retained per-forward diagnostics: hidden states z^0..z^L and the
// per-layer mean attention matrices.
struct ForwardTrace {
    std::vector<Matrix> hidden;           // L+1 entries, each P x d
    std::vector<Matrix> mean_attention;   // L entries, each P x P (mean over heads)
};

inline void layer_norm_rows(const Matrix& x, const Matrix& gain, const Matrix& bias, Matrix& out,
                            Matrix& xhat, std::vector<double>& inv_std) {
    const std::size_t rows = x.rows, d = x.cols;
    out = Matrix(rows, d);
    xhat = Matrix(rows, d);
    inv_std.assign(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        double mean = 0.0;
        for (std::size_t j = 0; j < d; ++j) mean += x(r, j);
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double c = x(r, j) - mean;
            var += c * c;
        }
        var /= static_cast<double>(d);
        const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
        inv_std[r] = inv;
        for (std::size_t j = 0; j < d; ++j) {
            const double h = (x(r, j) - mean) * inv;
            xhat(r, j) = h;
            out(r, j) = h * gain(0, j) + bias(0, j);
        }
    }
}

// z0 = x^P W^p + b^p + E_pos, bias broadcast per patch row.
inline Matrix embed(const PatchedSample& patched, const ModelParameters& params) {
    if (patched.patches.cols != params.w_p.rows || patched.patches.rows != params.e_pos.rows)
        throw ShapeError("embed: patch geometry does not match parameters");
    Matrix z0 = matmul(patched.patches, params.w_p);
    for (std::size_t r = 0; r < z0.rows; ++r)
        for (std::size_t j = 0; j < z0.cols; ++j) z0(r, j) += params.b_p(0, j) + params.e_pos(r, j);
    return z0;
}

// Multi-head attention: per head softmax(Q K^T / sqrt(d_k) + M) V,
// heads concatenated then projected by W^O.
inline Matrix attention(const Matrix& z, const LayerParams& lp, const ModelConfig& cfg,
                        LayerCache* cache) {
    const std::size_t p = z.rows, d = cfg.dim, h = cfg.heads, dk = cfg.head_dim();
    Matrix q = matmul(z, lp.w_q);
    Matrix k = matmul(z, lp.w_k);
    Matrix v = matmul(z, lp.w_v);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    const Matrix mask = cfg.mode == AttentionMode::causal ? causal_mask(p) : Matrix(p, p);

    Matrix concat(p, d);
    std::vector<Matrix> attn_mats;
    attn_mats.reserve(h);
    for (std::size_t head = 0; head < h; ++head) {
        const std::size_t off = head * dk;
        Matrix scores(p, p);
        for (std::size_t r = 0; r < p; ++r)
            for (std::size_t c = 0; c < p; ++c) {
                double s = 0.0;
                for (std::size_t t = 0; t < dk; ++t) s += q(r, off + t) * k(c, off + t);
                scores(r, c) = s * scale + mask(r, c);
            }
        Matrix a = softmax_rows(scores);
        for (std::size_t r = 0; r < p; ++r)
            for (std::size_t t = 0; t < dk; ++t) {
                double s = 0.0;
                for (std::size_t c = 0; c < p; ++c) s += a(r, c) * v(c, off + t);
                concat(r, off + t) = s;
            }
        attn_mats.push_back(std::move(a));
    }
    Matrix out = matmul(concat, lp.w_o);
    if (cache) {
        cache->q = std::move(q);
        cache->k = std::move(k);
        cache->v = std::move(v);
        cache->attn = std::move(attn_mats);
        cache->head_concat = std::move(concat);
    }
    return out;
}

// Post-norm residual block: h_att = LN(MHCA(z) + z); z' = LN(FFN(h_att) + h_att).
inline Matrix transformer_block(const Matrix& z, const LayerParams& lp, const ModelConfig& cfg,
                                LayerCache* cache) {
    LayerCache local;
    LayerCache* c = cache ? cache : &local;
    c->z_in = z;
    c->attn_out = attention(z, lp, cfg, c);
    c->res1 = c->attn_out;
    for (std::size_t i = 0; i < z.size(); ++i) c->res1.data[i] += z.data[i];
    layer_norm_rows(c->res1, lp.ln1_gain, lp.ln1_bias, c->h_att, c->ln1_xhat, c->ln1_inv);

    c->ffn_pre = matmul(c->h_att, lp.w_1);
    for (std::size_t r = 0; r < c->ffn_pre.rows; ++r)
        for (std::size_t j = 0; j < c->ffn_pre.cols; ++j) c->ffn_pre(r, j) += lp.b_1(0, j);
    c->ffn_act = c->ffn_pre;
    for (double& x : c->ffn_act.data) x = gelu(x);
    Matrix ffn_out = matmul(c->ffn_act, lp.w_2);
    for (std::size_t r = 0; r < ffn_out.rows; ++r)
        for (std::size_t j = 0; j < ffn_out.cols; ++j) ffn_out(r, j) += lp.b_2(0, j);

    c->res2 = ffn_out;
    for (std::size_t i = 0; i < c->res2.size(); ++i) c->res2.data[i] += c->h_att.data[i];
    layer_norm_rows(c->res2, lp.ln2_gain, lp.ln2_bias, c->z_out, c->ln2_xhat, c->ln2_inv);
    return c->z_out;
}

// Flatten z^L row-major and apply the output affine map; result is in
// normalized space (denormalization is a separate step).
inline std::vector<double> project_normalized(const Matrix& z_last, const ModelParameters& params,
                                              std::vector<double>* flat_out = nullptr) {
    const std::size_t n = z_last.size();
    if (params.w_out.rows != n) throw ShapeError("project: flatten length mismatch");
    std::vector<double> pred(params.w_out.cols);
    for (std::size_t j = 0; j < pred.size(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += z_last.data[i] * params.w_out(i, j);
        pred[j] = s + params.b_out(0, j);
    }
    if (flat_out) flat_out->assign(z_last.data.begin(), z_last.data.end());
    return pred;
}

// Full physical-unit projection (flatten + affine + inverse normalization).
inline std::vector<double> project(const Matrix& z_last, const ModelParameters& params, double mu,
                                   double sigma) {
    return denormalize(project_normalized(z_last, params), mu, sigma);
}

// Normalized-space forward over an already patchified sample.
inline std::vector<double> forward_patches(const PatchedSample& patched,
                                           const ModelParameters& params, const ModelConfig& cfg,
                                           ForwardCache* cache = nullptr,
                                           ForwardTrace* trace = nullptr) {
    Matrix z = embed(patched, params);
    if (cache) {
        cache->patches = patched.patches;
        cache->z0 = z;
        cache->layers.resize(cfg.layers);
    }
    if (trace) {
        trace->hidden.clear();
        trace->mean_attention.clear();
        trace->hidden.push_back(z);
    }
    for (std::size_t l = 0; l < cfg.layers; ++l) {
        LayerCache local;
        LayerCache* lc = cache ? &cache->layers[l] : &local;
        z = transformer_block(z, params.layers[l], cfg, lc);
        if (trace) {
            trace->hidden.push_back(z);
            Matrix mean(lc->attn[0].rows, lc->attn[0].cols);
            for (const Matrix& a : lc->attn)
                for (std::size_t i = 0; i < a.size(); ++i) mean.data[i] += a.data[i];
            for (double& v : mean.data) v /= static_cast<double>(cfg.heads);
            trace->mean_attention.push_back(std::move(mean));
        }
    }
    std::vector<double> pred = project_normalized(z, params, cache ? &cache->flat : nullptr);
    if (cache) cache->prediction = pred;
    return pred;
}

// End-to-end forward on a normalized window sample: patchify, embed,
// blocks, project, denormalize. Deterministic.
inline std::vector<double> forward(const WindowSample& sample, const ModelParameters& params,
                                   const ModelConfig& cfg, ForwardTrace* trace = nullptr) {
    if (!sample.normalized) throw ConfigError("forward: sample must be normalized first");
    PatchedSample patched = patchify(sample, cfg.patch_config());
    std::vector<double> pred = forward_patches(patched, params, cfg, nullptr, trace);
    return denormalize(pred, sample.mu, sample.sigma);
}

// ---------------------------------------------------------------------
// Backward pass. d_pred is dLoss/d(normalized prediction); gradients
// accumulate into `grads` (same shape as the parameters).
// ---------------------------------------------------------------------
inline void layer_norm_rows_backward(const Matrix& d_out, const Matrix& xhat,
                                     const std::vector<double>& inv_std, const Matrix& gain,
                                     Matrix& d_x, Matrix& d_gain, Matrix& d_bias) {
    const std::size_t rows = d_out.rows, d = d_out.cols;
    d_x = Matrix(rows, d);
    for (std::size_t r = 0; r < rows; ++r) {
        double sum_g = 0.0, sum_gx = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double gdy = d_out(r, j) * gain(0, j);
            sum_g += gdy;
            sum_gx += gdy * xhat(r, j);
            d_gain(0, j) += d_out(r, j) * xhat(r, j);
            d_bias(0, j) += d_out(r, j);
        }
        const double nd = static_cast<double>(d);
        for (std::size_t j = 0; j < d; ++j) {
            const double gdy = d_out(r, j) * gain(0, j);
            d_x(r, j) = (gdy - sum_g / nd - xhat(r, j) * sum_gx / nd) * inv_std[r];
        }
    }
}

inline Matrix attention_backward(const Matrix& d_out, const LayerCache& c, const LayerParams& lp,
                                 const ModelConfig& cfg, LayerParams& g) {
    const std::size_t p = c.z_in.rows, d = cfg.dim, h = cfg.heads, dk = cfg.head_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

    // out = concat * W_o
    Matrix d_concat(p, d);
    matmul_a_bt_add(d_out, lp.w_o, d_concat);
    matmul_at_b_add(c.head_concat, d_out, g.w_o);

    Matrix d_q(p, d), d_k(p, d), d_v(p, d);
    for (std::size_t head = 0; head < h; ++head) {
        const std::size_t off = head * dk;
        const Matrix& a = c.attn[head];
        // dV_h += A^T dO_h ; dA = dO_h V_h^T
        Matrix d_a(p, p);
        for (std::size_t r = 0; r < p; ++r)
            for (std::size_t col = 0; col < p; ++col) {
                double s = 0.0;
                for (std::size_t t = 0; t < dk; ++t)
                    s += d_concat(r, off + t) * c.v(col, off + t);
                d_a(r, col) = s;
            }
        for (std::size_t col = 0; col < p; ++col)
            for (std::size_t t = 0; t < dk; ++t) {
                double s = 0.0;
                for (std::size_t r = 0; r < p; ++r) s += a(r, col) * d_concat(r, off + t);
                d_v(col, off + t) = s;
            }
        // softmax backward: dS = A o (dA - rowsum(dA o A)); masked cells
        // have A = 0 and contribute nothing.
        Matrix d_s(p, p);
        for (std::size_t r = 0; r < p; ++r) {
            double dot = 0.0;
            for (std::size_t col = 0; col < p; ++col) dot += d_a(r, col) * a(r, col);
            for (std::size_t col = 0; col < p; ++col)
                d_s(r, col) = a(r, col) * (d_a(r, col) - dot);
        }
        // scores = scale * Q_h K_h^T
        for (std::size_t r = 0; r < p; ++r)
            for (std::size_t t = 0; t < dk; ++t) {
                double sq = 0.0;
                for (std::size_t col = 0; col < p; ++col) sq += d_s(r, col) * c.k(col, off + t);
                d_q(r, off + t) = sq * scale;
            }
        for (std::size_t col = 0; col < p; ++col)
            for (std::size_t t = 0; t < dk; ++t) {
                double sk = 0.0;
                for (std::size_t r = 0; r < p; ++r) sk += d_s(r, col) * c.q(r, off + t);
                d_k(col, off + t) = sk * scale;
            }
    }

    Matrix d_z(p, d);
    matmul_a_bt_add(d_q, lp.w_q, d_z);
    matmul_a_bt_add(d_k, lp.w_k, d_z);
    matmul_a_bt_add(d_v, lp.w_v, d_z);
    matmul_at_b_add(c.z_in, d_q, g.w_q);
    matmul_at_b_add(c.z_in, d_k, g.w_k);
    matmul_at_b_add(c.z_in, d_v, g.w_v);
    return d_z;
}

inline Matrix transformer_block_backward(const Matrix& d_z_out, const LayerCache& c,
                                         const LayerParams& lp, const ModelConfig& cfg,
                                         LayerParams& g) {
    Matrix d_res2;
    layer_norm_rows_backward(d_z_out, c.ln2_xhat, c.ln2_inv, lp.ln2_gain, d_res2, g.ln2_gain,
                             g.ln2_bias);

    // res2 = ffn_out + h_att
    Matrix d_ffn_out = d_res2;
    Matrix d_h_att = d_res2;

    // ffn_out = act * W_2 + b_2
    Matrix d_act(c.ffn_act.rows, c.ffn_act.cols);
    matmul_a_bt_add(d_ffn_out, lp.w_2, d_act);
    matmul_at_b_add(c.ffn_act, d_ffn_out, g.w_2);
    for (std::size_t r = 0; r < d_ffn_out.rows; ++r)
        for (std::size_t j = 0; j < d_ffn_out.cols; ++j) g.b_2(0, j) += d_ffn_out(r, j);

    Matrix d_pre = d_act;
    for (std::size_t i = 0; i < d_pre.size(); ++i)
        d_pre.data[i] *= gelu_derivative(c.ffn_pre.data[i]);

    matmul_a_bt_add(d_pre, lp.w_1, d_h_att);
    matmul_at_b_add(c.h_att, d_pre, g.w_1);
    for (std::size_t r = 0; r < d_pre.rows; ++r)
        for (std::size_t j = 0; j < d_pre.cols; ++j) g.b_1(0, j) += d_pre(r, j);

    Matrix d_res1;
    layer_norm_rows_backward(d_h_att, c.ln1_xhat, c.ln1_inv, lp.ln1_gain, d_res1, g.ln1_gain,
                             g.ln1_bias);

    // res1 = attn_out + z_in
    Matrix d_z = attention_backward(d_res1, c, lp, cfg, g);
    for (std::size_t i = 0; i < d_z.size(); ++i) d_z.data[i] += d_res1.data[i];
    return d_z;
}

inline void backward(const std::vector<double>& d_pred, const ForwardCache& cache,
                     const ModelParameters& params, const ModelConfig& cfg,
                     ModelParameters& grads) {
    const std::size_t n = cache.flat.size();
    // head: pred = flat * W_out + b_out
    std::vector<double> d_flat(n, 0.0);
    for (std::size_t j = 0; j < d_pred.size(); ++j) {
        grads.b_out(0, j) += d_pred[j];
        for (std::size_t i = 0; i < n; ++i) {
            grads.w_out(i, j) += cache.flat[i] * d_pred[j];
            d_flat[i] += params.w_out(i, j) * d_pred[j];
        }
    }
    const std::size_t p = cache.z0.rows, d = cache.z0.cols;
    Matrix d_z(p, d);
    d_z.data = d_flat;

    for (std::size_t l = cfg.layers; l-- > 0;)
        d_z = transformer_block_backward(d_z, cache.layers[l], params.layers[l], cfg,
                                         grads.layers[l]);

    // z0 = patches * W_p + b_p + E_pos
    for (std::size_t r = 0; r < p; ++r)
        for (std::size_t j = 0; j < d; ++j) {
            grads.b_p(0, j) += d_z(r, j);
            grads.e_pos(r, j) += d_z(r, j);
        }
    matmul_at_b_add(cache.patches, d_z, grads.w_p);
}

inline void apply_freeze(ModelParameters& grads, const FreezeMask& mask) {
    for_each_array(grads, [&](const std::string& name, Matrix& m) {
        if (!mask.is_trainable(name)) std::fill(m.data.begin(), m.data.end(), 0.0);
    });
}

}  // namespace gridseq

#endif  // GRIDSEQ_MODEL_HPP
