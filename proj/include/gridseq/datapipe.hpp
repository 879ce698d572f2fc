#ifndef GRIDSEQ_DATAPIPE_HPP
#define GRIDSEQ_DATAPIPE_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "gridseq/matrix.hpp"

namespace gridseq {

// Normalization floor for constant windows (flat pre-fault angles
// would otherwise divide by zero).
inline constexpr double kSigmaFloor = 1e-8;

struct ChannelSeries {
    std::vector<double> values;
    std::size_t trajectory_id = 0;
    std::size_t channel_id = 0;  // delta_1..delta_ng, omega_1..omega_ng
};

struct WindowSample {
    std::vector<double> input;   // L_seq, normalized in place by normalize()
    std::vector<double> target;  // L_pred, physical units
    double mu = 0.0;
    double sigma = 1.0;
    bool normalized = false;
    std::size_t trajectory_id = 0;
    std::size_t channel_id = 0;
    std::size_t start = 0;
};

struct PatchConfig {
    std::size_t patch_len = 16;  // L_p
    std::size_t stride = 8;      // S

    std::size_t patch_count(std::size_t l_seq) const {
        if (stride < 1 || patch_len < 1 || patch_len > l_seq)
            throw ConfigError("PatchConfig: need S >= 1 and 1 <= L_p <= L_seq");
        return (l_seq - patch_len) / stride + 1;
    }
};

struct PatchedSample {
    Matrix patches;  // P x L_p
    double mu = 0.0;
    double sigma = 1.0;
};

// Splits a trajectory's channel-major sample block into univariate
// series, order fixed as (delta_1..delta_ng, omega_1..omega_ng).
inline std::vector<ChannelSeries> decompose_channels(const std::vector<std::vector<double>>& channels,
                                                     std::size_t trajectory_id) {
    std::vector<ChannelSeries> out;
    out.reserve(channels.size());
    for (std::size_t c = 0; c < channels.size(); ++c)
        out.push_back({channels[c], trajectory_id, c});
    return out;
}

// Unit-stride sliding window; returns empty when the series is too short.
inline std::vector<WindowSample> segment(const ChannelSeries& series, std::size_t l_seq,
                                         std::size_t l_pred) {
    std::vector<WindowSample> out;
    const std::size_t t = series.values.size();
    if (t < l_seq + l_pred) return out;
    const std::size_t count = t - l_seq - l_pred + 1;
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        WindowSample w;
        w.input.assign(series.values.begin() + s, series.values.begin() + s + l_seq);
        w.target.assign(series.values.begin() + s + l_seq,
                        series.values.begin() + s + l_seq + l_pred);
        w.trajectory_id = series.trajectory_id;
        w.channel_id = series.channel_id;
        w.start = s;
        out.push_back(std::move(w));
    }
    return out;
}

inline void window_stats(const std::vector<double>& v, double& mu, double& sigma) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());  // population variance
    mu = mean;
    sigma = std::sqrt(var);
    if (sigma < kSigmaFloor) sigma = kSigmaFloor;
}

// Standardizes the input portion by its own statistics; the target
// stays in physical units (loss-space normalization is the trainer's
// concern).
inline WindowSample normalize(WindowSample sample) {
    window_stats(sample.input, sample.mu, sample.sigma);
    for (double& x : sample.input) x = (x - sample.mu) / sample.sigma;
    sample.normalized = true;
    return sample;
}

inline std::vector<double> denormalize(const std::vector<double>& pred, double mu, double sigma) {
    std::vector<double> out(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) out[i] = sigma * pred[i] + mu;
    return out;
}

// Patch p covers input[p*S : p*S + L_p]; floor semantics drop any
// trailing samples past the last full patch.
inline PatchedSample patchify(const WindowSample& sample, const PatchConfig& cfg) {
    const std::size_t l_seq = sample.input.size();
    const std::size_t p_count = cfg.patch_count(l_seq);
    PatchedSample out;
    out.patches = Matrix(p_count, cfg.patch_len);
    for (std::size_t p = 0; p < p_count; ++p)
        for (std::size_t j = 0; j < cfg.patch_len; ++j)
            out.patches(p, j) = sample.input[p * cfg.stride + j];
    out.mu = sample.mu;
    out.sigma = sample.sigma;
    return out;
}

}  // namespace gridseq

#endif  // GRIDSEQ_DATAPIPE_HPP
