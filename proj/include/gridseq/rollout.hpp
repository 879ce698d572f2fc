#ifndef GRIDSEQ_ROLLOUT_HPP
#define GRIDSEQ_ROLLOUT_HPP

#include <chrono>
#include <cmath>
#include <cstddef>
#include <vector>

#include "gridseq/model.hpp"
#include "gridseq/simulator.hpp"

namespace gridseq {

// A prediction whose magnitude passes this bound marks the channel
// divergent, before NaNs can cascade through normalization statistics.
inline constexpr double kDivergenceBound = 1e6;

struct ObservationWindow {
    std::vector<std::vector<double>> channels;  // n_x rows, each L_seq physical samples
    double start_time = 0.0;
};

struct RolloutResult {
    std::vector<std::vector<double>> predicted;  // n_x rows, each T - L_seq samples
    std::vector<std::uint8_t> divergent;         // per-channel flag
    std::vector<double> step_seconds;
};

inline bool prediction_ok(const std::vector<double>& pred) {
    for (double v : pred)
        if (!std::isfinite(v) || std::abs(v) > kDivergenceBound) return false;
    return true;
}

// One autoregressive step for a bank of channel windows. Channels are
// independent; each output slot is owned by its index, so the batched
// path is bitwise identical to sequential per-channel calls.
inline std::vector<std::vector<double>> step(const ModelParameters& params, const ModelConfig& cfg,
                                             const std::vector<std::vector<double>>& windows) {
    std::vector<std::vector<double>> out(windows.size());
    parallel_for(windows.size(), [&](std::size_t c) {
        WindowSample w;
        w.input = windows[c];
        w.target.assign(cfg.l_pred, 0.0);
        w = normalize(std::move(w));
        out[c] = forward(w, params, cfg);
    });
    return out;
}

// Slide the window: drop the oldest l_pred samples, append the mixed or
// predicted segment. Physical units; re-normalization happens on the
// next forward.
inline std::vector<double> build_next_input(const std::vector<double>& prev_input,
                                            const std::vector<double>& mixed) {
    if (mixed.size() > prev_input.size())
        throw ShapeError("build_next_input: segment longer than window");
    std::vector<double> next(prev_input.begin() + static_cast<std::ptrdiff_t>(mixed.size()),
                             prev_input.end());
    next.insert(next.end(), mixed.begin(), mixed.end());
    return next;
}

// Fully iterative prediction (the epsilon = 0 limit of scheduled
// sampling): floor((T - L_seq) / L_pred) full steps plus one truncated
// partial step when the horizon is not divisible.
inline RolloutResult iterative_predict(const ModelParameters& params, const ModelConfig& cfg,
                                       const ObservationWindow& window, std::size_t horizon) {
    const std::size_t n_x = window.channels.size();
    if (horizon <= cfg.l_seq) throw ConfigError("iterative_predict: horizon must exceed L_seq");
    for (const auto& ch : window.channels)
        if (ch.size() != cfg.l_seq)
            throw ShapeError("iterative_predict: observation window length != L_seq");

    const std::size_t total = horizon - cfg.l_seq;
    const std::size_t n_steps = (total + cfg.l_pred - 1) / cfg.l_pred;  // last step truncated

    RolloutResult result;
    result.predicted.assign(n_x, {});
    result.divergent.assign(n_x, 0);
    for (auto& p : result.predicted) p.reserve(total);

    std::vector<std::vector<double>> current = window.channels;
    std::size_t last_valid_step = 0;
    for (std::size_t j = 0; j < n_steps; ++j) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<std::vector<double>> preds = step(params, cfg, current);
        result.step_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

        const std::size_t keep = std::min(cfg.l_pred, total - j * cfg.l_pred);
        bool any_alive = false;
        for (std::size_t c = 0; c < n_x; ++c) {
            if (result.divergent[c]) {
                // hold the last finite value so the series stays aligned
                const double hold = result.predicted[c].empty() ? current[c].back()
                                                                : result.predicted[c].back();
                result.predicted[c].insert(result.predicted[c].end(), keep, hold);
                continue;
            }
            if (!prediction_ok(preds[c])) {
                result.divergent[c] = 1;
                const double hold = result.predicted[c].empty() ? current[c].back()
                                                                : result.predicted[c].back();
                result.predicted[c].insert(result.predicted[c].end(), keep, hold);
                continue;
            }
            any_alive = true;
            result.predicted[c].insert(result.predicted[c].end(), preds[c].begin(),
                                       preds[c].begin() + static_cast<std::ptrdiff_t>(keep));
            current[c] = build_next_input(current[c], preds[c]);
            last_valid_step = j + 1;
        }
        if (!any_alive)
            throw DivergenceError("rollout: all channels divergent after step " +
                                  std::to_string(last_valid_step));
    }
    return result;
}

// Runs a rollout against a simulated trajectory: observe the first
// L_seq samples, predict the rest.
inline RolloutResult rollout_trajectory(const ModelParameters& params, const ModelConfig& cfg,
                                        const Trajectory& traj) {
    ObservationWindow w;
    w.channels.reserve(traj.n_channels());
    for (const auto& ch : traj.channels)
        w.channels.emplace_back(ch.begin(), ch.begin() + static_cast<std::ptrdiff_t>(cfg.l_seq));
    return iterative_predict(params, cfg, w, traj.steps);
}

// Rollout result as a trajectory record (provenance flag set) so it can
// be exported in the TSATRAJ1 format.
inline Trajectory rollout_as_trajectory(const RolloutResult& r, const Trajectory& source,
                                        const ModelConfig& cfg) {
    Trajectory t;
    t.dt = source.dt;
    t.steps = source.steps;
    t.predicted = true;
    t.stable = source.stable;
    t.oos = source.oos;
    t.channels.assign(source.n_channels(), {});
    for (std::size_t c = 0; c < source.n_channels(); ++c) {
        auto& ch = t.channels[c];
        ch.assign(source.channels[c].begin(),
                  source.channels[c].begin() + static_cast<std::ptrdiff_t>(cfg.l_seq));
        ch.insert(ch.end(), r.predicted[c].begin(), r.predicted[c].end());
    }
    return t;
}

}  // namespace gridseq

#endif  // GRIDSEQ_ROLLOUT_HPP
