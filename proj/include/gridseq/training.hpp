#ifndef GRIDSEQ_TRAINING_HPP
#define GRIDSEQ_TRAINING_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridseq/model.hpp"
#include "gridseq/rollout.hpp"

namespace gridseq {

// ---------------------------------------------------------------------
// Losses. Training losses live in normalized space (targets standardized
// with the input window's mu/sigma) so stable and unstable channels
// contribute at comparable scale; metrics are physical-unit.
// ---------------------------------------------------------------------
inline double teaf_loss(const std::vector<double>& pred, const std::vector<double>& target) {
    if (pred.size() != target.size()) throw ShapeError("teaf_loss: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.size());
}

// ---------------------------------------------------------------------
// Optimizer: Adam with bias correction, cosine-annealed learning rate
// from alpha down to alpha/100, fixed global-norm gradient clip of 1.0.
// Moment buffers exist only for trainable arrays.
// ---------------------------------------------------------------------
struct OptimizerState {
    std::map<std::string, Matrix> m1, m2;
    std::size_t step = 0;
    double alpha = 1e-4;
    std::size_t total_epochs = 1;
    // early stopping
    int patience = 3;
    double min_delta = 1e-6;
    double best_val = std::numeric_limits<double>::infinity();
    int bad_epochs = 0;

    void init(const ModelParameters& params, const FreezeMask& mask) {
        m1.clear();
        m2.clear();
        step = 0;
        for_each_array(const_cast<ModelParameters&>(params),
                       [&](const std::string& name, Matrix& m) {
                           if (mask.is_trainable(name)) {
                               m1[name] = Matrix(m.rows, m.cols);
                               m2[name] = Matrix(m.rows, m.cols);
                           }
                       });
    }

    // epoch is 1-based; anneals over total_epochs.
    double lr_for_epoch(std::size_t epoch) const {
        const double lo = alpha / 100.0;
        const double frac = total_epochs <= 1
                                ? 1.0
                                : static_cast<double>(epoch - 1) /
                                      static_cast<double>(total_epochs - 1);
        return lo + 0.5 * (alpha - lo) * (1.0 + std::cos(M_PI * frac));
    }

    // returns true when training should stop
    bool observe_validation(double val_loss) {
        if (val_loss < best_val - min_delta) {
            best_val = val_loss;
            bad_epochs = 0;
        } else {
            ++bad_epochs;
        }
        return bad_epochs >= patience;
    }
};

// Global-norm clip over trainable gradients; returns the pre-clip norm.
inline double clip_gradients(ModelParameters& grads, const FreezeMask& mask,
                             double max_norm = 1.0) {
    double sq = 0.0;
    for_each_array(grads, [&](const std::string& name, Matrix& g) {
        if (!mask.is_trainable(name)) return;
        for (double v : g.data) sq += v * v;
    });
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        const double scale = max_norm / norm;
        for_each_array(grads, [&](const std::string& name, Matrix& g) {
            if (!mask.is_trainable(name)) return;
            for (double& v : g.data) v *= scale;
        });
    }
    return norm;
}

inline void adam_step(ModelParameters& params, const ModelParameters& grads, OptimizerState& state,
                      double lr, const FreezeMask& mask) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    ++state.step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    auto w_arrays = named_arrays(params);
    auto g_arrays = named_arrays(const_cast<ModelParameters&>(grads));
    for (std::size_t a = 0; a < w_arrays.size(); ++a) {
        const std::string& name = w_arrays[a].first;
        if (!mask.is_trainable(name)) continue;
        Matrix& w = *w_arrays[a].second;
        const Matrix& g = *g_arrays[a].second;
        Matrix& m1 = state.m1.at(name);
        Matrix& m2 = state.m2.at(name);
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double gi = g.data[i];
            m1.data[i] = beta1 * m1.data[i] + (1.0 - beta1) * gi;
            m2.data[i] = beta2 * m2.data[i] + (1.0 - beta2) * gi * gi;
            const double mhat = m1.data[i] / bc1;
            const double vhat = m2.data[i] / bc2;
            w.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

// ---------------------------------------------------------------------
// JSON-lines training log: one record per epoch.
// ---------------------------------------------------------------------
struct TrainLogger {
    std::ofstream os;

    explicit TrainLogger(const std::string& path = "") {
        if (!path.empty()) {
            os.open(path, std::ios::app);
            if (!os) throw IoError("cannot open training log: " + path);
        }
    }
    void log(const std::string& stage, std::size_t epoch, double epsilon, double train_loss,
             double val_loss, double lr, double wall_seconds) {
        if (!os.is_open()) return;
        nlohmann::json j{{"stage", stage},         {"epoch", epoch},
                         {"epsilon", epsilon},     {"train_loss", train_loss},
                         {"val_loss", val_loss},   {"lr", lr},
                         {"wall_seconds", wall_seconds}};
        os << j.dump() << "\n";
        os.flush();
    }
};

// ---------------------------------------------------------------------
// Scheduled-sampling rate, Eq-style linear decay.
// ---------------------------------------------------------------------
inline double sampling_rate(std::size_t k, std::size_t e_start, std::size_t e_max) {
    if (e_max == e_start) throw ConfigError("sampling_rate: E_max must differ from E_start");
    if (k < e_start) return 1.0;
    return 1.0 - static_cast<double>(k - e_start) / static_cast<double>(e_max - e_start);
}

// Whole-segment Bernoulli draw: ground truth with probability eps_k,
// the model's own prediction otherwise.
inline std::pair<std::vector<double>, bool> mix_segment(const std::vector<double>& truth,
                                                        const std::vector<double>& pred,
                                                        double eps_k, Rng& rng) {
    if (eps_k < 0.0 || eps_k > 1.0) throw ConfigError("mix_segment: eps_k must be in [0,1]");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const bool take_truth = eps_k >= 1.0 || (eps_k > 0.0 && unit(rng) < eps_k);
    return {take_truth ? truth : pred, take_truth};
}

// ---------------------------------------------------------------------
// Window corpus shared by TeaF and the surrogate pre-training.
// ---------------------------------------------------------------------
struct TrainingWindows {
    std::vector<WindowSample> windows;  // normalized
};

inline TrainingWindows build_windows(const std::vector<Trajectory>& trajs, const ModelConfig& cfg) {
    TrainingWindows out;
    for (std::size_t k = 0; k < trajs.size(); ++k) {
        auto series = decompose_channels(trajs[k].channels, k);
        for (const auto& s : series) {
            auto samples = segment(s, cfg.l_seq, cfg.l_pred);
            for (auto& w : samples) out.windows.push_back(normalize(std::move(w)));
        }
    }
    return out;
}

// Normalized-space TeaF loss plus gradient for one window.
inline double window_loss_and_grad(const WindowSample& w, const ModelParameters& params,
                                   const ModelConfig& cfg, ModelParameters* grads) {
    PatchedSample patched = patchify(w, cfg.patch_config());
    ForwardCache cache;
    std::vector<double> pred = forward_patches(patched, params, cfg, grads ? &cache : nullptr);
    std::vector<double> t_norm(w.target.size());
    for (std::size_t i = 0; i < t_norm.size(); ++i) t_norm[i] = (w.target[i] - w.mu) / w.sigma;
    const double loss = teaf_loss(pred, t_norm);
    if (grads) {
        std::vector<double> d_pred(pred.size());
        for (std::size_t i = 0; i < pred.size(); ++i)
            d_pred[i] = 2.0 * (pred[i] - t_norm[i]) / static_cast<double>(pred.size());
        backward(d_pred, cache, params, cfg, *grads);
    }
    return loss;
}

inline double mean_window_loss(const std::vector<WindowSample>& windows,
                               const std::vector<std::size_t>& subset,
                               const ModelParameters& params, const ModelConfig& cfg) {
    if (subset.empty()) return 0.0;
    std::vector<double> losses(subset.size(), 0.0);
    parallel_for(subset.size(), [&](std::size_t i) {
        losses[i] = window_loss_and_grad(windows[subset[i]], params, cfg, nullptr);
    });
    double s = 0.0;
    for (double l : losses) s += l;  // fixed-order reduction
    return s / static_cast<double>(subset.size());
}

// ---------------------------------------------------------------------
// TeaF: teacher-forcing fine-tuning with post-hoc hard-case mining.
// ---------------------------------------------------------------------
struct TeaFConfig {
    std::size_t epochs = 3;
    double alpha = 1e-3;
    std::size_t batch = 32;
    std::size_t hard_case_count = 16;       // K
    std::size_t max_windows_per_epoch = 0;  // 0 = all (subsampling keeps desk runs fast)
    std::size_t max_val_windows = 2000;
    std::size_t mining_max_trajectories = 0;  // 0 = every training trajectory

    void validate() const {
        if (epochs == 0 || alpha <= 0.0 || batch == 0 || hard_case_count == 0)
            throw ConfigError("TeaFConfig: all fields must be positive");
    }
};

struct HardCase {
    std::size_t trajectory_index;
    double rollout_mse;
};

struct HardCaseSet {
    std::vector<HardCase> cases;  // sorted by error, descending
};

// Physical-unit rollout MSE of one trajectory (mean over channels and
// predicted steps).
inline double trajectory_rollout_mse(const ModelParameters& params, const ModelConfig& cfg,
                                     const Trajectory& traj) {
    RolloutResult r = rollout_trajectory(params, cfg, traj);
    double sq = 0.0;
    std::size_t count = 0;
    for (std::size_t c = 0; c < traj.n_channels(); ++c)
        for (std::size_t t = 0; t < r.predicted[c].size(); ++t) {
            const double d = r.predicted[c][t] - traj.channels[c][cfg.l_seq + t];
            sq += d * d;
            ++count;
        }
    return count == 0 ? 0.0 : sq / static_cast<double>(count);
}

// Pure function of (model, trajectories): repeated calls agree.
inline HardCaseSet mine_hard_cases(const ModelParameters& params, const ModelConfig& cfg,
                                   const std::vector<Trajectory>& trajs, std::size_t k,
                                   std::size_t max_trajectories = 0) {
    std::size_t n = trajs.size();
    if (max_trajectories > 0) n = std::min(n, max_trajectories);
    std::vector<double> errors(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        errors[i] = trajectory_rollout_mse(params, cfg, trajs[i]);
    });
    HardCaseSet set;
    set.cases.reserve(n);
    for (std::size_t i = 0; i < n; ++i) set.cases.push_back({i, errors[i]});
    std::stable_sort(set.cases.begin(), set.cases.end(),
                     [](const HardCase& a, const HardCase& b) { return a.rollout_mse > b.rollout_mse; });
    if (set.cases.size() > k) set.cases.resize(k);
    return set;
}

inline HardCaseSet teaf_train(ModelParameters& params, const FreezeMask& mask,
                              const ModelConfig& cfg, const std::vector<Trajectory>& train,
                              const std::vector<Trajectory>& val, const TeaFConfig& tcfg,
                              std::uint64_t seed, TrainLogger* logger = nullptr) {
    tcfg.validate();
    if (train.empty() || val.empty()) throw ConfigError("teaf_train: datasets must be nonempty");

    TrainingWindows tw = build_windows(train, cfg);
    TrainingWindows vw = build_windows(val, cfg);
    if (tw.windows.empty() || vw.windows.empty())
        throw ConfigError("teaf_train: trajectories too short for the window geometry");

    std::vector<std::size_t> val_idx(vw.windows.size());
    std::iota(val_idx.begin(), val_idx.end(), 0);
    if (tcfg.max_val_windows > 0 && val_idx.size() > tcfg.max_val_windows) {
        Rng vr = make_rng(seed, 0x7a1);
        std::shuffle(val_idx.begin(), val_idx.end(), vr);
        val_idx.resize(tcfg.max_val_windows);
    }

    OptimizerState opt;
    opt.alpha = tcfg.alpha;
    opt.total_epochs = tcfg.epochs;
    opt.init(params, mask);

    for (std::size_t epoch = 1; epoch <= tcfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        Rng rng = make_rng(seed, epoch);
        std::vector<std::size_t> order(tw.windows.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        if (tcfg.max_windows_per_epoch > 0 && order.size() > tcfg.max_windows_per_epoch)
            order.resize(tcfg.max_windows_per_epoch);

        const double lr = opt.lr_for_epoch(epoch);
        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += tcfg.batch) {
            const std::size_t stop = std::min(order.size(), start + tcfg.batch);
            ModelParameters grads = zero_like(params);
            double batch_loss = 0.0;
            for (std::size_t i = start; i < stop; ++i)
                batch_loss += window_loss_and_grad(tw.windows[order[i]], params, cfg, &grads);
            const double inv = 1.0 / static_cast<double>(stop - start);
            for_each_array(grads, [&](const std::string&, Matrix& g) {
                for (double& v : g.data) v *= inv;
            });
            if (!std::isfinite(batch_loss))
                throw DivergenceError("teaf_train: non-finite loss at epoch " +
                                      std::to_string(epoch) + " step " + std::to_string(start));
            apply_freeze(grads, mask);
            clip_gradients(grads, mask);
            adam_step(params, grads, opt, lr, mask);
            epoch_loss += batch_loss;
            seen += stop - start;
        }
        epoch_loss /= static_cast<double>(std::max<std::size_t>(seen, 1));

        const double val_loss = mean_window_loss(vw.windows, val_idx, params, cfg);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (logger) logger->log("teaf", epoch, 1.0, epoch_loss, val_loss, lr, wall);
        if (opt.observe_validation(val_loss)) break;
    }

    return mine_hard_cases(params, cfg, train, tcfg.hard_case_count,
                           tcfg.mining_max_trajectories);
}

// ---------------------------------------------------------------------
// SchS: scheduled-sampling fine-tuning over the hard-case trajectories.
// ---------------------------------------------------------------------
struct SchSConfig {
    std::size_t e_max = 6;
    std::size_t e_start = 2;
    double alpha = 5e-4;
    double epsilon_override = -1.0;  // >= 0 forces a fixed sampling rate (tests)

    void validate() const {
        if (e_start >= e_max) throw ConfigError("SchSConfig: need 0 <= E_start < E_max");
        if (alpha < 0.0) throw ConfigError("SchSConfig: alpha must be nonnegative");
    }
};

// Observer for tests: (trajectory index, channel, step, input window,
// physical prediction).
using SchSObserver = std::function<void(std::size_t, std::size_t, std::size_t,
                                        const std::vector<double>&, const std::vector<double>&)>;

inline void schs_train(ModelParameters& params, const FreezeMask& mask, const ModelConfig& cfg,
                       const std::vector<Trajectory>& hard, const SchSConfig& scfg,
                       std::uint64_t seed, TrainLogger* logger = nullptr,
                       const SchSObserver& observer = nullptr) {
    scfg.validate();
    if (hard.empty()) throw ConfigError("schs_train: hard-case set must be nonempty");

    OptimizerState opt;
    opt.alpha = scfg.alpha;
    opt.total_epochs = scfg.e_max;
    opt.init(params, mask);

    for (std::size_t k = 1; k <= scfg.e_max; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        const double eps_k = scfg.epsilon_override >= 0.0
                                 ? scfg.epsilon_override
                                 : sampling_rate(k, scfg.e_start, scfg.e_max);
        const double lr = opt.lr_for_epoch(k);
        double epoch_loss = 0.0;

        for (std::size_t ti = 0; ti < hard.size(); ++ti) {
            const Trajectory& traj = hard[ti];
            const std::size_t n_x = traj.n_channels();
            const std::size_t total = traj.steps - cfg.l_seq;
            const std::size_t n_steps = total / cfg.l_pred;  // floor, per the algorithm
            if (n_steps == 0) continue;
            const double denom =
                static_cast<double>(n_x) * static_cast<double>(n_steps * cfg.l_pred);

            ModelParameters grads = zero_like(params);
            double traj_loss = 0.0;
            // per-channel RNG streams derive from (seed, epoch, traj,
            // channel) so the result is independent of channel order
            for (std::size_t c = 0; c < n_x; ++c) {
                Rng rng = make_rng(seed, (k << 20) ^ (ti << 8) ^ c);
                std::vector<double> window(traj.channels[c].begin(),
                                           traj.channels[c].begin() +
                                               static_cast<std::ptrdiff_t>(cfg.l_seq));
                for (std::size_t j = 0; j < n_steps; ++j) {
                    WindowSample w;
                    w.input = window;
                    w.target.assign(
                        traj.channels[c].begin() +
                            static_cast<std::ptrdiff_t>(cfg.l_seq + j * cfg.l_pred),
                        traj.channels[c].begin() +
                            static_cast<std::ptrdiff_t>(cfg.l_seq + (j + 1) * cfg.l_pred));
                    w = normalize(std::move(w));  // fresh stats every rollout step

                    PatchedSample patched = patchify(w, cfg.patch_config());
                    ForwardCache cache;
                    std::vector<double> pred =
                        forward_patches(patched, params, cfg, &cache);
                    std::vector<double> t_norm(w.target.size());
                    for (std::size_t i = 0; i < t_norm.size(); ++i)
                        t_norm[i] = (w.target[i] - w.mu) / w.sigma;

                    double step_sq = 0.0;
                    std::vector<double> d_pred(pred.size());
                    for (std::size_t i = 0; i < pred.size(); ++i) {
                        const double d = pred[i] - t_norm[i];
                        step_sq += d * d;
                        d_pred[i] = 2.0 * d / denom;
                    }
                    traj_loss += step_sq / denom;
                    backward(d_pred, cache, params, cfg, grads);

                    // fed-back predictions are constants: no cross-step backprop
                    std::vector<double> pred_phys = denormalize(pred, w.mu, w.sigma);
                    if (observer) observer(ti, c, j, window, pred_phys);
                    auto [mixed, took_truth] = mix_segment(w.target, pred_phys, eps_k, rng);
                    (void)took_truth;
                    window = build_next_input(window, mixed);
                }
            }
            if (!std::isfinite(traj_loss))
                throw DivergenceError("schs_train: non-finite loss at epoch " +
                                      std::to_string(k) + " trajectory " + std::to_string(ti));
            apply_freeze(grads, mask);
            clip_gradients(grads, mask);
            if (scfg.alpha > 0.0) adam_step(params, grads, opt, lr, mask);
            epoch_loss += traj_loss;
        }
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (logger)
            logger->log("schs", k, eps_k, epoch_loss / static_cast<double>(hard.size()), 0.0, lr,
                        wall);
    }
}

// ---------------------------------------------------------------------
// Surrogate pre-training: trains every array (no freeze) on a synthetic
// multi-family corpus, standing in for the inherited language-model
// pre-training. The result is frozen downstream.
// ---------------------------------------------------------------------
struct SurrogateCorpusSpec {
    std::size_t n_series = 256;
    std::size_t series_len = 160;
    std::size_t epochs = 8;
    double alpha = 1e-3;
    std::size_t batch = 32;
    std::size_t max_windows_per_epoch = 4000;
};

inline std::vector<double> synth_series(Rng& rng, std::size_t len) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> family_dist(0, 3);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> s(len, 0.0);
    const int family = family_dist(rng);
    switch (family) {
        case 0: {  // damped / undamped sinusoid mixture
            const int terms = 1 + static_cast<int>(unit(rng) * 3.0);
            for (int q = 0; q < terms; ++q) {
                const double a = 0.2 + 2.0 * unit(rng);
                const double w = 0.05 + 0.6 * unit(rng);
                const double phase = 2.0 * M_PI * unit(rng);
                const double damp = unit(rng) < 0.5 ? 0.0 : 0.02 * unit(rng);
                for (std::size_t t = 0; t < len; ++t)
                    s[t] += a * std::exp(-damp * static_cast<double>(t)) *
                            std::sin(w * static_cast<double>(t) + phase);
            }
            break;
        }
        case 1: {  // saturating ramp
            const double a = 0.5 + 3.0 * unit(rng);
            const double b = 0.01 + 0.1 * unit(rng);
            const double t0 = unit(rng) * static_cast<double>(len);
            const double c = 2.0 * unit(rng) - 1.0;
            for (std::size_t t = 0; t < len; ++t)
                s[t] = a * std::tanh(b * (static_cast<double>(t) - t0)) + c;
            break;
        }
        case 2: {  // chirp
            const double a = 0.5 + 2.0 * unit(rng);
            const double w0 = 0.02 + 0.2 * unit(rng);
            const double q = 0.0005 + 0.004 * unit(rng);
            for (std::size_t t = 0; t < len; ++t) {
                const double tt = static_cast<double>(t);
                s[t] = a * std::sin(w0 * tt + 0.5 * q * tt * tt);
            }
            break;
        }
        default: {  // piecewise-switched AR(2)
            const std::size_t sw = len / 4 + static_cast<std::size_t>(unit(rng) * len / 2);
            double c1 = 1.5 * unit(rng), c2 = -0.9 * unit(rng);
            double prev1 = gauss(rng) * 0.1, prev2 = gauss(rng) * 0.1;
            for (std::size_t t = 0; t < len; ++t) {
                if (t == sw) {
                    c1 = 1.5 * unit(rng);
                    c2 = -0.9 * unit(rng);
                }
                const double x = c1 * prev1 + c2 * prev2 + 0.05 * gauss(rng);
                s[t] = x;
                prev2 = prev1;
                prev1 = x;
            }
            break;
        }
    }
    return s;
}

inline std::vector<Trajectory> synth_corpus(const SurrogateCorpusSpec& spec, std::uint64_t seed) {
    std::vector<Trajectory> corpus(spec.n_series);
    parallel_for(spec.n_series, [&](std::size_t i) {
        Rng rng = make_rng(seed, 0x5e1e5 + i);
        Trajectory t;
        t.dt = 1.0;
        t.steps = spec.series_len;
        t.channels.push_back(synth_series(rng, spec.series_len));
        corpus[i] = std::move(t);
    });
    return corpus;
}

inline ModelParameters surrogate_pretrain(const ModelConfig& cfg, const SurrogateCorpusSpec& spec,
                                          std::uint64_t seed, TrainLogger* logger = nullptr,
                                          double* holdout_loss_init = nullptr,
                                          double* holdout_loss_final = nullptr) {
    ModelParameters params = init_parameters(cfg, seed);
    FreezeMask mask = all_trainable_mask(params);

    std::vector<Trajectory> corpus = synth_corpus(spec, seed);
    const std::size_t holdout = std::max<std::size_t>(corpus.size() / 10, 1);
    std::vector<Trajectory> val(corpus.end() - static_cast<std::ptrdiff_t>(holdout), corpus.end());
    corpus.resize(corpus.size() - holdout);

    TeaFConfig tcfg;
    tcfg.epochs = spec.epochs;
    tcfg.alpha = spec.alpha;
    tcfg.batch = spec.batch;
    tcfg.hard_case_count = 1;
    tcfg.max_windows_per_epoch = spec.max_windows_per_epoch;
    tcfg.mining_max_trajectories = 1;  // mining is irrelevant here; keep it cheap

    if (holdout_loss_init) {
        TrainingWindows vw = build_windows(val, cfg);
        std::vector<std::size_t> idx(vw.windows.size());
        std::iota(idx.begin(), idx.end(), 0);
        *holdout_loss_init = mean_window_loss(vw.windows, idx, params, cfg);
    }
    teaf_train(params, mask, cfg, corpus, val, tcfg, seed, logger);
    if (holdout_loss_final) {
        TrainingWindows vw = build_windows(val, cfg);
        std::vector<std::size_t> idx(vw.windows.size());
        std::iota(idx.begin(), idx.end(), 0);
        *holdout_loss_final = mean_window_loss(vw.windows, idx, params, cfg);
    }
    return params;
}

}  // namespace gridseq

#endif  // GRIDSEQ_TRAINING_HPP
