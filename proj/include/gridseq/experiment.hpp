#ifndef GRIDSEQ_EXPERIMENT_HPP
#define GRIDSEQ_EXPERIMENT_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridseq/checkpoint.hpp"
#include "gridseq/evaluation.hpp"
#include "gridseq/simulator.hpp"
#include "gridseq/training.hpp"
#include "gridseq/trajio.hpp"

namespace gridseq {

struct PipelineGeometry {
    std::size_t l_seq = 65;
    std::size_t l_pred = 5;
    std::size_t patch_len = 16;
    std::size_t stride = 8;
};

struct ExperimentConfig {
    std::string system_spec = "data/sys3.json";
    std::string target_system_spec;  // cross-system experiments
    std::size_t n_scenarios = 300;
    std::size_t target_scenarios = 60;
    double split_train = 0.8, split_val = 0.1, split_test = 0.1;
    DatasetOptions dataset;
    std::string profile = "desk";
    PipelineGeometry pipe;
    TeaFConfig teaf;
    SchSConfig schs;
    SurrogateCorpusSpec pretrain;
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    void validate() const {
        if (std::abs(split_train + split_val + split_test - 1.0) > 1e-9)
            throw ConfigError("experiment config: split fractions must sum to 1");
        if (!std::filesystem::exists(system_spec))
            throw ConfigError("experiment config: system spec not found: " + system_spec);
        if (!target_system_spec.empty() && !std::filesystem::exists(target_system_spec))
            throw ConfigError("experiment config: target system spec not found: " +
                              target_system_spec);
    }
};

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open experiment config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("experiment config parse error: " + std::string(e.what()));
    }
    ExperimentConfig cfg;
    auto get = [&](const char* key, auto& target) {
        if (j.contains(key)) target = j.at(key).template get<std::decay_t<decltype(target)>>();
    };
    get("system_spec", cfg.system_spec);
    get("target_system_spec", cfg.target_system_spec);
    get("n_scenarios", cfg.n_scenarios);
    get("target_scenarios", cfg.target_scenarios);
    if (j.contains("split")) {
        auto s = j.at("split").get<std::vector<double>>();
        if (s.size() != 3) throw ConfigError("experiment config: split needs 3 fractions");
        cfg.split_train = s[0];
        cfg.split_val = s[1];
        cfg.split_test = s[2];
    }
    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        auto getd = [&](const char* key, auto& target) {
            if (d.contains(key)) target = d.at(key).template get<std::decay_t<decltype(target)>>();
        };
        getd("horizon", cfg.dataset.sim.horizon);
        getd("dt", cfg.dataset.sim.dt);
        getd("substeps", cfg.dataset.sim.substeps);
        getd("oos_threshold", cfg.dataset.sim.oos_threshold);
        getd("load_min", cfg.dataset.load_min);
        getd("load_max", cfg.dataset.load_max);
        getd("t_fault", cfg.dataset.t_fault);
        getd("max_clear", cfg.dataset.max_clear);
        getd("contingency_order", cfg.dataset.contingency_order);
    }
    get("profile", cfg.profile);
    if (j.contains("pipeline")) {
        const auto& p = j.at("pipeline");
        auto getp = [&](const char* key, std::size_t& target) {
            if (p.contains(key)) target = p.at(key).get<std::size_t>();
        };
        getp("l_seq", cfg.pipe.l_seq);
        getp("l_pred", cfg.pipe.l_pred);
        getp("patch_len", cfg.pipe.patch_len);
        getp("stride", cfg.pipe.stride);
    }
    if (j.contains("teaf")) {
        const auto& t = j.at("teaf");
        if (t.contains("epochs")) cfg.teaf.epochs = t.at("epochs").get<std::size_t>();
        if (t.contains("alpha")) cfg.teaf.alpha = t.at("alpha").get<double>();
        if (t.contains("batch")) cfg.teaf.batch = t.at("batch").get<std::size_t>();
        if (t.contains("K")) cfg.teaf.hard_case_count = t.at("K").get<std::size_t>();
        if (t.contains("max_windows"))
            cfg.teaf.max_windows_per_epoch = t.at("max_windows").get<std::size_t>();
        if (t.contains("max_val_windows"))
            cfg.teaf.max_val_windows = t.at("max_val_windows").get<std::size_t>();
        if (t.contains("mining_max"))
            cfg.teaf.mining_max_trajectories = t.at("mining_max").get<std::size_t>();
    }
    if (j.contains("schs")) {
        const auto& s = j.at("schs");
        if (s.contains("e_max")) cfg.schs.e_max = s.at("e_max").get<std::size_t>();
        if (s.contains("e_start")) cfg.schs.e_start = s.at("e_start").get<std::size_t>();
        if (s.contains("alpha")) cfg.schs.alpha = s.at("alpha").get<double>();
    }
    if (j.contains("pretrain")) {
        const auto& p = j.at("pretrain");
        if (p.contains("n_series")) cfg.pretrain.n_series = p.at("n_series").get<std::size_t>();
        if (p.contains("series_len"))
            cfg.pretrain.series_len = p.at("series_len").get<std::size_t>();
        if (p.contains("epochs")) cfg.pretrain.epochs = p.at("epochs").get<std::size_t>();
        if (p.contains("alpha")) cfg.pretrain.alpha = p.at("alpha").get<double>();
        if (p.contains("batch")) cfg.pretrain.batch = p.at("batch").get<std::size_t>();
        if (p.contains("max_windows"))
            cfg.pretrain.max_windows_per_epoch = p.at("max_windows").get<std::size_t>();
    }
    get("seed", cfg.seed);
    get("out_dir", cfg.out_dir);
    return cfg;
}

inline ModelConfig model_config_for(const ExperimentConfig& cfg) {
    ModelConfig m;
    if (cfg.profile == "desk")
        m = desk_config();
    else if (cfg.profile == "full")
        m = full_config();
    else if (cfg.profile == "enc")
        m = enc_baseline_config();
    else
        throw ConfigError("unknown model profile: " + cfg.profile);
    m.l_seq = cfg.pipe.l_seq;
    m.l_pred = cfg.pipe.l_pred;
    m.patch_len = cfg.pipe.patch_len;
    m.stride = cfg.pipe.stride;
    m.validate();
    return m;
}

// ---------------------------------------------------------------------
// Dataset generation and splits.
// ---------------------------------------------------------------------
struct DatasetSplits {
    std::vector<Trajectory> train, val, test;
};

inline DatasetSplits split_dataset(std::vector<Trajectory> trajs, double f_train, double f_val,
                                   double f_test, std::uint64_t seed) {
    (void)f_train;
    Rng rng = make_rng(seed, 0x5117);
    std::vector<std::size_t> order(trajs.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n = trajs.size();
    const std::size_t n_val = static_cast<std::size_t>(std::floor(f_val * static_cast<double>(n)));
    const std::size_t n_test =
        static_cast<std::size_t>(std::floor(f_test * static_cast<double>(n)));
    DatasetSplits out;
    for (std::size_t i = 0; i < n; ++i) {
        Trajectory& t = trajs[order[i]];
        if (i < n - n_val - n_test)
            out.train.push_back(std::move(t));
        else if (i < n - n_test)
            out.val.push_back(std::move(t));
        else
            out.test.push_back(std::move(t));
    }
    return out;
}

inline nlohmann::json split_manifest(const DatasetSplits& s, std::uint64_t seed) {
    auto balance = [](const std::vector<Trajectory>& v) {
        std::size_t stable = 0;
        for (const auto& t : v) stable += t.stable ? 1 : 0;
        return nlohmann::json{{"count", v.size()},
                              {"stable", stable},
                              {"unstable", v.size() - stable}};
    };
    return nlohmann::json{{"seed", seed},
                          {"train", balance(s.train)},
                          {"val", balance(s.val)},
                          {"test", balance(s.test)}};
}

inline DatasetSplits generate_splits(const PowerSystemSpec& spec, const ExperimentConfig& cfg,
                                     std::uint64_t seed, std::size_t n_scenarios) {
    Dataset ds = generate_dataset(spec, n_scenarios, seed, cfg.dataset);
    return split_dataset(std::move(ds.trajectories), cfg.split_train, cfg.split_val,
                         cfg.split_test, seed);
}

// ---------------------------------------------------------------------
// Evaluation: batched rollout over a test set, Eq-style metrics.
// ---------------------------------------------------------------------
struct EvaluationResult {
    MetricsReport report;
    std::vector<RolloutResult> rollouts;
};

inline EvaluationResult evaluate_model(const ModelParameters& params, const ModelConfig& mcfg,
                                       const std::vector<Trajectory>& test,
                                       const std::string& fingerprint = "") {
    EvaluationResult out;
    out.rollouts.resize(test.size());
    parallel_for(test.size(), [&](std::size_t i) {
        out.rollouts[i] = rollout_trajectory(params, mcfg, test[i]);
    });
    out.report = compute_metrics(out.rollouts, test, mcfg.l_seq, fingerprint);
    return out;
}

inline void write_per_trajectory_errors(const EvaluationResult& eval,
                                        const std::vector<Trajectory>& test, std::size_t l_seq,
                                        const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << "trajectory,label,MAE,MSE\n";
    os.precision(17);
    for (std::size_t i = 0; i < test.size(); ++i) {
        double abs_sum = 0.0, sq_sum = 0.0;
        std::size_t count = 0;
        for (std::size_t c = 0; c < test[i].n_channels(); ++c)
            for (std::size_t t = 0; t < eval.rollouts[i].predicted[c].size(); ++t) {
                const double d =
                    eval.rollouts[i].predicted[c][t] - test[i].channels[c][l_seq + t];
                abs_sum += std::abs(d);
                sq_sum += d * d;
                ++count;
            }
        const double inv = count > 0 ? 1.0 / static_cast<double>(count) : 0.0;
        os << i << ',' << (test[i].stable ? "stable" : "unstable") << ',' << abs_sum * inv << ','
           << sq_sum * inv << "\n";
    }
}

// ---------------------------------------------------------------------
// Training pipelines.
// ---------------------------------------------------------------------
struct TrainedModel {
    ModelParameters params;
    FreezeMask freeze;
    ModelConfig config;
    HardCaseSet hard_cases;
};

// Surrogate-pretrain the backbone, freeze the T-blocks, then re-init
// the task head/embedding for the downstream geometry.
inline TrainedModel make_pretrained(const ExperimentConfig& cfg, std::uint64_t seed,
                                    TrainLogger* logger = nullptr) {
    TrainedModel tm;
    tm.config = model_config_for(cfg);
    tm.params = surrogate_pretrain(tm.config, cfg.pretrain, seed, logger);
    tm.freeze = default_freeze_mask(tm.params);
    return tm;
}

inline void run_teaf_stage(TrainedModel& tm, const DatasetSplits& data,
                           const ExperimentConfig& cfg, std::uint64_t seed,
                           TrainLogger* logger = nullptr) {
    tm.hard_cases = teaf_train(tm.params, tm.freeze, tm.config, data.train, data.val, cfg.teaf,
                               seed, logger);
}

inline void run_schs_stage(TrainedModel& tm, const DatasetSplits& data,
                           const ExperimentConfig& cfg, std::uint64_t seed,
                           TrainLogger* logger = nullptr) {
    std::vector<Trajectory> hard;
    for (const HardCase& h : tm.hard_cases.cases) hard.push_back(data.train[h.trajectory_index]);
    if (hard.empty()) throw ConfigError("run_schs_stage: no hard cases mined");
    schs_train(tm.params, tm.freeze, tm.config, hard, cfg.schs, seed, logger);
}

// Full pipeline with stage switches; used directly by the ablation grid.
inline TrainedModel train_pipeline(const ExperimentConfig& cfg, const DatasetSplits& data,
                                   std::uint64_t seed, bool do_teaf, bool do_schs,
                                   const TrainedModel* pretrained = nullptr,
                                   TrainLogger* logger = nullptr) {
    TrainedModel tm = pretrained ? *pretrained : make_pretrained(cfg, seed, logger);
    if (do_teaf) {
        run_teaf_stage(tm, data, cfg, seed, logger);
    } else {
        // hard cases mined from the un-fine-tuned model
        tm.hard_cases = mine_hard_cases(tm.params, tm.config, data.train,
                                        cfg.teaf.hard_case_count,
                                        cfg.teaf.mining_max_trajectories);
    }
    if (do_schs) run_schs_stage(tm, data, cfg, seed, logger);
    return tm;
}

// ---------------------------------------------------------------------
// Ablation grid: {full, w/o TeaF, w/o SchS, w/o patch}.
// ---------------------------------------------------------------------
struct AblationRow {
    std::string variant;
    std::uint64_t seed;
    double mae_h;
    double mse_h;
};

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::vector<AblationRow> run_ablation(const ExperimentConfig& cfg,
                                             const std::vector<std::uint64_t>& seeds) {
    const PowerSystemSpec spec = load_system_spec(cfg.system_spec);
    std::vector<AblationRow> rows;
    for (std::uint64_t seed : seeds) {
        DatasetSplits data = generate_splits(spec, cfg, seed, cfg.n_scenarios);

        TrainedModel base = make_pretrained(cfg, seed);
        struct Variant {
            const char* name;
            bool teaf, schs, patch;
        };
        const Variant variants[] = {{"full", true, true, true},
                                    {"wo_teaf", false, true, true},
                                    {"wo_schs", true, false, true},
                                    {"wo_patch", true, true, false}};
        for (const Variant& v : variants) {
            ExperimentConfig vc = cfg;
            const TrainedModel* pre = &base;
            if (!v.patch) {
                vc.pipe.patch_len = 1;
                vc.pipe.stride = 1;
                pre = nullptr;  // geometry differs; pretrain its own backbone
            }
            TrainedModel tm = train_pipeline(vc, data, seed, v.teaf, v.schs, pre);
            EvaluationResult eval = evaluate_model(tm.params, tm.config, data.test);
            const auto& h = eval.report.categories.at("H");
            rows.push_back({v.name, seed, h.mae, h.mse});
        }
    }
    return rows;
}

// ---------------------------------------------------------------------
// Few-shot scalability curve on the target system.
// ---------------------------------------------------------------------
struct FewShotPoint {
    double fraction;
    std::uint64_t seed;
    double mae_h;
    double mse_h;
};

inline std::vector<Trajectory> subsample_trajectories(const std::vector<Trajectory>& v, double f,
                                                      std::uint64_t seed) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(seed, 0xf5);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t keep =
        static_cast<std::size_t>(std::floor(f * static_cast<double>(v.size())));
    std::vector<Trajectory> out;
    for (std::size_t i = 0; i < keep; ++i) out.push_back(v[order[i]]);
    return out;
}

inline std::vector<FewShotPoint> run_fewshot(const ExperimentConfig& cfg,
                                             const TrainedModel& source,
                                             std::vector<double> fractions,
                                             const std::vector<std::uint64_t>& seeds) {
    if (cfg.target_system_spec.empty())
        throw ConfigError("run_fewshot: target_system_spec not configured");
    const PowerSystemSpec target = load_system_spec(cfg.target_system_spec);
    std::sort(fractions.begin(), fractions.end());
    std::vector<FewShotPoint> points;
    for (std::uint64_t seed : seeds) {
        DatasetSplits data = generate_splits(target, cfg, seed, cfg.target_scenarios);
        for (double f : fractions) {
            TrainedModel tm = source;
            std::vector<Trajectory> subset = subsample_trajectories(data.train, f, seed);
            if (!subset.empty()) {
                DatasetSplits sub;
                sub.train = subset;
                sub.val = data.val;
                sub.test = data.test;
                run_teaf_stage(tm, sub, cfg, seed);
                run_schs_stage(tm, sub, cfg, seed);
            }
            EvaluationResult eval = evaluate_model(tm.params, tm.config, data.test);
            const auto& h = eval.report.categories.at("H");
            points.push_back({f, seed, h.mae, h.mse});
        }
    }
    return points;
}

// ---------------------------------------------------------------------
// Diagnostics bundle over a dataset's windows.
// ---------------------------------------------------------------------
struct DiagnosticsSummary {
    double mean_feature_stability = 0.0;
    double mean_co_direction = 0.0;
    double mean_alignment_bound = 0.0;
    double mean_self_alignment = 0.0;
    double mean_cross_alignment = 0.0;
    std::size_t traces = 0;
};

inline DiagnosticsSummary diagnose_model(const ModelParameters& params, const ModelConfig& mcfg,
                                         const std::vector<Trajectory>& trajs,
                                         double co_direction_threshold = 0.8,
                                         std::size_t max_windows = 200,
                                         const std::string& feature_csv_path = "") {
    TrainingWindows tw = build_windows(trajs, mcfg);
    std::vector<std::size_t> idx(tw.windows.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng = make_rng(0xd1a9);
    std::shuffle(idx.begin(), idx.end(), rng);
    if (idx.size() > max_windows) idx.resize(max_windows);

    std::ofstream features;
    if (!feature_csv_path.empty()) {
        features.open(feature_csv_path);
        if (!features) throw IoError("cannot open for writing: " + feature_csv_path);
        features << "window,channel,patch";
        for (std::size_t d = 0; d < mcfg.dim; ++d) features << ",f" << d;
        features << "\n";
        features.precision(10);
    }

    DiagnosticsSummary sum;
    for (std::size_t i : idx) {
        const WindowSample& w = tw.windows[i];
        ForwardTrace trace;
        forward(w, params, mcfg, &trace);
        sum.mean_feature_stability += feature_stability(trace).mean_cosine;
        if (trace.hidden.back().rows >= 2)
            sum.mean_co_direction += co_direction_ratio(trace, co_direction_threshold);
        AlignmentTerms at =
            alignment_terms(trace.mean_attention.back(), trace.hidden[trace.hidden.size() - 2]);
        sum.mean_alignment_bound += at.bound;
        double self_sum = 0.0;
        for (double s : at.self_alignment) self_sum += s;
        sum.mean_self_alignment += self_sum;
        double cross_sum = 0.0;
        for (double c : at.cross_alignment.data) cross_sum += c;
        sum.mean_cross_alignment += cross_sum;
        ++sum.traces;
        if (features.is_open()) {
            const Matrix& z = trace.hidden.back();
            for (std::size_t p = 0; p < z.rows; ++p) {
                features << i << ',' << w.channel_id << ',' << p;
                for (std::size_t d = 0; d < z.cols; ++d) features << ',' << z(p, d);
                features << "\n";
            }
        }
    }
    if (sum.traces > 0) {
        const double inv = 1.0 / static_cast<double>(sum.traces);
        sum.mean_feature_stability *= inv;
        sum.mean_co_direction *= inv;
        sum.mean_alignment_bound *= inv;
        sum.mean_self_alignment *= inv;
        sum.mean_cross_alignment *= inv;
    }
    return sum;
}

}  // namespace gridseq

#endif  // GRIDSEQ_EXPERIMENT_HPP
