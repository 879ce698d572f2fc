// gridseq: transient-dynamics dataset generation, training and evaluation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gridseq/experiment.hpp"

namespace fs = std::filesystem;
using namespace gridseq;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string profile;
    std::int64_t seed = -1;
};

void add_common(CLI::App* sub, CommonOpts& opts, bool config_required = true) {
    auto* c = sub->add_option("--config", opts.config_path, "experiment config (JSON)");
    if (config_required) c->required();
    sub->add_option("--seed", opts.seed, "RNG seed (overrides config)");
    sub->add_option("--out", opts.out_dir, "output directory (overrides config)");
    sub->add_option("--profile", opts.profile, "model profile: desk or full")
        ->check(CLI::IsMember({"desk", "full"}));
}

ExperimentConfig resolve(const CommonOpts& opts) {
    ExperimentConfig cfg = load_experiment_config(opts.config_path);
    if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (!opts.profile.empty()) cfg.profile = opts.profile;
    cfg.validate();
    fs::create_directories(cfg.out_dir);
    return cfg;
}

std::string path_in(const ExperimentConfig& cfg, const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << text;
}

// --------------------------------------------------------------------
void cmd_generate(const ExperimentConfig& cfg) {
    const PowerSystemSpec spec = load_system_spec(cfg.system_spec);
    DatasetSplits splits = generate_splits(spec, cfg, cfg.seed, cfg.n_scenarios);
    save_trajectories(splits.train, path_in(cfg, "train.traj"));
    save_trajectories(splits.val, path_in(cfg, "val.traj"));
    save_trajectories(splits.test, path_in(cfg, "test.traj"));
    write_text(path_in(cfg, "manifest.json"), split_manifest(splits, cfg.seed).dump(2) + "\n");
    std::cout << "generated " << splits.train.size() << "/" << splits.val.size() << "/"
              << splits.test.size() << " train/val/test trajectories in " << cfg.out_dir << "\n";
}

void cmd_pretrain(const ExperimentConfig& cfg) {
    TrainLogger logger(path_in(cfg, "pretrain_log.jsonl"));
    TrainedModel tm = make_pretrained(cfg, cfg.seed, &logger);
    save_checkpoint(tm.params, tm.freeze, tm.config, path_in(cfg, "pretrain.ckpt"));
    std::cout << "wrote " << path_in(cfg, "pretrain.ckpt") << "\n";
}

void cmd_finetune_teaf(const ExperimentConfig& cfg) {
    Checkpoint ck = load_checkpoint(path_in(cfg, "pretrain.ckpt"));
    DatasetSplits data;
    data.train = load_trajectories(path_in(cfg, "train.traj"));
    data.val = load_trajectories(path_in(cfg, "val.traj"));
    TrainLogger logger(path_in(cfg, "teaf_log.jsonl"));
    TrainedModel tm{std::move(ck.params), std::move(ck.freeze), ck.config, {}};
    run_teaf_stage(tm, data, cfg, cfg.seed, &logger);
    save_checkpoint(tm.params, tm.freeze, tm.config, path_in(cfg, "teaf.ckpt"));
    nlohmann::json hard = nlohmann::json::array();
    for (const HardCase& h : tm.hard_cases.cases)
        hard.push_back({{"trajectory", h.trajectory_index}, {"rollout_mse", h.rollout_mse}});
    write_text(path_in(cfg, "hard_cases.json"),
               nlohmann::json{{"cases", hard}}.dump(2) + "\n");
    std::cout << "wrote " << path_in(cfg, "teaf.ckpt") << " and hard-case manifest\n";
}

void cmd_finetune_schs(const ExperimentConfig& cfg) {
    Checkpoint ck = load_checkpoint(path_in(cfg, "teaf.ckpt"));
    std::vector<Trajectory> train = load_trajectories(path_in(cfg, "train.traj"));

    std::ifstream in(path_in(cfg, "hard_cases.json"));
    if (!in) throw IoError("cannot open: " + path_in(cfg, "hard_cases.json"));
    nlohmann::json j;
    in >> j;
    std::vector<Trajectory> hard;
    for (const auto& c : j.at("cases")) {
        const std::size_t idx = c.at("trajectory").get<std::size_t>();
        if (idx >= train.size()) throw ConfigError("hard-case index out of range");
        hard.push_back(train[idx]);
    }

    TrainLogger logger(path_in(cfg, "schs_log.jsonl"));
    schs_train(ck.params, ck.freeze, ck.config, hard, cfg.schs, cfg.seed, &logger);
    save_checkpoint(ck.params, ck.freeze, ck.config, path_in(cfg, "model.ckpt"));
    std::cout << "wrote " << path_in(cfg, "model.ckpt") << "\n";
}

void cmd_evaluate(const ExperimentConfig& cfg) {
    Checkpoint ck = load_checkpoint(path_in(cfg, "model.ckpt"));
    std::vector<Trajectory> test = load_trajectories(path_in(cfg, "test.traj"));
    EvaluationResult eval =
        evaluate_model(ck.params, ck.config, test, config_to_json(ck.config).dump());
    write_text(path_in(cfg, "metrics.json"), metrics_to_json(eval.report).dump(2) + "\n");
    {
        std::ofstream os(path_in(cfg, "metrics.csv"));
        if (!os) throw IoError("cannot open for writing: " + path_in(cfg, "metrics.csv"));
        metrics_to_csv(eval.report, os);
    }
    write_per_trajectory_errors(eval, test, ck.config.l_seq,
                                path_in(cfg, "per_trajectory.csv"));
    std::cout << metrics_to_json(eval.report).dump(2) << "\n";
}

void cmd_ablate(const ExperimentConfig& cfg, std::size_t n_seeds) {
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < n_seeds; ++i) seeds.push_back(cfg.seed + i);
    std::vector<AblationRow> rows = run_ablation(cfg, seeds);

    std::ofstream os(path_in(cfg, "ablation.csv"));
    if (!os) throw IoError("cannot open for writing: " + path_in(cfg, "ablation.csv"));
    os.precision(17);
    os << "variant,seed,MAE_H,MSE_H\n";
    for (const AblationRow& r : rows)
        os << r.variant << ',' << r.seed << ',' << r.mae_h << ',' << r.mse_h << "\n";

    std::ofstream ms(path_in(cfg, "ablation_medians.csv"));
    if (!ms) throw IoError("cannot open for writing: " + path_in(cfg, "ablation_medians.csv"));
    ms.precision(17);
    ms << "variant,median_MAE_H,median_MSE_H\n";
    for (const char* v : {"full", "wo_teaf", "wo_schs", "wo_patch"}) {
        std::vector<double> mae, mse;
        for (const AblationRow& r : rows)
            if (r.variant == v) {
                mae.push_back(r.mae_h);
                mse.push_back(r.mse_h);
            }
        ms << v << ',' << median(mae) << ',' << median(mse) << "\n";
    }
    std::cout << "wrote " << path_in(cfg, "ablation.csv") << "\n";
}

void cmd_fewshot(const ExperimentConfig& cfg, std::size_t n_seeds) {
    Checkpoint ck = load_checkpoint(path_in(cfg, "model.ckpt"));
    TrainedModel source{std::move(ck.params), std::move(ck.freeze), ck.config, {}};
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < n_seeds; ++i) seeds.push_back(cfg.seed + i);
    std::vector<FewShotPoint> points =
        run_fewshot(cfg, source, {0.0, 0.05, 0.25, 1.0}, seeds);

    std::ofstream os(path_in(cfg, "fewshot.csv"));
    if (!os) throw IoError("cannot open for writing: " + path_in(cfg, "fewshot.csv"));
    os.precision(17);
    os << "fraction,seed,MAE_H,MSE_H\n";
    for (const FewShotPoint& p : points)
        os << p.fraction << ',' << p.seed << ',' << p.mae_h << ',' << p.mse_h << "\n";
    std::cout << "wrote " << path_in(cfg, "fewshot.csv") << "\n";
}

nlohmann::json diag_json(const DiagnosticsSummary& s) {
    return {{"feature_stability", s.mean_feature_stability},
            {"co_direction_ratio", s.mean_co_direction},
            {"alignment_bound", s.mean_alignment_bound},
            {"self_alignment", s.mean_self_alignment},
            {"cross_alignment", s.mean_cross_alignment},
            {"windows", s.traces}};
}

void merge_feature_csvs(const std::vector<std::pair<std::string, std::string>>& parts,
                        const std::string& out_path) {
    std::ofstream os(out_path);
    if (!os) throw IoError("cannot open for writing: " + out_path);
    bool wrote_header = false;
    for (const auto& [label, path] : parts) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open: " + path);
        std::string line;
        bool header = true;
        while (std::getline(in, line)) {
            if (header) {
                if (!wrote_header) {
                    os << "model," << line << "\n";
                    wrote_header = true;
                }
                header = false;
                continue;
            }
            os << label << ',' << line << "\n";
        }
    }
}

void cmd_diagnose(const ExperimentConfig& cfg, const std::string& compare_path) {
    std::vector<Trajectory> test = load_trajectories(path_in(cfg, "test.traj"));
    nlohmann::json out;
    std::vector<std::pair<std::string, std::string>> feature_parts;

    Checkpoint base = load_checkpoint(path_in(cfg, "model.ckpt"));
    const std::string base_csv = path_in(cfg, "features_base.csv");
    out["base"] = diag_json(diagnose_model(base.params, base.config, test, 0.8, 200, base_csv));
    feature_parts.emplace_back("base", base_csv);

    if (!compare_path.empty()) {
        Checkpoint other = load_checkpoint(compare_path);
        const std::string other_csv = path_in(cfg, "features_compare.csv");
        out["compare"] =
            diag_json(diagnose_model(other.params, other.config, test, 0.8, 200, other_csv));
        feature_parts.emplace_back("compare", other_csv);
    }
    merge_feature_csvs(feature_parts, path_in(cfg, "features.csv"));
    for (const auto& [label, path] : feature_parts) fs::remove(path);
    write_text(path_in(cfg, "diagnostics.json"), out.dump(2) + "\n");
    std::cout << out.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"transient-dynamics trajectory forecasting toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::size_t n_seeds = 5;
    std::string compare_path;

    auto* gen = app.add_subcommand("generate", "simulate trajectories and write dataset splits");
    add_common(gen, opts);
    auto* pre = app.add_subcommand("pretrain", "pretrain the backbone on a surrogate corpus");
    add_common(pre, opts);
    auto* teaf = app.add_subcommand("finetune-teaf",
                                    "teacher-forced fine-tuning with hard-case mining");
    add_common(teaf, opts);
    auto* schs = app.add_subcommand("finetune-schs",
                                    "scheduled-sampling fine-tuning on hard cases");
    add_common(schs, opts);
    auto* eval = app.add_subcommand("evaluate", "batched rollout metrics on the test split");
    add_common(eval, opts);
    auto* abl = app.add_subcommand("ablate", "train and score the ablation grid");
    add_common(abl, opts);
    abl->add_option("--seeds", n_seeds, "number of consecutive seeds");
    auto* few = app.add_subcommand("fewshot", "few-shot transfer curve on the target system");
    add_common(few, opts);
    few->add_option("--seeds", n_seeds, "number of consecutive seeds");
    auto* diag = app.add_subcommand("diagnose", "representation diagnostics for a checkpoint");
    add_common(diag, opts);
    diag->add_option("--compare", compare_path, "second checkpoint to diagnose alongside");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        const ExperimentConfig cfg = resolve(opts);
        if (gen->parsed()) cmd_generate(cfg);
        if (pre->parsed()) cmd_pretrain(cfg);
        if (teaf->parsed()) cmd_finetune_teaf(cfg);
        if (schs->parsed()) cmd_finetune_schs(cfg);
        if (eval->parsed()) cmd_evaluate(cfg);
        if (abl->parsed()) cmd_ablate(cfg, n_seeds);
        if (few->parsed()) cmd_fewshot(cfg, n_seeds);
        if (diag->parsed()) cmd_diagnose(cfg, compare_path);
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
