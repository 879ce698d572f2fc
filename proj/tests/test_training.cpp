#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "gridseq/training.hpp"

using namespace gridseq;

namespace {

ModelConfig tiny_config() {
    ModelConfig c;
    c.layers = 2;
    c.heads = 2;
    c.dim = 8;
    c.ffn_dim = 16;
    c.l_seq = 12;
    c.l_pred = 2;
    c.patch_len = 4;
    c.stride = 2;
    return c;
}

std::vector<Trajectory> toy_trajectories(std::size_t count, std::size_t t_len,
                                         std::size_t n_x, std::uint64_t seed) {
    std::vector<Trajectory> out(count);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.2, 1.4);
    for (std::size_t k = 0; k < count; ++k) {
        Trajectory& t = out[k];
        t.dt = 0.02;
        t.steps = t_len;
        t.stable = k % 2 == 0;
        for (std::size_t c = 0; c < n_x; ++c) {
            const double f = u(rng), a = u(rng), d = 0.3 * u(rng);
            std::vector<double> ch(t_len);
            for (std::size_t i = 0; i < t_len; ++i)
                ch[i] = a * std::exp(-d * 0.02 * i) * std::sin(f * 0.4 * i) + 0.1 * a;
            t.channels.push_back(std::move(ch));
        }
    }
    return out;
}

}  // namespace

TEST_CASE("teaf_loss oracles") {
    CHECK(teaf_loss({1.0, 2.0}, {1.0, 2.0}) == 0.0);
    CHECK(teaf_loss({1.0}, {3.0}) == 4.0);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-5, 5);
    std::vector<double> a(17), b(17);
    for (std::size_t i = 0; i < 17; ++i) {
        a[i] = u(rng);
        b[i] = u(rng);
    }
    double want = 0.0;
    for (std::size_t i = 0; i < 17; ++i) want += (a[i] - b[i]) * (a[i] - b[i]);
    want /= 17.0;
    CHECK(teaf_loss(a, b) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("sampling_rate branches") {
    CHECK(sampling_rate(1, 2, 10) == 1.0);
    CHECK(sampling_rate(10, 2, 10) == 0.0);
    CHECK(sampling_rate(6, 2, 10) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sampling_rate(2, 2, 10) == 1.0);  // continuity at E_start
    CHECK_THROWS_AS(sampling_rate(1, 3, 3), ConfigError);
    // non-increasing
    double prev = 1.0;
    for (std::size_t k = 1; k <= 10; ++k) {
        const double e = sampling_rate(k, 2, 10);
        CHECK(e <= prev + 1e-15);
        prev = e;
    }
}

TEST_CASE("mix_segment endpoints and concentration") {
    std::vector<double> truth{1.0, 2.0}, pred{9.0, 8.0};
    Rng rng = make_rng(1);
    for (int i = 0; i < 10; ++i) {
        auto [seg1, used1] = mix_segment(truth, pred, 1.0, rng);
        CHECK(seg1 == truth);
        CHECK(used1);
        auto [seg0, used0] = mix_segment(truth, pred, 0.0, rng);
        CHECK(seg0 == pred);
        CHECK(!used0);
    }
    std::size_t truth_count = 0;
    Rng rng2 = make_rng(2);
    for (int i = 0; i < 10000; ++i) {
        auto [seg, used_truth] = mix_segment(truth, pred, 0.5, rng2);
        truth_count += used_truth ? 1 : 0;
    }
    const double frac = static_cast<double>(truth_count) / 10000.0;
    CHECK(std::abs(frac - 0.5) < 0.02);
}

TEST_CASE("adam_step contracts") {
    ModelConfig cfg = tiny_config();
    ModelParameters params = init_parameters(cfg, 1);
    ModelParameters snapshot = params;
    FreezeMask mask = default_freeze_mask(params);

    OptimizerState opt;
    opt.alpha = 1e-3;
    opt.total_epochs = 1;
    opt.init(params, mask);
    // moments exist only for trainable arrays
    for (auto& [name, m] : named_arrays(params)) {
        const bool has = opt.m1.count(name) > 0;
        CHECK(has == mask.is_trainable(name));
    }

    ModelParameters grads = zero_like(params);
    adam_step(params, grads, opt, 1e-3, mask);
    auto na = named_arrays(params), ns = named_arrays(snapshot);
    for (std::size_t i = 0; i < na.size(); ++i)
        CHECK(na[i].second->data == ns[i].second->data);  // zero grad: unchanged
}

TEST_CASE("adam converges on a scalar quadratic") {
    // f(w) = w^2 driven through the same update rule via a 1x1 array
    ModelConfig cfg = tiny_config();
    cfg.l_pred = 1;
    ModelParameters params = init_parameters(cfg, 2);
    params.b_out(0, 0) = 1.0;
    FreezeMask mask;
    for_each_array(params, [&](const std::string& name, Matrix&) {
        mask.trainable[name] = name == "head.b_out";
    });
    OptimizerState opt;
    opt.alpha = 0.05;
    opt.total_epochs = 1;
    opt.init(params, mask);
    for (int step = 0; step < 200; ++step) {
        ModelParameters grads = zero_like(params);
        grads.b_out(0, 0) = 2.0 * params.b_out(0, 0);
        adam_step(params, grads, opt, 0.05, mask);
    }
    CHECK(std::abs(params.b_out(0, 0)) < 0.1);
}

TEST_CASE("cosine annealing endpoints") {
    OptimizerState opt;
    opt.alpha = 1e-3;
    opt.total_epochs = 10;
    CHECK(opt.lr_for_epoch(1) == doctest::Approx(1e-3).epsilon(1e-9));
    CHECK(opt.lr_for_epoch(10) == doctest::Approx(1e-5).epsilon(1e-6));
    for (std::size_t k = 1; k < 10; ++k)
        CHECK(opt.lr_for_epoch(k + 1) <= opt.lr_for_epoch(k) + 1e-18);
}

TEST_CASE("global norm clipping") {
    ModelConfig cfg = tiny_config();
    ModelParameters ref = init_parameters(cfg, 3);
    ModelParameters grads = zero_like(ref);
    FreezeMask mask = all_trainable_mask(ref);
    grads.b_out(0, 0) = 30.0;
    grads.b_out(0, 1) = 40.0;
    const double norm = clip_gradients(grads, mask, 1.0);
    CHECK(norm == doctest::Approx(50.0).epsilon(1e-12));
    double after = 0.0;
    for_each_array(grads, [&](const std::string&, Matrix& m) {
        for (double v : m.data) after += v * v;
    });
    CHECK(std::sqrt(after) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("build_windows index arithmetic") {
    ModelConfig cfg = tiny_config();
    auto trajs = toy_trajectories(2, 20, 3, 5);
    TrainingWindows tw = build_windows(trajs, cfg);
    const std::size_t per_channel = 20 - cfg.l_seq - cfg.l_pred + 1;
    CHECK(tw.windows.size() == 2 * 3 * per_channel);
    for (const auto& w : tw.windows) CHECK(w.normalized);
}

TEST_CASE("teaf_train determinism and hard-case clamp") {
    ModelConfig cfg = tiny_config();
    auto train = toy_trajectories(6, 24, 2, 7);
    auto val = toy_trajectories(2, 24, 2, 8);
    TeaFConfig tcfg;
    tcfg.epochs = 2;
    tcfg.alpha = 1e-3;
    tcfg.batch = 8;
    tcfg.hard_case_count = 50;  // more than trajectory count

    ModelParameters p1 = init_parameters(cfg, 9);
    ModelParameters p2 = init_parameters(cfg, 9);
    FreezeMask mask = default_freeze_mask(p1);
    HardCaseSet h1 = teaf_train(p1, mask, cfg, train, val, tcfg, 11);
    HardCaseSet h2 = teaf_train(p2, mask, cfg, train, val, tcfg, 11);

    auto n1 = named_arrays(p1), n2 = named_arrays(p2);
    for (std::size_t i = 0; i < n1.size(); ++i) CHECK(n1[i].second->data == n2[i].second->data);

    CHECK(h1.cases.size() == train.size());  // clamped to all trajectories, sorted
    for (std::size_t i = 1; i < h1.cases.size(); ++i)
        CHECK(h1.cases[i - 1].rollout_mse >= h1.cases[i].rollout_mse);
    REQUIRE(h2.cases.size() == h1.cases.size());
    for (std::size_t i = 0; i < h1.cases.size(); ++i)
        CHECK(h1.cases[i].trajectory_index == h2.cases[i].trajectory_index);
}

TEST_CASE("teaf_train improves validation loss on a toy problem") {
    ModelConfig cfg = tiny_config();
    auto train = toy_trajectories(50, 30, 1, 13);
    auto val = toy_trajectories(8, 30, 1, 14);
    TeaFConfig tcfg;
    tcfg.epochs = 3;
    tcfg.alpha = 1e-3;
    tcfg.batch = 16;
    tcfg.hard_case_count = 4;

    std::vector<double> deltas;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ModelParameters params = init_parameters(cfg, seed);
        FreezeMask mask = all_trainable_mask(params);
        TrainingWindows vw = build_windows(val, cfg);
        std::vector<std::size_t> idx(vw.windows.size());
        std::iota(idx.begin(), idx.end(), 0);
        const double before = mean_window_loss(vw.windows, idx, params, cfg);
        teaf_train(params, mask, cfg, train, val, tcfg, seed);
        const double after = mean_window_loss(vw.windows, idx, params, cfg);
        deltas.push_back(after - before);
    }
    std::sort(deltas.begin(), deltas.end());
    CHECK(deltas[2] < 0.0);  // median improvement
}

TEST_CASE("frozen arrays unchanged by both training stages") {
    ModelConfig cfg = tiny_config();
    auto train = toy_trajectories(5, 24, 2, 17);
    auto val = toy_trajectories(2, 24, 2, 18);

    ModelParameters params = init_parameters(cfg, 19);
    FreezeMask mask = default_freeze_mask(params);
    ModelParameters snapshot = params;

    TeaFConfig tcfg;
    tcfg.epochs = 2;
    tcfg.alpha = 1e-3;
    tcfg.batch = 8;
    tcfg.hard_case_count = 3;
    HardCaseSet hard = teaf_train(params, mask, cfg, train, val, tcfg, 20);

    std::vector<Trajectory> hard_trajs;
    for (const HardCase& h : hard.cases) hard_trajs.push_back(train[h.trajectory_index]);
    SchSConfig scfg;
    scfg.e_max = 2;
    scfg.e_start = 1;
    scfg.alpha = 5e-4;
    schs_train(params, mask, cfg, hard_trajs, scfg, 21);

    auto np = named_arrays(params), ns = named_arrays(snapshot);
    bool trainable_changed = false;
    for (std::size_t i = 0; i < np.size(); ++i) {
        if (!mask.is_trainable(np[i].first))
            CHECK(np[i].second->data == ns[i].second->data);
        else if (np[i].second->data != ns[i].second->data)
            trainable_changed = true;
    }
    CHECK(trainable_changed);
}

TEST_CASE("schs epsilon=1 visits teacher-forced windows positionally") {
    ModelConfig cfg = tiny_config();
    auto hard = toy_trajectories(2, 28, 2, 23);

    ModelParameters params = init_parameters(cfg, 24);
    FreezeMask mask = default_freeze_mask(params);
    SchSConfig scfg;
    scfg.e_max = 2;
    scfg.e_start = 1;
    scfg.alpha = 0.0;  // observe without updating
    scfg.epsilon_override = 1.0;

    std::vector<std::vector<double>> seen;
    SchSObserver obs = [&](std::size_t ti, std::size_t c, std::size_t stepi,
                           const std::vector<double>& window, const std::vector<double>&) {
        (void)stepi;
        if (ti == 0 && c == 1) seen.push_back(window);
    };
    schs_train(params, mask, cfg, hard, scfg, 25, nullptr, obs);

    const auto& truth = hard[0].channels[1];
    const std::size_t n_steps = (28 - cfg.l_seq) / cfg.l_pred;
    REQUIRE(seen.size() == 2 * n_steps);  // two epochs
    for (std::size_t s = 0; s < n_steps; ++s) {
        std::vector<double> want(truth.begin() + s * cfg.l_pred,
                                 truth.begin() + s * cfg.l_pred + cfg.l_seq);
        CHECK(seen[s] == want);
        CHECK(seen[n_steps + s] == want);
    }
}

TEST_CASE("schs final rollout loss improves on the hard set") {
    ModelConfig cfg = tiny_config();
    auto hard = toy_trajectories(6, 30, 1, 29);

    std::vector<double> deltas;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ModelParameters params = init_parameters(cfg, 30 + seed);
        FreezeMask mask = all_trainable_mask(params);
        SchSConfig scfg;
        scfg.e_max = 6;
        scfg.e_start = 2;
        scfg.alpha = 2e-3;
        auto mse_before = 0.0, mse_after = 0.0;
        for (const auto& t : hard) mse_before += trajectory_rollout_mse(params, cfg, t);
        schs_train(params, mask, cfg, hard, scfg, seed);
        for (const auto& t : hard) mse_after += trajectory_rollout_mse(params, cfg, t);
        deltas.push_back(mse_after - mse_before);
    }
    std::sort(deltas.begin(), deltas.end());
    CHECK(deltas[2] < 0.0);
}

TEST_CASE("surrogate pretrain improves held-out loss and is deterministic") {
    ModelConfig cfg = tiny_config();
    SurrogateCorpusSpec spec;
    spec.n_series = 24;
    spec.series_len = 40;
    spec.epochs = 3;
    spec.alpha = 1e-3;
    spec.batch = 16;
    spec.max_windows_per_epoch = 400;

    std::vector<double> deltas;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        double before = 0.0, after = 0.0;
        surrogate_pretrain(cfg, spec, seed, nullptr, &before, &after);
        deltas.push_back(after - before);
    }
    std::sort(deltas.begin(), deltas.end());
    CHECK(deltas[2] < 0.0);  // median seed improves

    ModelParameters a = surrogate_pretrain(cfg, spec, 5);
    ModelParameters b = surrogate_pretrain(cfg, spec, 5);
    auto na = named_arrays(a), nb = named_arrays(b);
    for (std::size_t i = 0; i < na.size(); ++i) CHECK(na[i].second->data == nb[i].second->data);
}

TEST_CASE("training log records epochs as JSON lines") {
    ModelConfig cfg = tiny_config();
    auto train = toy_trajectories(4, 24, 1, 31);
    auto val = toy_trajectories(2, 24, 1, 32);
    const std::string path = "/tmp/gridseq_test_log.jsonl";
    std::remove(path.c_str());
    {
        TrainLogger logger(path);
        ModelParameters params = init_parameters(cfg, 33);
        FreezeMask mask = default_freeze_mask(params);
        TeaFConfig tcfg;
        tcfg.epochs = 2;
        tcfg.alpha = 1e-3;
        tcfg.batch = 8;
        tcfg.hard_case_count = 2;
        teaf_train(params, mask, cfg, train, val, tcfg, 34, &logger);
    }
    std::ifstream in(path);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) {
        auto j = nlohmann::json::parse(line);
        CHECK(j.at("stage").get<std::string>() == "teaf");
        CHECK(j.contains("epoch"));
        CHECK(j.contains("epsilon"));
        CHECK(j.contains("train_loss"));
        CHECK(j.contains("val_loss"));
        CHECK(j.contains("lr"));
        CHECK(j.contains("wall_seconds"));
        ++lines;
    }
    CHECK(lines == 2);
    std::remove(path.c_str());
}
