#include <doctest.h>

#include <cmath>
#include <random>

#include "gridseq/rollout.hpp"
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

ObservationWindow random_window(const ModelConfig& cfg, std::size_t n_x, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ObservationWindow w;
    w.channels.resize(n_x);
    for (auto& ch : w.channels) {
        ch.resize(cfg.l_seq);
        for (double& v : ch) v = u(rng);
    }
    return w;
}

Trajectory sine_trajectory(std::size_t t_len, std::size_t n_x, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.3, 1.2);
    Trajectory t;
    t.dt = 0.02;
    t.steps = t_len;
    for (std::size_t c = 0; c < n_x; ++c) {
        const double f = u(rng), a = u(rng);
        std::vector<double> ch(t_len);
        for (std::size_t i = 0; i < t_len; ++i) ch[i] = a * std::sin(f * 0.3 * i);
        t.channels.push_back(std::move(ch));
    }
    return t;
}

}  // namespace

TEST_CASE("build_next_input drops oldest and appends") {
    std::vector<double> prev{1, 2, 3, 4, 5};
    auto next = build_next_input(prev, {9, 8});
    CHECK(next == std::vector<double>{3, 4, 5, 9, 8});
    auto full = build_next_input(prev, {10, 20, 30, 40, 50});
    CHECK(full == std::vector<double>{10, 20, 30, 40, 50});
}

TEST_CASE("iterating with truth segments reconstructs trajectory windows") {
    const std::size_t l_seq = 8, l_pred = 2, t_len = 20;
    std::vector<double> series(t_len);
    for (std::size_t i = 0; i < t_len; ++i) series[i] = static_cast<double>(i);
    std::vector<double> window(series.begin(), series.begin() + l_seq);
    std::size_t pos = 0;
    while (pos + l_seq + l_pred <= t_len) {
        std::vector<double> truth(series.begin() + pos + l_seq,
                                  series.begin() + pos + l_seq + l_pred);
        window = build_next_input(window, truth);
        pos += l_pred;
        std::vector<double> want(series.begin() + pos, series.begin() + pos + l_seq);
        CHECK(window == want);
    }
}

TEST_CASE("batched step equals sequential single-channel calls bitwise") {
    ModelConfig cfg = tiny_config();
    ModelParameters p = init_parameters(cfg, 1);
    for (int trial = 0; trial < 20; ++trial) {
        ObservationWindow w = random_window(cfg, 5, 100 + trial);
        auto batched = step(p, cfg, w.channels);
        for (std::size_t c = 0; c < 5; ++c) {
            auto solo = step(p, cfg, {w.channels[c]});
            REQUIRE(solo.size() == 1);
            CHECK(batched[c] == solo[0]);
        }
    }
}

TEST_CASE("channel permutation and duplication") {
    ModelConfig cfg = tiny_config();
    ModelParameters p = init_parameters(cfg, 2);
    ObservationWindow w = random_window(cfg, 3, 7);

    auto base = step(p, cfg, w.channels);
    auto permuted = step(p, cfg, {w.channels[2], w.channels[0], w.channels[1]});
    CHECK(permuted[0] == base[2]);
    CHECK(permuted[1] == base[0]);
    CHECK(permuted[2] == base[1]);

    auto dup = step(p, cfg, {w.channels[1], w.channels[1]});
    CHECK(dup[0] == dup[1]);
}

TEST_CASE("channel isolation: editing one history leaves others bitwise unchanged") {
    ModelConfig cfg = tiny_config();
    ModelParameters p = init_parameters(cfg, 3);
    ObservationWindow w = random_window(cfg, 4, 11);
    auto base = step(p, cfg, w.channels);
    ObservationWindow w2 = w;
    for (double& v : w2.channels[0]) v += 0.5;
    auto modified = step(p, cfg, w2.channels);
    for (std::size_t c = 1; c < 4; ++c) CHECK(modified[c] == base[c]);
}

TEST_CASE("horizon boundary gives exactly one step") {
    ModelConfig cfg = tiny_config();
    ModelParameters p = init_parameters(cfg, 4);
    ObservationWindow w = random_window(cfg, 2, 13);
    RolloutResult r = iterative_predict(p, cfg, w, cfg.l_seq + cfg.l_pred);
    CHECK(r.predicted[0].size() == cfg.l_pred);
    CHECK(r.step_seconds.size() == 1);
}

TEST_CASE("remainder horizon is covered by a truncated final step") {
    ModelConfig cfg = tiny_config();
    ModelParameters p = init_parameters(cfg, 5);
    ObservationWindow w = random_window(cfg, 2, 17);
    const std::size_t horizon = cfg.l_seq + 2 * cfg.l_pred + 1;  // remainder 1
    RolloutResult r = iterative_predict(p, cfg, w, horizon);
    CHECK(r.predicted[0].size() == horizon - cfg.l_seq);
    CHECK(r.step_seconds.size() == 3);

    // the first 2*l_pred values agree with the floor-count rollout
    RolloutResult floor_r = iterative_predict(p, cfg, w, cfg.l_seq + 2 * cfg.l_pred);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < 2 * cfg.l_pred; ++i)
            CHECK(r.predicted[c][i] == floor_r.predicted[c][i]);
}

TEST_CASE("constant-continuation model under crafted head weights") {
    ModelConfig cfg = tiny_config();
    ModelParameters p = init_parameters(cfg, 6);
    // zero head weights: normalized prediction = b_out = 0, physical = mu
    for (double& v : p.w_out.data) v = 0.0;
    for (double& v : p.b_out.data) v = 0.0;
    ObservationWindow w;
    w.channels = {std::vector<double>(cfg.l_seq, 3.25)};
    RolloutResult r = iterative_predict(p, cfg, w, cfg.l_seq + 6);
    for (double v : r.predicted[0]) CHECK(v == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("divergent channel is flagged and held while others continue") {
    ModelConfig cfg = tiny_config();
    ModelParameters p = init_parameters(cfg, 7);
    ObservationWindow w = random_window(cfg, 2, 19);
    for (double& v : w.channels[0]) v *= 1e9;  // forces |prediction| > 1e6
    RolloutResult r = iterative_predict(p, cfg, w, cfg.l_seq + 3 * cfg.l_pred);
    CHECK(r.divergent[0] == 1);
    CHECK(r.divergent[1] == 0);
    for (double v : r.predicted[1]) CHECK(std::isfinite(v));
}

TEST_CASE("all channels divergent raises a rollout error") {
    ModelConfig cfg = tiny_config();
    ModelParameters p = init_parameters(cfg, 8);
    ObservationWindow w = random_window(cfg, 2, 23);
    for (auto& ch : w.channels)
        for (double& v : ch) v *= 1e9;
    CHECK_THROWS_AS(iterative_predict(p, cfg, w, cfg.l_seq + 2 * cfg.l_pred),
                    DivergenceError);
}

TEST_CASE("rollout equals SchS machinery at epsilon=0") {
    ModelConfig cfg = tiny_config();
    Trajectory traj = sine_trajectory(26, 3, 27);
    ModelParameters params = init_parameters(cfg, 9);

    RolloutResult r = rollout_trajectory(params, cfg, traj);

    FreezeMask mask = default_freeze_mask(params);
    SchSConfig scfg;
    scfg.e_max = 2;
    scfg.e_start = 1;
    scfg.alpha = 0.0;  // no updates: observe inputs only
    scfg.epsilon_override = 0.0;

    std::vector<std::vector<std::vector<double>>> seen(3);  // [channel][step] -> prediction
    SchSObserver obs = [&](std::size_t ti, std::size_t c, std::size_t stepi,
                           const std::vector<double>&, const std::vector<double>& pred) {
        if (ti == 0 && stepi < 100) seen[c].push_back(pred);
    };
    schs_train(params, mask, cfg, {traj}, scfg, 31, nullptr, obs);

    const std::size_t n_steps = (traj.steps - cfg.l_seq) / cfg.l_pred;
    for (std::size_t c = 0; c < 3; ++c) {
        REQUIRE(seen[c].size() == 2 * n_steps);
        for (std::size_t s = 0; s < n_steps; ++s)
            for (std::size_t i = 0; i < cfg.l_pred; ++i)
                CHECK(seen[c][s][i] == r.predicted[c][s * cfg.l_pred + i]);
    }
}

TEST_CASE("rollout_as_trajectory carries the provenance flag") {
    ModelConfig cfg = tiny_config();
    Trajectory traj = sine_trajectory(26, 2, 29);
    ModelParameters params = init_parameters(cfg, 10);
    RolloutResult r = rollout_trajectory(params, cfg, traj);
    Trajectory pred = rollout_as_trajectory(r, traj, cfg);
    CHECK(pred.predicted);
    CHECK(pred.channels.size() == 2);
    CHECK(pred.steps == traj.steps);
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t t = 0; t < cfg.l_seq; ++t)
            CHECK(pred.channels[c][t] == traj.channels[c][t]);  // observed prefix kept
        for (std::size_t t = 0; t < r.predicted[c].size(); ++t)
            CHECK(pred.channels[c][cfg.l_seq + t] == r.predicted[c][t]);
    }
}
