#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "gridseq/evaluation.hpp"

using namespace gridseq;

namespace {

Trajectory make_traj(std::vector<std::vector<double>> channels, bool stable) {
    Trajectory t;
    t.channels = std::move(channels);
    t.steps = t.channels.front().size();
    t.stable = stable;
    return t;
}

RolloutResult make_pred(std::vector<std::vector<double>> predicted) {
    RolloutResult r;
    r.predicted = std::move(predicted);
    r.divergent.assign(r.predicted.size(), 0);
    return r;
}

}  // namespace

TEST_CASE("compute_metrics hand-worked single trajectory") {
    // l_seq = 2, one channel, truth tail [1, 4], prediction [1, 2]:
    // errors 0 and -2 -> MAE = 1, MSE = 2.
    auto truth = make_traj({{9.0, 9.0, 1.0, 4.0}}, true);
    auto pred = make_pred({{1.0, 2.0}});
    auto report = compute_metrics({pred}, {truth}, 2, "fp");

    CHECK(report.config_fingerprint == "fp");
    REQUIRE(report.categories.count("S") == 1);
    REQUIRE(report.categories.count("H") == 1);
    CHECK(report.categories.count("U") == 0);  // no unstable trajectories present
    const auto& s = report.categories.at("S");
    CHECK(s.trajectory_count == 1);
    CHECK(s.mae == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.mse == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(report.categories.at("H").mse == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(s.channel_mae.at(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.channel_mse.at(0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("compute_metrics matches a brute-force triple loop on random data") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    const std::size_t l_seq = 5, n_traj = 7;
    std::vector<Trajectory> truths;
    std::vector<RolloutResult> preds;
    for (std::size_t i = 0; i < n_traj; ++i) {
        const std::size_t n_x = 2 + i % 3;
        const std::size_t tail = 4 + i;
        std::vector<std::vector<double>> ch(n_x), pr(n_x);
        for (std::size_t c = 0; c < n_x; ++c) {
            for (std::size_t t = 0; t < l_seq + tail; ++t) ch[c].push_back(unif(rng));
            for (std::size_t t = 0; t < tail; ++t) pr[c].push_back(unif(rng));
        }
        truths.push_back(make_traj(std::move(ch), i % 2 == 0));
        preds.push_back(make_pred(std::move(pr)));
    }

    auto report = compute_metrics(preds, truths, l_seq);

    auto brute = [&](bool want_stable, bool pooled) {
        double abs_sum = 0.0, sq_sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < n_traj; ++i) {
            if (!pooled && truths[i].stable != want_stable) continue;
            for (std::size_t c = 0; c < truths[i].n_channels(); ++c)
                for (std::size_t t = 0; t < preds[i].predicted[c].size(); ++t) {
                    const double d =
                        preds[i].predicted[c][t] - truths[i].channels[c][l_seq + t];
                    abs_sum += std::abs(d);
                    sq_sum += d * d;
                    ++n;
                }
        }
        return std::pair<double, double>(abs_sum / n, sq_sum / n);
    };

    auto [mae_s, mse_s] = brute(true, false);
    auto [mae_u, mse_u] = brute(false, false);
    auto [mae_h, mse_h] = brute(false, true);
    CHECK(std::abs(report.categories.at("S").mae - mae_s) < 1e-9);
    CHECK(std::abs(report.categories.at("S").mse - mse_s) < 1e-9);
    CHECK(std::abs(report.categories.at("U").mae - mae_u) < 1e-9);
    CHECK(std::abs(report.categories.at("U").mse - mse_u) < 1e-9);
    CHECK(std::abs(report.categories.at("H").mae - mae_h) < 1e-9);
    CHECK(std::abs(report.categories.at("H").mse - mse_h) < 1e-9);
}

TEST_CASE("pooled metrics differ from the trajectory-weighted average of S and U") {
    // Stable trajectory contributes 2 points, unstable contributes 8, so
    // pooling weights the unstable errors 4x relative to a 50/50 average.
    auto t_s = make_traj({{0.0, 0.0, 0.0, 0.0}}, true);       // tail [0, 0]
    auto t_u = make_traj(
        {{0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0}}, false);
    auto p_s = make_pred({{1.0, 1.0}});                        // MSE_S = 1
    auto p_u = make_pred({{4.0, 4.0, 4.0, 4.0, 4.0, 4.0, 4.0, 4.0}});  // MSE_U = 9
    auto report = compute_metrics({p_s, p_u}, {t_s, t_u}, 2);

    const double mse_s = report.categories.at("S").mse;
    const double mse_u = report.categories.at("U").mse;
    const double mse_h = report.categories.at("H").mse;
    CHECK(mse_s == doctest::Approx(1.0));
    CHECK(mse_u == doctest::Approx(9.0));
    CHECK(mse_h == doctest::Approx((2.0 * 1.0 + 8.0 * 9.0) / 10.0));
    CHECK(std::abs(mse_h - 0.5 * (mse_s + mse_u)) > 0.1);
}

TEST_CASE("compute_metrics rejects mismatched counts and omits empty categories") {
    auto t = make_traj({{0.0, 0.0, 1.0}}, false);
    auto p = make_pred({{1.0}});
    CHECK_THROWS_AS(compute_metrics({p, p}, {t}, 2), ShapeError);
    auto report = compute_metrics({p}, {t}, 2);
    CHECK(report.categories.count("S") == 0);
    CHECK(report.categories.count("U") == 1);
    CHECK(report.categories.count("H") == 1);
}

TEST_CASE("metrics serializers carry the same numbers") {
    auto t = make_traj({{0.0, 0.0, 1.0, 4.0}}, true);
    auto p = make_pred({{1.0, 2.0}});
    auto report = compute_metrics({p}, {t}, 2, "abc123");

    auto j = metrics_to_json(report);
    CHECK(j["config_fingerprint"] == "abc123");
    CHECK(j["categories"]["S"]["MSE"].get<double>() == doctest::Approx(2.0));
    CHECK(j["categories"]["S"]["trajectories"] == 1);
    CHECK(j["categories"]["S"]["channel_MAE"]["0"].get<double>() == doctest::Approx(1.0));

    std::ostringstream os;
    metrics_to_csv(report, os);
    const std::string csv = os.str();
    CHECK(csv.find("category,trajectories,MAE,MSE") == 0);
    CHECK(csv.find("S,1,1,2") != std::string::npos);
}

// ---------------------------------------------------------------------
// Representation diagnostics.
// ---------------------------------------------------------------------
namespace {

ForwardTrace two_layer_trace(const Matrix& a, const Matrix& b) {
    ForwardTrace t;
    t.hidden = {a, b};
    return t;
}

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
    return m;
}

}  // namespace

TEST_CASE("feature_stability on identical, antipodal, and hand-worked traces") {
    Matrix a = from_rows({{1.0, 2.0}, {-3.0, 0.5}});

    CHECK(feature_stability(two_layer_trace(a, a)).mean_cosine == doctest::Approx(1.0));

    Matrix neg = a;
    for (double& v : neg.data) v = -v;
    CHECK(feature_stability(two_layer_trace(a, neg)).mean_cosine == doctest::Approx(-1.0));

    Matrix b = from_rows({{2.0, 1.0}, {0.0, 1.0}});
    const double c0 = (1.0 * 2.0 + 2.0 * 1.0) / (std::sqrt(5.0) * std::sqrt(5.0));
    const double c1 = 0.5 / (std::sqrt(9.25) * 1.0);
    auto fs = feature_stability(two_layer_trace(a, b));
    CHECK(fs.mean_cosine == doctest::Approx(0.5 * (c0 + c1)).epsilon(1e-12));
    CHECK(fs.used_positions == 2);
    CHECK(fs.skipped_positions == 0);
}

TEST_CASE("feature_stability skips zero-norm rows and requires two layers") {
    Matrix a = from_rows({{1.0, 0.0}, {0.0, 0.0}});
    Matrix b = from_rows({{1.0, 0.0}, {1.0, 1.0}});
    auto fs = feature_stability(two_layer_trace(a, b));
    CHECK(fs.used_positions == 1);
    CHECK(fs.skipped_positions == 1);
    CHECK(fs.mean_cosine == doctest::Approx(1.0));

    ForwardTrace one;
    one.hidden = {a};
    CHECK_THROWS_AS(feature_stability(one), ConfigError);
}

TEST_CASE("co_direction_ratio endpoints and counting") {
    ForwardTrace same;
    same.hidden = {from_rows({{1.0, 1.0}, {2.0, 2.0}, {0.5, 0.5}})};
    CHECK(co_direction_ratio(same, 0.9) == doctest::Approx(1.0));

    ForwardTrace ortho;
    ortho.hidden = {from_rows({{1.0, 0.0}, {0.0, 1.0}})};
    CHECK(co_direction_ratio(ortho, 0.5) == doctest::Approx(0.0));

    // Rows: e0, e0, e1 -> of the 3 pairs only (0,1) exceeds a 0.9 threshold.
    ForwardTrace third;
    third.hidden = {from_rows({{1.0, 0.0}, {3.0, 0.0}, {0.0, 2.0}})};
    CHECK(co_direction_ratio(third, 0.9) == doctest::Approx(1.0 / 3.0));

    // Cosine is scale invariant, so rescaling rows changes nothing.
    ForwardTrace scaled;
    scaled.hidden = {from_rows({{10.0, 0.0}, {0.03, 0.0}, {0.0, 200.0}})};
    CHECK(co_direction_ratio(scaled, 0.9) == doctest::Approx(1.0 / 3.0));

    ForwardTrace single;
    single.hidden = {from_rows({{1.0, 0.0}})};
    CHECK_THROWS_AS(co_direction_ratio(single, 0.5), ConfigError);
    ForwardTrace empty;
    CHECK_THROWS_AS(co_direction_ratio(empty, 0.5), ConfigError);
}

TEST_CASE("spectral_norm against known matrices") {
    Matrix d = from_rows({{3.0, 0.0}, {0.0, -5.0}});
    CHECK(spectral_norm(d) == doctest::Approx(5.0).epsilon(1e-9));

    // [[1, 1], [0, 1]] has sigma_max = golden ratio.
    Matrix j = from_rows({{1.0, 1.0}, {0.0, 1.0}});
    CHECK(spectral_norm(j) == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-9));

    // Rank-one outer product [1,2]^T [3,4]: sigma = |u| |v|.
    Matrix r = from_rows({{3.0, 4.0}, {6.0, 8.0}});
    CHECK(spectral_norm(r) == doctest::Approx(std::sqrt(5.0) * 5.0).epsilon(1e-9));
}

TEST_CASE("alignment terms vanish exactly for identical token rows") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    const std::size_t n = 4, d = 3;
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += (a(i, j) = unif(rng));
        for (std::size_t j = 0; j < n; ++j) a(i, j) /= row;
    }
    Matrix x(n, d);
    for (std::size_t t = 0; t < d; ++t) {
        const double v = unif(rng);
        for (std::size_t i = 0; i < n; ++i) x(i, t) = v;
    }
    auto terms = alignment_terms(a, x);
    for (double s : terms.self_alignment) CHECK(s == 0.0);
    for (double c : terms.cross_alignment.data) CHECK(c == 0.0);
}

TEST_CASE("alignment self terms are zero at an attention fixed point") {
    // Identity attention: each row attends only to itself, so x_i equals
    // its own context and every self distance is exactly zero.
    const std::size_t n = 3;
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) = 1.0;
    Matrix x = from_rows({{1.0, 2.0}, {-1.0, 0.5}, {3.0, 3.0}});
    auto terms = alignment_terms(a, x);
    for (double s : terms.self_alignment) CHECK(s == 0.0);
    CHECK(terms.cross_alignment(0, 1) == 0.0);  // a_ij = 0 wipes the cross terms too
}

TEST_CASE("alignment bound matches brute force on random row-stochastic instances") {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_real_distribution<double> tok(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 5);
        const std::size_t d = 1 + static_cast<std::size_t>(trial % 4);
        Matrix a(n, n), x(n, d);
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) row += (a(i, j) = unif(rng) + 1e-3);
            for (std::size_t j = 0; j < n; ++j) a(i, j) /= row;
        }
        for (double& v : x.data) v = tok(rng);

        auto terms = alignment_terms(a, x);

        // Brute force every term from the definitions.
        double self_sum = 0.0, cross_sum = 0.0, token_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> ctx(d, 0.0);
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t t = 0; t < d; ++t) ctx[t] += a(i, j) * x(j, t);
            double sd = 0.0;
            for (std::size_t t = 0; t < d; ++t) {
                const double diff = x(i, t) - ctx[t];
                sd += diff * diff;
                token_sq += x(i, t) * x(i, t);
            }
            const double self_i = (a(i, i) + 0.5) * sd;
            CHECK(std::abs(terms.self_alignment[i] - self_i) < 1e-10);
            CHECK(terms.self_alignment[i] >= 0.0);
            self_sum += self_i;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                double cd = 0.0;
                for (std::size_t t = 0; t < d; ++t) {
                    const double diff = x(j, t) - ctx[t];
                    cd += diff * diff;
                }
                CHECK(std::abs(terms.cross_alignment(i, j) - a(i, j) * cd) < 1e-10);
                CHECK(terms.cross_alignment(i, j) >= 0.0);
                cross_sum += a(i, j) * cd;
            }
        }
        const double bound = terms.spectral_norm * (self_sum + cross_sum + 0.5 * token_sq);
        CHECK(std::abs(terms.bound - bound) < 1e-10 * std::max(1.0, std::abs(bound)));
    }
}

TEST_CASE("alignment_terms rejects malformed attention") {
    Matrix bad = from_rows({{0.5, 0.4}, {0.5, 0.5}});  // first row sums to 0.9
    Matrix x = from_rows({{1.0}, {2.0}});
    CHECK_THROWS_AS(alignment_terms(bad, x), ConfigError);

    Matrix neg = from_rows({{1.5, -0.5}, {0.5, 0.5}});
    CHECK_THROWS_AS(alignment_terms(neg, x), ConfigError);

    Matrix rect(2, 3);
    CHECK_THROWS_AS(alignment_terms(rect, x), ShapeError);
}
