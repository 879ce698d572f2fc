#ifndef GRIDSEQ_EVALUATION_HPP
#define GRIDSEQ_EVALUATION_HPP

#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridseq/model.hpp"
#include "gridseq/rollout.hpp"

namespace gridseq {

// ---------------------------------------------------------------------
// Categorized metrics: C in {S, U, H}, with H evaluated over the pooled
// union (the denominators differ from any weighted average of S and U).
// ---------------------------------------------------------------------
struct CategoryMetrics {
    std::size_t trajectory_count = 0;
    double mae = 0.0;
    double mse = 0.0;
    std::map<std::size_t, double> channel_mae;
    std::map<std::size_t, double> channel_mse;
};

struct MetricsReport {
    std::map<std::string, CategoryMetrics> categories;  // present keys only
    std::string config_fingerprint;
};

inline CategoryMetrics metrics_over(const std::vector<const RolloutResult*>& preds,
                                    const std::vector<const Trajectory*>& truths,
                                    std::size_t l_seq) {
    CategoryMetrics m;
    m.trajectory_count = truths.size();
    double abs_sum = 0.0, sq_sum = 0.0;
    std::size_t total = 0;
    std::map<std::size_t, double> ch_abs, ch_sq;
    std::map<std::size_t, std::size_t> ch_n;
    for (std::size_t k = 0; k < truths.size(); ++k) {
        const Trajectory& truth = *truths[k];
        const RolloutResult& pred = *preds[k];
        for (std::size_t c = 0; c < truth.n_channels(); ++c) {
            for (std::size_t t = 0; t < pred.predicted[c].size(); ++t) {
                const double d = pred.predicted[c][t] - truth.channels[c][l_seq + t];
                abs_sum += std::abs(d);
                sq_sum += d * d;
                ch_abs[c] += std::abs(d);
                ch_sq[c] += d * d;
                ++ch_n[c];
                ++total;
            }
        }
    }
    if (total > 0) {
        m.mae = abs_sum / static_cast<double>(total);
        m.mse = sq_sum / static_cast<double>(total);
        for (auto& [c, n] : ch_n) {
            m.channel_mae[c] = ch_abs[c] / static_cast<double>(n);
            m.channel_mse[c] = ch_sq[c] / static_cast<double>(n);
        }
    }
    return m;
}

// Eq-style double-normalized sums over all trajectories, channels, and
// predicted time steps; empty categories are reported absent, not zero.
inline MetricsReport compute_metrics(const std::vector<RolloutResult>& preds,
                                     const std::vector<Trajectory>& truths, std::size_t l_seq,
                                     const std::string& fingerprint = "") {
    if (preds.size() != truths.size()) throw ShapeError("compute_metrics: count mismatch");
    MetricsReport report;
    report.config_fingerprint = fingerprint;
    std::vector<const RolloutResult*> s_p, u_p, h_p;
    std::vector<const Trajectory*> s_t, u_t, h_t;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        h_p.push_back(&preds[i]);
        h_t.push_back(&truths[i]);
        if (truths[i].stable) {
            s_p.push_back(&preds[i]);
            s_t.push_back(&truths[i]);
        } else {
            u_p.push_back(&preds[i]);
            u_t.push_back(&truths[i]);
        }
    }
    if (!s_t.empty()) report.categories["S"] = metrics_over(s_p, s_t, l_seq);
    if (!u_t.empty()) report.categories["U"] = metrics_over(u_p, u_t, l_seq);
    if (!h_t.empty()) report.categories["H"] = metrics_over(h_p, h_t, l_seq);
    return report;
}

inline nlohmann::json metrics_to_json(const MetricsReport& report) {
    nlohmann::json j;
    j["config_fingerprint"] = report.config_fingerprint;
    for (const auto& [tag, m] : report.categories) {
        nlohmann::json cat{{"trajectories", m.trajectory_count}, {"MAE", m.mae}, {"MSE", m.mse}};
        for (const auto& [c, v] : m.channel_mae) cat["channel_MAE"][std::to_string(c)] = v;
        for (const auto& [c, v] : m.channel_mse) cat["channel_MSE"][std::to_string(c)] = v;
        j["categories"][tag] = cat;
    }
    return j;
}

// Flat CSV, one row per category.
inline void metrics_to_csv(const MetricsReport& report, std::ostream& os) {
    os << "category,trajectories,MAE,MSE\n";
    os.precision(17);
    for (const auto& [tag, m] : report.categories)
        os << tag << ',' << m.trajectory_count << ',' << m.mae << ',' << m.mse << "\n";
}

// ---------------------------------------------------------------------
// Representation diagnostics.
// ---------------------------------------------------------------------
struct FeatureStability {
    double mean_cosine = 0.0;
    std::size_t used_positions = 0;
    std::size_t skipped_positions = 0;  // zero-norm rows
};

// Mean positional cosine similarity between the final two layers.
inline FeatureStability feature_stability(const ForwardTrace& trace) {
    if (trace.hidden.size() < 2) throw ConfigError("feature_stability: trace needs two layers");
    const Matrix& a = trace.hidden[trace.hidden.size() - 2];
    const Matrix& b = trace.hidden.back();
    FeatureStability out;
    double sum = 0.0;
    for (std::size_t p = 0; p < a.rows; ++p) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) {
            dot += a(p, j) * b(p, j);
            na += a(p, j) * a(p, j);
            nb += b(p, j) * b(p, j);
        }
        if (na == 0.0 || nb == 0.0) {
            ++out.skipped_positions;
            continue;
        }
        sum += dot / (std::sqrt(na) * std::sqrt(nb));
        ++out.used_positions;
    }
    if (out.used_positions > 0) out.mean_cosine = sum / static_cast<double>(out.used_positions);
    return out;
}

// Fraction of unordered distinct final-layer row pairs with cosine
// similarity above the threshold.
inline double co_direction_ratio(const ForwardTrace& trace, double threshold) {
    if (trace.hidden.empty()) throw ConfigError("co_direction_ratio: empty trace");
    const Matrix& z = trace.hidden.back();
    if (z.rows < 2) throw ConfigError("co_direction_ratio: need at least 2 patch rows");
    std::size_t qualifying = 0, pairs = 0;
    for (std::size_t p = 0; p < z.rows; ++p)
        for (std::size_t q = p + 1; q < z.rows; ++q) {
            double dot = 0.0, np = 0.0, nq = 0.0;
            for (std::size_t j = 0; j < z.cols; ++j) {
                dot += z(p, j) * z(q, j);
                np += z(p, j) * z(p, j);
                nq += z(q, j) * z(q, j);
            }
            ++pairs;
            if (np > 0.0 && nq > 0.0 && dot / (std::sqrt(np) * std::sqrt(nq)) > threshold)
                ++qualifying;
        }
    return static_cast<double>(qualifying) / static_cast<double>(pairs);
}

// ---------------------------------------------------------------------
// Attention-gradient bound terms.
// ---------------------------------------------------------------------
struct AlignmentTerms {
    std::vector<double> self_alignment;  // per row i
    Matrix cross_alignment;              // (i, j), zero on the diagonal
    double spectral_norm = 0.0;
    double bound = 0.0;
};

// Spectral norm by power iteration on A^T A.
inline double spectral_norm(const Matrix& a, std::size_t iterations = 100, double tol = 1e-10) {
    std::vector<double> v(a.cols, 1.0 / std::sqrt(static_cast<double>(a.cols)));
    double sigma = 0.0;
    for (std::size_t it = 0; it < iterations; ++it) {
        std::vector<double> av(a.rows, 0.0);
        for (std::size_t i = 0; i < a.rows; ++i)
            for (std::size_t j = 0; j < a.cols; ++j) av[i] += a(i, j) * v[j];
        std::vector<double> atav(a.cols, 0.0);
        for (std::size_t i = 0; i < a.rows; ++i)
            for (std::size_t j = 0; j < a.cols; ++j) atav[j] += a(i, j) * av[i];
        double norm = 0.0;
        for (double x : atav) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) v[j] = atav[j] / norm;
        const double next = std::sqrt(norm);
        if (std::abs(next - sigma) < tol) return next;
        sigma = next;
    }
    return sigma;
}

// Self term per i: (a_ii + 1/2) ||x_i - sum_j a_ij x_j||^2.
// Cross term per (i != j): a_ij ||x_j - sum_k a_ik x_k||^2.
// Bound: ||A||_2 (sum self + sum cross + 1/2 sum_i ||x_i||^2).
inline AlignmentTerms alignment_terms(const Matrix& a, const Matrix& x) {
    if (a.rows != a.cols || a.rows != x.rows)
        throw ShapeError("alignment_terms: A must be square with X's row count");
    for (std::size_t i = 0; i < a.rows; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) {
            if (a(i, j) < -1e-12) throw ConfigError("alignment_terms: A has negative entries");
            row += a(i, j);
        }
        if (std::abs(row - 1.0) > 1e-9)
            throw ConfigError("alignment_terms: A is not row-stochastic");
    }
    const std::size_t n = a.rows, d = x.cols;
    AlignmentTerms out;
    out.self_alignment.assign(n, 0.0);
    out.cross_alignment = Matrix(n, n);
    double self_sum = 0.0, cross_sum = 0.0, token_sq = 0.0;
    std::vector<double> diff(d);
    // x_r - sum_j a_ij x_j is accumulated as sum_j a_ij (x_r - x_j): for
    // row-stochastic A the forms agree, and this one is exactly zero
    // whenever the participating token rows are bitwise identical.
    auto context_dist = [&](std::size_t r, std::size_t i) {
        std::fill(diff.begin(), diff.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t t = 0; t < d; ++t) diff[t] += a(i, j) * (x(r, t) - x(j, t));
        double dist = 0.0;
        for (double v : diff) dist += v * v;
        return dist;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < d; ++t) token_sq += x(i, t) * x(i, t);
        out.self_alignment[i] = (a(i, i) + 0.5) * context_dist(i, i);
        self_sum += out.self_alignment[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            out.cross_alignment(i, j) = a(i, j) * context_dist(j, i);
            cross_sum += out.cross_alignment(i, j);
        }
    }
    out.spectral_norm = spectral_norm(a);
    out.bound = out.spectral_norm * (self_sum + cross_sum + 0.5 * token_sq);
    return out;
}

}  // namespace gridseq

#endif  // GRIDSEQ_EVALUATION_HPP
