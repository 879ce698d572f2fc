#ifndef GRIDSEQ_SIMULATOR_HPP
#define GRIDSEQ_SIMULATOR_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridseq/core.hpp"

namespace gridseq {

struct InfeasibleDispatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Reduced complex admittance among machine internal nodes (Kron-style
// pre-reduced; the DAE algebraic part is eliminated analytically).
struct AdmittanceMatrix {
    std::size_t n = 0;
    std::vector<std::complex<double>> y;  // row-major n x n

    AdmittanceMatrix() = default;
    explicit AdmittanceMatrix(std::size_t n_) : n(n_), y(n_ * n_) {}
    std::complex<double>& operator()(std::size_t i, std::size_t j) { return y[i * n + j]; }
    std::complex<double> operator()(std::size_t i, std::size_t j) const { return y[i * n + j]; }
};

struct PowerSystemSpec {
    std::size_t n_g = 0;
    std::vector<double> inertia;   // H, seconds
    std::vector<double> damping;   // D, p.u.
    std::vector<double> p_mech;    // Pm, p.u.
    std::vector<double> voltage;   // E, p.u.
    AdmittanceMatrix y_pre;
    std::vector<AdmittanceMatrix> y_fault_by_line;
    std::vector<AdmittanceMatrix> y_post_by_line;
    double omega_s = 2.0 * M_PI * 60.0;

    std::size_t line_count() const { return y_fault_by_line.size(); }

    // Reference machine: the stiffest one (largest inertia), index ties
    // broken by lowest index. Its angle is pinned at 0 in dispatch.
    std::size_t reference_machine() const {
        std::size_t ref = 0;
        for (std::size_t i = 1; i < n_g; ++i)
            if (inertia[i] > inertia[ref]) ref = i;
        return ref;
    }

    void validate() const {
        if (n_g == 0) throw ConfigError("system spec: n_g must be positive");
        auto need = [&](const std::vector<double>& v, const char* name) {
            if (v.size() != n_g) throw ConfigError(std::string("system spec: bad length for ") + name);
        };
        need(inertia, "H");
        need(damping, "D");
        need(p_mech, "Pm");
        need(voltage, "E");
        for (double h : inertia)
            if (h <= 0.0) throw ConfigError("system spec: H must be positive");
        for (double d : damping)
            if (d < 0.0) throw ConfigError("system spec: D must be nonnegative");
        if (y_pre.n != n_g) throw ConfigError("system spec: Y_pre must be n_g x n_g");
        if (y_fault_by_line.size() != y_post_by_line.size())
            throw ConfigError("system spec: fault/post line counts differ");
        for (const auto& m : y_fault_by_line)
            if (m.n != n_g) throw ConfigError("system spec: Y_fault dimension mismatch");
        for (const auto& m : y_post_by_line)
            if (m.n != n_g) throw ConfigError("system spec: Y_post dimension mismatch");
    }
};

struct FaultScenario {
    std::vector<std::size_t> line_ids;  // faulted line(s); first entry drives the switch
    double t_fault = 0.5;
    double t_clear = 0.6;
    double load_scale = 1.0;
};

struct Trajectory {
    double dt = 0.02;
    std::size_t steps = 0;                       // T
    std::vector<std::vector<double>> channels;   // n_x = 2*n_g series, each of length T
    bool stable = true;
    std::vector<std::uint8_t> oos;               // per-machine out-of-step flags
    bool predicted = false;                      // provenance: model rollout vs simulation

    std::size_t n_channels() const { return channels.size(); }
};

struct SimulationConfig {
    double horizon = 10.0;
    double dt = 0.02;
    std::size_t substeps = 4;      // RK4 substeps per output sample
    double oos_threshold = M_PI;   // COI-relative angle bound, rad
};

// P_e,i = sum_j E_i E_j (G_ij cos(d_i - d_j) + B_ij sin(d_i - d_j)).
inline std::vector<double> electrical_power(const AdmittanceMatrix& y,
                                            const std::vector<double>& e,
                                            const std::vector<double>& delta) {
    const std::size_t n = y.n;
    if (e.size() != n || delta.size() != n)
        throw ShapeError("electrical_power: dimension mismatch");
    std::vector<double> p(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double dij = delta[i] - delta[j];
            s += e[i] * e[j] * (y(i, j).real() * std::cos(dij) + y(i, j).imag() * std::sin(dij));
        }
        p[i] = s;
    }
    return p;
}

// State layout: [delta_1..delta_n, dw_1..dw_n] with dw in p.u. speed
// deviation. d(delta)/dt = w_s*dw; d(dw)/dt = (Pm - Pe - D*dw)/(2H).
inline std::vector<double> swing_derivatives(const PowerSystemSpec& spec,
                                             const AdmittanceMatrix& active_y,
                                             const std::vector<double>& p_mech_eff,
                                             const std::vector<double>& state) {
    const std::size_t n = spec.n_g;
    if (state.size() != 2 * n) throw ShapeError("swing_derivatives: state must have 2*n_g entries");
    std::vector<double> delta(state.begin(), state.begin() + n);
    std::vector<double> pe = electrical_power(active_y, spec.voltage, delta);
    std::vector<double> deriv(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double dw = state[n + i];
        deriv[i] = spec.omega_s * dw;
        deriv[n + i] = (p_mech_eff[i] - pe[i] - spec.damping[i] * dw) / (2.0 * spec.inertia[i]);
    }
    return deriv;
}

namespace detail {

// Gaussian elimination with partial pivoting; systems are tiny.
inline std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (std::abs(a[piv * n + col]) < 1e-14)
            throw InfeasibleDispatchError("singular Jacobian in equilibrium solve");
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[col * n + j], a[piv * n + j]);
            std::swap(b[col], b[piv]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / a[col * n + col];
            for (std::size_t j = col; j < n; ++j) a[r * n + j] -= f * a[col * n + j];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i * n + j] * x[j];
        x[i] = s / a[i * n + i];
    }
    return x;
}

}  // namespace detail

struct Dispatch {
    std::vector<double> delta;       // equilibrium angles, reference at 0
    std::vector<double> p_mech_eff;  // effective mechanical powers after slack pickup
};

// Newton iteration on Pm*load_scale - P_e(delta) = 0 with the reference
// machine's angle fixed at 0. The reference machine absorbs network
// losses (slack re-dispatch), which makes the full residual vanish.
inline Dispatch solve_equilibrium(const PowerSystemSpec& spec, double load_scale) {
    const std::size_t n = spec.n_g;
    const std::size_t ref = spec.reference_machine();
    std::vector<std::size_t> free_idx;
    for (std::size_t i = 0; i < n; ++i)
        if (i != ref) free_idx.push_back(i);
    const std::size_t m = free_idx.size();

    std::vector<double> delta(n, 0.0);
    std::vector<double> target(n);
    for (std::size_t i = 0; i < n; ++i) target[i] = spec.p_mech[i] * load_scale;

    for (int iter = 0; iter < 100; ++iter) {
        std::vector<double> pe = electrical_power(spec.y_pre, spec.voltage, delta);
        double max_res = 0.0;
        std::vector<double> res(m);
        for (std::size_t a = 0; a < m; ++a) {
            res[a] = target[free_idx[a]] - pe[free_idx[a]];
            max_res = std::max(max_res, std::abs(res[a]));
        }
        if (max_res < 1e-10) {
            Dispatch out;
            out.delta = delta;
            out.p_mech_eff = target;
            out.p_mech_eff[ref] = pe[ref];  // slack pickup
            for (double d : delta)
                if (!std::isfinite(d)) throw InfeasibleDispatchError("non-finite equilibrium");
            return out;
        }
        if (m == 0) break;
        // Jacobian of -residual: dPe_i/ddelta_j.
        std::vector<double> jac(m * m, 0.0);
        for (std::size_t a = 0; a < m; ++a) {
            const std::size_t i = free_idx[a];
            for (std::size_t b = 0; b < m; ++b) {
                const std::size_t j = free_idx[b];
                double v = 0.0;
                if (i == j) {
                    for (std::size_t k2 = 0; k2 < n; ++k2) {
                        if (k2 == i) continue;
                        const double dij = delta[i] - delta[k2];
                        v += spec.voltage[i] * spec.voltage[k2] *
                             (-spec.y_pre(i, k2).real() * std::sin(dij) +
                              spec.y_pre(i, k2).imag() * std::cos(dij));
                    }
                } else {
                    const double dij = delta[i] - delta[j];
                    v = spec.voltage[i] * spec.voltage[j] *
                        (spec.y_pre(i, j).real() * std::sin(dij) -
                         spec.y_pre(i, j).imag() * std::cos(dij));
                }
                jac[a * m + b] = v;
            }
        }
        std::vector<double> step = detail::solve_linear(jac, res);
        double norm = 0.0;
        for (double s : step) norm = std::max(norm, std::abs(s));
        const double damp = norm > 0.5 ? 0.5 / norm : 1.0;
        for (std::size_t a = 0; a < m; ++a) delta[free_idx[a]] += damp * step[a];
    }
    throw InfeasibleDispatchError("equilibrium Newton did not converge in 100 iterations");
}

namespace detail {

inline void rk4_step(const PowerSystemSpec& spec, const AdmittanceMatrix& y,
                     const std::vector<double>& pm, std::vector<double>& state, double h) {
    const std::size_t n = state.size();
    std::vector<double> k1 = swing_derivatives(spec, y, pm, state);
    std::vector<double> tmp(n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * h * k1[i];
    std::vector<double> k2 = swing_derivatives(spec, y, pm, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * h * k2[i];
    std::vector<double> k3 = swing_derivatives(spec, y, pm, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + h * k3[i];
    std::vector<double> k4 = swing_derivatives(spec, y, pm, tmp);
    for (std::size_t i = 0; i < n; ++i)
        state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

// Integrates from t0 to t1 under one admittance regime, splitting into
// steps no longer than h_max and landing exactly on t1.
inline void integrate_segment(const PowerSystemSpec& spec, const AdmittanceMatrix& y,
                              const std::vector<double>& pm, std::vector<double>& state,
                              double t0, double t1, double h_max) {
    const double span = t1 - t0;
    if (span <= 0.0) return;
    const std::size_t nsteps = static_cast<std::size_t>(std::ceil(span / h_max - 1e-12));
    const double h = span / static_cast<double>(std::max<std::size_t>(nsteps, 1));
    for (std::size_t s = 0; s < std::max<std::size_t>(nsteps, 1); ++s)
        rk4_step(spec, y, pm, state, h);
}

}  // namespace detail

// COI-relative out-of-step classification: machine i is OOS iff
// max_t |delta_i(t) - delta_COI(t)| > threshold (strict).
inline std::pair<bool, std::vector<std::uint8_t>> classify_stability(const Trajectory& traj,
                                                                     const std::vector<double>& inertia,
                                                                     double threshold_angle) {
    const std::size_t n = inertia.size();
    const double h_total = std::accumulate(inertia.begin(), inertia.end(), 0.0);
    std::vector<double> worst(n, 0.0);
    for (std::size_t t = 0; t < traj.steps; ++t) {
        double coi = 0.0;
        for (std::size_t i = 0; i < n; ++i) coi += inertia[i] * traj.channels[i][t];
        coi /= h_total;
        for (std::size_t i = 0; i < n; ++i)
            worst[i] = std::max(worst[i], std::abs(traj.channels[i][t] - coi));
    }
    std::vector<std::uint8_t> oos(n, 0);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        oos[i] = worst[i] > threshold_angle ? 1 : 0;
        any = any || oos[i];
    }
    return {!any, oos};
}

// Classic RK4 with exact event splitting at t_fault / t_clear; output
// sampled every cfg.dt starting at t = 0.
inline Trajectory integrate(const PowerSystemSpec& spec, const FaultScenario& scenario,
                            const SimulationConfig& cfg, const Dispatch& dispatch) {
    spec.validate();
    const std::size_t n = spec.n_g;
    const std::size_t t_count = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));
    const double h_max = cfg.dt / static_cast<double>(cfg.substeps);

    const bool faulted = !scenario.line_ids.empty();
    const AdmittanceMatrix* y_fault = &spec.y_pre;
    const AdmittanceMatrix* y_post = &spec.y_pre;
    if (faulted) {
        const std::size_t line = scenario.line_ids.front();
        if (line >= spec.line_count()) throw ConfigError("integrate: fault line id out of range");
        y_fault = &spec.y_fault_by_line[line];
        y_post = &spec.y_post_by_line[line];
    }

    std::vector<double> state(2 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) state[i] = dispatch.delta[i];

    Trajectory traj;
    traj.dt = cfg.dt;
    traj.steps = t_count;
    traj.channels.assign(2 * n, std::vector<double>(t_count, 0.0));

    auto record = [&](std::size_t k) {
        for (std::size_t i = 0; i < 2 * n; ++i) {
            if (!std::isfinite(state[i]))
                throw DivergenceError("integration blow-up at t=" +
                                      std::to_string(static_cast<double>(k) * cfg.dt));
            traj.channels[i][k] = state[i];
        }
    };
    record(0);

    double t = 0.0;
    for (std::size_t k = 1; k < t_count; ++k) {
        const double target = static_cast<double>(k) * cfg.dt;
        while (t < target - 1e-12) {
            double stop = target;
            const AdmittanceMatrix* active = &spec.y_pre;
            if (faulted && t < scenario.t_fault - 1e-12) {
                stop = std::min(stop, scenario.t_fault);
                active = &spec.y_pre;
            } else if (faulted && t < scenario.t_clear - 1e-12) {
                stop = std::min(stop, scenario.t_clear);
                active = y_fault;
            } else if (faulted) {
                active = y_post;
            }
            detail::integrate_segment(spec, *active, dispatch.p_mech_eff, state, t, stop, h_max);
            t = stop;
        }
        t = target;
        record(k);
    }
    auto [stable, oos] = classify_stability(traj, spec.inertia, cfg.oos_threshold);
    traj.stable = stable;
    traj.oos = oos;
    return traj;
}

// Kinetic + potential energy for lossless (G = 0) systems; used by the
// conservation property check.
inline double total_energy(const PowerSystemSpec& spec, const Dispatch& dispatch,
                           const std::vector<double>& state, const std::vector<double>& delta0) {
    const std::size_t n = spec.n_g;
    double kinetic = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        kinetic += spec.inertia[i] * spec.omega_s * state[n + i] * state[n + i];
    double potential = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        potential -= dispatch.p_mech_eff[i] * (state[i] - delta0[i]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double b = spec.y_pre(i, j).imag() * spec.voltage[i] * spec.voltage[j];
            potential -= b * (std::cos(state[i] - state[j]) - std::cos(delta0[i] - delta0[j]));
        }
    return kinetic + potential;
}

struct DatasetOptions {
    SimulationConfig sim;
    double load_min = 0.7;
    double load_max = 1.3;
    double t_fault = 0.5;
    double max_clear = 0.3;
    std::size_t contingency_order = 1;  // distinct fault locations per operating condition
};

struct Dataset {
    std::vector<Trajectory> trajectories;
    std::size_t skipped = 0;  // infeasible operating conditions after resampling
};

// Deterministic given the seed: per-scenario RNG streams are derived
// from (seed, scenario index) so generation is order-independent.
inline Dataset generate_dataset(const PowerSystemSpec& spec, std::size_t n_scenarios,
                                std::uint64_t rng_seed, const DatasetOptions& opt) {
    spec.validate();
    if (spec.line_count() == 0) throw ConfigError("generate_dataset: spec has no fault lines");
    Dataset out;
    std::vector<std::vector<Trajectory>> per_scenario(n_scenarios);
    std::vector<std::uint8_t> skipped(n_scenarios, 0);

    parallel_for(n_scenarios, [&](std::size_t idx) {
        Rng rng = make_rng(rng_seed, idx);
        std::uniform_real_distribution<double> load_dist(opt.load_min, opt.load_max);
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        Dispatch dispatch;
        double load_scale = 0.0;
        bool feasible = false;
        for (int attempt = 0; attempt < 10 && !feasible; ++attempt) {
            load_scale = load_dist(rng);
            try {
                dispatch = solve_equilibrium(spec, load_scale);
                feasible = true;
            } catch (const InfeasibleDispatchError&) {
            }
        }
        if (!feasible) {
            skipped[idx] = 1;
            return;
        }

        std::vector<std::size_t> lines(spec.line_count());
        std::iota(lines.begin(), lines.end(), 0);
        std::shuffle(lines.begin(), lines.end(), rng);
        const std::size_t order = std::min(opt.contingency_order, lines.size());
        for (std::size_t c = 0; c < order; ++c) {
            FaultScenario sc;
            sc.line_ids = {lines[c]};
            sc.load_scale = load_scale;
            sc.t_fault = opt.t_fault;
            sc.t_clear = opt.t_fault + opt.max_clear * (1.0 - unit(rng));  // U(0, max]
            per_scenario[idx].push_back(integrate(spec, sc, opt.sim, dispatch));
        }
    });

    for (std::size_t i = 0; i < n_scenarios; ++i) {
        out.skipped += skipped[i];
        for (auto& t : per_scenario[i]) out.trajectories.push_back(std::move(t));
    }
    return out;
}

// ---------------------------------------------------------------------
// System spec JSON file.
// ---------------------------------------------------------------------
inline AdmittanceMatrix admittance_from_json(const nlohmann::json& j, std::size_t n,
                                             const char* what) {
    if (!j.is_array() || j.size() != n) throw IoError(std::string("bad admittance rows: ") + what);
    AdmittanceMatrix m(n);
    for (std::size_t r = 0; r < n; ++r) {
        if (!j[r].is_array() || j[r].size() != n)
            throw IoError(std::string("bad admittance cols: ") + what);
        for (std::size_t c = 0; c < n; ++c) {
            const auto& cell = j[r][c];
            if (!cell.is_array() || cell.size() != 2)
                throw IoError(std::string("admittance entries must be [re, im]: ") + what);
            m(r, c) = {cell[0].get<double>(), cell[1].get<double>()};
        }
    }
    return m;
}

inline PowerSystemSpec load_system_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open system spec: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("system spec parse error: " + std::string(e.what()));
    }
    PowerSystemSpec spec;
    spec.n_g = j.at("n_g").get<std::size_t>();
    spec.inertia = j.at("H").get<std::vector<double>>();
    spec.damping = j.at("D").get<std::vector<double>>();
    spec.p_mech = j.at("Pm").get<std::vector<double>>();
    spec.voltage = j.at("E").get<std::vector<double>>();
    spec.omega_s = j.at("omega_s").get<double>();
    spec.y_pre = admittance_from_json(j.at("Y_pre"), spec.n_g, "Y_pre");
    for (const auto& m : j.at("Y_fault_by_line"))
        spec.y_fault_by_line.push_back(admittance_from_json(m, spec.n_g, "Y_fault_by_line"));
    for (const auto& m : j.at("Y_post_by_line"))
        spec.y_post_by_line.push_back(admittance_from_json(m, spec.n_g, "Y_post_by_line"));
    spec.validate();
    return spec;
}

}  // namespace gridseq

#endif  // GRIDSEQ_SIMULATOR_HPP
