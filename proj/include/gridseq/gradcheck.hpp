#ifndef GRIDSEQ_GRADCHECK_HPP
#define GRIDSEQ_GRADCHECK_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "gridseq/core.hpp"

namespace gridseq {

// Central-difference verification harness. `f` re-evaluates the scalar
// objective after coordinate perturbations made through `coords`
// (pointers into live parameter storage); `analytic` holds the
// matching analytic gradient entries. Returns the max over checked
// coordinates of |analytic - numeric| / max(1, |numeric|).
template <class F>
double grad_check(F&& f, const std::vector<double*>& coords, const std::vector<double>& analytic,
                  double h, std::size_t max_coords = 0, std::uint64_t seed = 1) {
    if (h <= 0.0) throw ConfigError("grad_check: h must be positive");
    if (coords.size() != analytic.size()) throw ShapeError("grad_check: size mismatch");

    std::vector<std::size_t> order(coords.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (max_coords > 0 && max_coords < coords.size()) {
        Rng rng = make_rng(seed);
        std::shuffle(order.begin(), order.end(), rng);
        order.resize(max_coords);
    }

    double worst = 0.0;
    for (std::size_t idx : order) {
        double* w = coords[idx];
        const double saved = *w;
        *w = saved + h;
        const double fp = f();
        *w = saved - h;
        const double fm = f();
        *w = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw DivergenceError("grad_check: non-finite objective at perturbed point");
        const double numeric = (fp - fm) / (2.0 * h);
        const double err = std::abs(analytic[idx] - numeric) / std::max(1.0, std::abs(numeric));
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace gridseq

#endif  // GRIDSEQ_GRADCHECK_HPP
