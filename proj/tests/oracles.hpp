#pragma once

// Independent oracles used by the unit and acceptance suites. Everything
// here deliberately avoids the closed forms under test: composite
// trapezoid instead of Gauss-Kronrod, a discretized functional minimizer
// instead of the g-transform solution, central finite differences instead
// of analytic gradients.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "inforeg/dataset.hpp"
#include "inforeg/density.hpp"
#include "inforeg/nonparam1d.hpp"

namespace oracles {

using inforeg::Vec;

/// Composite trapezoid rule at n+1 equally spaced points.
template <class F>
double trapezoid(F&& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double sum = 0.5 * (f(a) + f(b));
    for (int i = 1; i < n; ++i) sum += f(a + h * i);
    return sum * h;
}

/// Relative error between an analytic gradient and central finite
/// differences of the objective (step per spec).
template <class F>
double gradient_rel_error(F&& objective, const Vec& theta,
                          const Vec& analytic, double step = 1e-5) {
    Vec fd(theta.size());
    Vec t = theta;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        t[i] = theta[i] + step;
        const double up = objective(t);
        t[i] = theta[i] - step;
        const double dn = objective(t);
        t[i] = theta[i];
        fd[i] = (up - dn) / (2.0 * step);
    }
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i) {
        const double d = analytic[i] - fd[i];
        diff += d * d;
        norm += fd[i] * fd[i];
    }
    return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-10);
}

// ---------------------------------------------------------------------------
// Discretized 1D functional minimization:
//   minimize  sum_cells p(mid) (df/dx)^2 / (f(1-f)) dx
// over piecewise-linear f with fixed endpoints, by damped Newton on the
// interior values (tridiagonal system) with gradient fallback. The
// per-cell 1/(f(1-f)) factor uses the trapezoid of the cell endpoints.

struct FunctionalSolution {
    std::vector<double> xs;
    std::vector<double> fs;
    double energy = 0.0;

    double interpolate(double x) const {
        if (x <= xs.front()) return fs.front();
        if (x >= xs.back()) return fs.back();
        const auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const std::size_t j = static_cast<std::size_t>(
            std::distance(xs.begin(), it));
        const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
        return fs[j - 1] + w * (fs[j] - fs[j - 1]);
    }
};

namespace detail {

inline double psi(double f) { return 1.0 / (f * (1.0 - f)); }
inline double psi_d(double f) {
    const double phi = f * (1.0 - f);
    return -(1.0 - 2.0 * f) / (phi * phi);
}
inline double psi_dd(double f) {
    const double phi = f * (1.0 - f);
    const double d = 1.0 - 2.0 * f;
    return 2.0 / (phi * phi) + 2.0 * d * d / (phi * phi * phi);
}

struct Discretization {
    std::vector<double> cw; // p(mid_i) / (2 dx) per cell
    double energy(const std::vector<double>& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < f.size(); ++i) {
            const double d = f[i + 1] - f[i];
            acc += cw[i] * d * d * (psi(f[i]) + psi(f[i + 1]));
        }
        return acc;
    }
};

} // namespace detail

inline FunctionalSolution minimize_interval_functional(
    const inforeg::Density& density, double a, double b, double fa, double fb,
    int cells) {
    if (!(a < b) || cells < 2)
        throw std::invalid_argument("minimize_interval_functional: bad input");
    const double dx = (b - a) / cells;
    FunctionalSolution sol;
    sol.xs.resize(cells + 1);
    sol.fs.resize(cells + 1);
    detail::Discretization disc;
    disc.cw.resize(cells);
    for (int i = 0; i <= cells; ++i) {
        sol.xs[i] = a + dx * i;
        sol.fs[i] = fa + (fb - fa) * (static_cast<double>(i) / cells);
    }
    for (int i = 0; i < cells; ++i)
        disc.cw[i] = density.pdf1(a + dx * (i + 0.5)) / (2.0 * dx);

    auto& f = sol.fs;
    const std::size_t n = f.size();
    double energy = disc.energy(f);
    std::vector<double> grad(n, 0.0), diag(n, 0.0), off(n, 0.0), step(n, 0.0);
    for (int iter = 0; iter < 400; ++iter) {
        std::fill(grad.begin(), grad.end(), 0.0);
        std::fill(diag.begin(), diag.end(), 0.0);
        std::fill(off.begin(), off.end(), 0.0);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double d = f[i + 1] - f[i];
            const double c = disc.cw[i];
            const double pi = detail::psi(f[i]), pj = detail::psi(f[i + 1]);
            const double pi1 = detail::psi_d(f[i]),
                         pj1 = detail::psi_d(f[i + 1]);
            grad[i] += c * (-2.0 * d * (pi + pj) + d * d * pi1);
            grad[i + 1] += c * (2.0 * d * (pi + pj) + d * d * pj1);
            diag[i] += c * (2.0 * (pi + pj) - 4.0 * d * pi1 +
                            d * d * detail::psi_dd(f[i]));
            diag[i + 1] += c * (2.0 * (pi + pj) + 4.0 * d * pj1 +
                                d * d * detail::psi_dd(f[i + 1]));
            off[i] += c * (-2.0 * (pi + pj) - 2.0 * d * pj1 + 2.0 * d * pi1);
        }
        // Interior gradient norm (endpoints fixed).
        double gmax = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i)
            gmax = std::max(gmax, std::abs(grad[i]));
        if (gmax < 1e-11 * std::max(1.0, std::abs(energy))) break;

        // Newton direction on the interior block; Thomas with positivity
        // check, else fall back to scaled gradient descent.
        bool newton_ok = n > 2;
        if (newton_ok) {
            std::vector<double> td(diag.begin() + 1, diag.end() - 1);
            std::vector<double> to(off.begin() + 1, off.end() - 1);
            std::vector<double> rhs(grad.begin() + 1, grad.end() - 1);
            if (!to.empty()) to.pop_back();
            const std::size_t m = td.size();
            for (std::size_t i = 0; i < m && newton_ok; ++i) {
                if (!(td[i] > 0.0)) newton_ok = false;
                if (i + 1 < m) {
                    const double w = to[i] / td[i];
                    td[i + 1] -= w * to[i];
                    rhs[i + 1] -= w * rhs[i];
                }
            }
            if (newton_ok) {
                rhs[m - 1] /= td[m - 1];
                for (std::size_t i = m - 1; i-- > 0;)
                    rhs[i] = (rhs[i] - to[i] * rhs[i + 1]) / td[i];
                step[0] = step[n - 1] = 0.0;
                for (std::size_t i = 0; i < m; ++i) step[i + 1] = -rhs[i];
            }
        }
        if (!newton_ok) {
            double scale = 0.0;
            for (std::size_t i = 1; i + 1 < n; ++i)
                scale = std::max(scale, std::abs(grad[i]));
            for (std::size_t i = 0; i < n; ++i)
                step[i] = (i == 0 || i + 1 == n)
                              ? 0.0
                              : -grad[i] * (0.01 / std::max(scale, 1e-12));
        }

        double alpha = 1.0;
        bool moved = false;
        for (int h = 0; h < 60; ++h) {
            std::vector<double> cand = f;
            for (std::size_t i = 1; i + 1 < n; ++i)
                cand[i] = std::clamp(f[i] + alpha * step[i], 1e-9,
                                     1.0 - 1e-9);
            const double ce = disc.energy(cand);
            if (std::isfinite(ce) && ce < energy) {
                f = std::move(cand);
                energy = ce;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) break;
    }
    sol.energy = energy;
    return sol;
}

// ---------------------------------------------------------------------------
// 2-anchor grid search over the Eq.-8 objective (the interval regularizer
// closed form is validated separately by the functional minimizer above).

struct GridSearchResult {
    double f1 = 0.0, f2 = 0.0;
    double objective = 0.0;
};

inline GridSearchResult anchor_grid_search(
    int pos1, int neg1, int pos2, int neg2, double recint, double lambda,
    int grid = 400, double eps = 1e-6) {
    GridSearchResult best;
    bool first = true;
    for (int i = 0; i < grid; ++i) {
        const double f1 =
            eps + (1.0 - 2.0 * eps) * (static_cast<double>(i) / (grid - 1));
        for (int j = 0; j < grid; ++j) {
            const double f2 = eps + (1.0 - 2.0 * eps) *
                                        (static_cast<double>(j) / (grid - 1));
            const double obj =
                pos1 * std::log(f1) + neg1 * std::log(1.0 - f1) +
                pos2 * std::log(f2) + neg2 * std::log(1.0 - f2) -
                lambda * inforeg::interval_regularizer(f1, f2, recint);
            if (first || obj > best.objective) {
                best = {f1, f2, obj};
                first = false;
            }
        }
    }
    return best;
}

} // namespace oracles
