#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "logistic.hpp"
#include "rng.hpp"

namespace inforeg {

enum class AscentMethod { gradient, newton };

struct OptimizerConfig {
    AscentMethod method = AscentMethod::gradient;
    double step = 1.0;        // initial step (gradient) / damping (newton)
    double grad_tol = 1e-6;
    int max_iter = 500;
    double backtrack_shrink = 0.5;
    int max_halvings = 50;

    void validate() const {
        if (!(grad_tol > 0.0))
            throw std::invalid_argument("OptimizerConfig: grad_tol > 0");
        if (max_iter < 1)
            throw std::invalid_argument("OptimizerConfig: max_iter >= 1");
        if (!(backtrack_shrink > 0.0 && backtrack_shrink < 1.0))
            throw std::invalid_argument(
                "OptimizerConfig: shrink factor must be in (0,1)");
        if (!(step > 0.0))
            throw std::invalid_argument("OptimizerConfig: step > 0");
    }
};

/// Strictly increasing lambda ladder ending at the target; the solver is
/// warm-started along it.
struct ContinuationSchedule {
    std::vector<double> lambdas;

    void validate(double target) const {
        if (lambdas.empty())
            throw std::invalid_argument("ContinuationSchedule: empty");
        for (std::size_t i = 1; i < lambdas.size(); ++i)
            if (!(lambdas[i] > lambdas[i - 1]))
                throw std::invalid_argument(
                    "ContinuationSchedule: must be strictly increasing");
        if (lambdas.back() != target)
            throw std::invalid_argument(
                "ContinuationSchedule: must end at the target lambda");
    }
};

/// Default ladder: `steps` geometric points from target/100 up to target.
inline ContinuationSchedule geometric_schedule(double target, int steps = 8) {
    ContinuationSchedule s;
    if (target == 0.0 || steps <= 1) {
        s.lambdas = {target};
        return s;
    }
    const double lo = target / 100.0;
    for (int i = 0; i < steps; ++i)
        s.lambdas.push_back(
            lo * std::pow(target / lo,
                          static_cast<double>(i) / (steps - 1)));
    s.lambdas.back() = target;
    return s;
}

enum class StopReason { converged, iteration_cap, stalled };

struct MaximizeResult {
    Vec theta;
    double objective = 0.0;
    std::vector<std::pair<int, double>> trace;
    StopReason reason = StopReason::converged;
    int iterations = 0;
    int newton_fallbacks = 0; // Newton steps replaced by gradient steps
};

using ObjectiveFn = std::function<double(const Vec&)>;
using GradientFn = std::function<Vec(const Vec&)>;

namespace detail {

inline double norm2(const Vec& v) { return std::sqrt(norm_sq(v)); }

inline bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

/// Central finite differences of an analytic gradient; step 1e-4.
inline std::vector<Vec> hessian_fd(const GradientFn& grad, const Vec& theta,
                                   double h = 1e-4) {
    const std::size_t n = theta.size();
    std::vector<Vec> hess(n, Vec(n, 0.0));
    Vec t = theta;
    for (std::size_t j = 0; j < n; ++j) {
        t[j] = theta[j] + h;
        const Vec gp = grad(t);
        t[j] = theta[j] - h;
        const Vec gm = grad(t);
        t[j] = theta[j];
        for (std::size_t i = 0; i < n; ++i)
            hess[i][j] = (gp[i] - gm[i]) / (2.0 * h);
    }
    return hess;
}

/// Cholesky solve of A x = b for symmetric positive definite A.
/// Returns nullopt when A is not (numerically) positive definite.
inline std::optional<Vec> cholesky_solve(std::vector<Vec> a, Vec b) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        double d = a[k][k];
        for (std::size_t j = 0; j < k; ++j) d -= a[k][j] * a[k][j];
        if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
        a[k][k] = std::sqrt(d);
        for (std::size_t i = k + 1; i < n; ++i) {
            double s = a[i][k];
            for (std::size_t j = 0; j < k; ++j) s -= a[i][j] * a[k][j];
            a[i][k] = s / a[k][k];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t j = 0; j < i; ++j) s -= a[i][j] * b[j];
        b[i] = s / a[i][i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[j][i] * b[j];
        b[i] = s / a[i][i];
    }
    return b;
}

} // namespace detail

/// Backtracking ascent on a (possibly non-concave) objective. Gradient
/// steps by default; damped Newton uses a finite-difference Hessian of the
/// analytic gradient and falls back to a gradient step whenever the Newton
/// system is not usable (recorded in newton_fallbacks).
inline MaximizeResult maximize(const ObjectiveFn& objective,
                               const GradientFn& gradient, Vec theta0,
                               const OptimizerConfig& config) {
    config.validate();
    MaximizeResult res;
    res.theta = std::move(theta0);
    res.objective = objective(res.theta);
    Vec g = gradient(res.theta);
    if (!std::isfinite(res.objective) || !detail::all_finite(g))
        throw numerical_error("maximize: non-finite objective at theta0");
    res.trace.emplace_back(0, res.objective);

    const double armijo = 1e-4;
    res.reason = StopReason::iteration_cap;
    for (int iter = 1; iter <= config.max_iter; ++iter) {
        const double gnorm = detail::norm2(g);
        if (gnorm <= config.grad_tol) {
            res.reason = StopReason::converged;
            break;
        }
        // Ascent direction.
        Vec dir = g;
        if (config.method == AscentMethod::newton) {
            bool used_newton = false;
            auto hess = detail::hessian_fd(gradient, res.theta);
            // Solve (-H) d = g; -H is SPD near a strict maximum.
            for (auto& row : hess)
                for (double& v : row) v = -v;
            // Symmetrize the FD Hessian before factoring.
            for (std::size_t i = 0; i < hess.size(); ++i)
                for (std::size_t j = i + 1; j < hess.size(); ++j) {
                    const double m = 0.5 * (hess[i][j] + hess[j][i]);
                    hess[i][j] = hess[j][i] = m;
                }
            if (auto d = detail::cholesky_solve(std::move(hess), g)) {
                if (detail::all_finite(*d) && detail::dot(*d, g) > 0.0) {
                    dir = std::move(*d);
                    used_newton = true;
                }
            }
            if (!used_newton) ++res.newton_fallbacks;
        }

        const double slope = detail::dot(dir, g);
        double alpha = config.step;
        bool accepted = false;
        for (int h = 0; h <= config.max_halvings; ++h) {
            Vec cand = res.theta;
            for (std::size_t i = 0; i < cand.size(); ++i)
                cand[i] += alpha * dir[i];
            const double val = objective(cand);
            if (std::isfinite(val) &&
                val >= res.objective + armijo * alpha * slope) {
                res.theta = std::move(cand);
                res.objective = val;
                accepted = true;
                break;
            }
            alpha *= config.backtrack_shrink;
        }
        res.iterations = iter;
        if (!accepted) {
            res.reason = StopReason::stalled;
            break;
        }
        res.trace.emplace_back(iter, res.objective);
        g = gradient(res.theta);
        if (!detail::all_finite(g))
            throw numerical_error("maximize: non-finite gradient");
    }
    if (res.reason == StopReason::iteration_cap &&
        detail::norm2(g) <= config.grad_tol)
        res.reason = StopReason::converged;
    return res;
}

/// Fit the regularized logistic objective with `config.restarts` random
/// initializations (theta0 ~ N(0, 0.1^2 I), seeded per restart). With a
/// continuation schedule, each lambda is solved warm-started from the
/// previous solution. Returns the best final objective across restarts;
/// ties break toward the lower restart index.
inline FitResult fit(const LabeledDataset& labeled,
                     const UnlabeledDataset& unlabeled, FitConfig fit_config,
                     const OptimizerConfig& opt_config,
                     const std::optional<ContinuationSchedule>& schedule =
                         std::nullopt) {
    fit_config.validate();
    labeled.validate();
    unlabeled.validate();
    if (labeled.empty())
        throw std::invalid_argument("fit: empty labeled dataset");

    const LabeledDataset lab =
        fit_config.bias ? inforeg::augment(labeled) : labeled;
    const UnlabeledDataset unlab =
        fit_config.bias ? inforeg::augment(unlabeled) : unlabeled;
    if (!unlab.empty() && unlab.dim() != lab.dim())
        throw std::invalid_argument("fit: labeled/unlabeled dim mismatch");
    const std::size_t dim = lab.dim();

    std::vector<double> lambdas;
    if (schedule) {
        schedule->validate(fit_config.lambda);
        lambdas = schedule->lambdas;
    } else {
        lambdas = {fit_config.lambda};
    }

    FitResult best;
    bool have_best = false;
    for (int r = 0; r < fit_config.restarts; ++r) {
        Rng rng(derive_seed(fit_config.seed, static_cast<std::uint64_t>(r),
                            0x5e5fULL));
        Vec theta(dim);
        for (double& t : theta) t = 0.1 * rng.normal();

        std::vector<std::pair<int, double>> trace;
        int iter_offset = 0;
        FitConfig stage = fit_config;
        MaximizeResult stage_res;
        for (double lam : lambdas) {
            stage.lambda = lam;
            auto obj = [&](const Vec& th) {
                return objective(th, lab, unlab, stage);
            };
            auto grad = [&](const Vec& th) {
                return objective_gradient(th, lab, unlab, stage);
            };
            stage_res = maximize(obj, grad, std::move(theta), opt_config);
            theta = stage_res.theta;
            for (const auto& [it, val] : stage_res.trace)
                trace.emplace_back(iter_offset + it, val);
            iter_offset += stage_res.iterations + 1;
        }
        const double obj_final = objective(theta, lab, unlab, fit_config);
        if (!have_best || obj_final > best.objective) {
            best.theta = std::move(theta);
            best.objective = obj_final;
            best.trace = std::move(trace);
            best.restart_index = r;
            have_best = true;
        }
    }
    return best;
}

} // namespace inforeg
