#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dataset.hpp"

namespace inforeg {

enum class Regularizer { none, l2, info_empirical, info_kernel };

inline std::string to_string(Regularizer r) {
    switch (r) {
        case Regularizer::none: return "none";
        case Regularizer::l2: return "l2";
        case Regularizer::info_empirical: return "info_empirical";
        case Regularizer::info_kernel: return "info_kernel";
    }
    return "?";
}

inline Regularizer regularizer_from_string(const std::string& s) {
    if (s == "none") return Regularizer::none;
    if (s == "l2") return Regularizer::l2;
    if (s == "info_empirical" || s == "info-emp")
        return Regularizer::info_empirical;
    if (s == "info_kernel" || s == "info-kernel")
        return Regularizer::info_kernel;
    throw std::invalid_argument("unknown regularizer: " + s);
}

struct FitConfig {
    double lambda = 0.0;
    Regularizer regularizer = Regularizer::none;
    double tau = 0.0;  // kernel variance, info_kernel only
    bool include_theta_norm_factor = true;
    bool bias = false;
    int restarts = 1;
    std::uint64_t seed = 0;

    void validate() const {
        if (lambda < 0.0)
            throw std::invalid_argument("FitConfig: lambda must be >= 0");
        if (restarts < 1)
            throw std::invalid_argument("FitConfig: restarts must be >= 1");
        if (regularizer == Regularizer::info_kernel && !(tau > 0.0))
            throw std::invalid_argument(
                "FitConfig: info_kernel requires tau > 0");
    }
};

struct FitResult {
    Vec theta;
    double objective = 0.0;
    std::vector<std::pair<int, double>> trace; // (iteration, objective)
    int restart_index = 0;
};

namespace detail {

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_sq(const Vec& a) { return dot(a, a); }

inline void check_dims(const Vec& theta, const Vec& x, const char* who) {
    if (theta.size() != x.size())
        throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

} // namespace detail

inline double sigmoid(double s) {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

/// log sigma(s), finite for all finite s.
inline double log_sigmoid(double s) {
    if (s >= 0.0) return -std::log1p(std::exp(-s));
    return s - std::log1p(std::exp(s));
}

/// P(y = +1 | x; theta) = sigma(theta . x).
inline double predict(const Vec& theta, const Vec& x) {
    detail::check_dims(theta, x, "predict");
    return sigmoid(detail::dot(theta, x));
}

inline double log_likelihood(const Vec& theta, const LabeledDataset& labeled) {
    if (labeled.empty())
        throw std::invalid_argument("log_likelihood: empty dataset");
    double acc = 0.0;
    for (const auto& p : labeled.points) {
        detail::check_dims(theta, p.x, "log_likelihood");
        acc += log_sigmoid(p.y * detail::dot(theta, p.x));
    }
    return acc;
}

inline Vec log_likelihood_gradient(const Vec& theta,
                                   const LabeledDataset& labeled) {
    if (labeled.empty())
        throw std::invalid_argument("log_likelihood_gradient: empty dataset");
    Vec g(theta.size(), 0.0);
    for (const auto& p : labeled.points) {
        detail::check_dims(theta, p.x, "log_likelihood_gradient");
        const double w = p.y * sigmoid(-p.y * detail::dot(theta, p.x));
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += w * p.x[i];
    }
    return g;
}

/// sigma(s) sigma(-s): the decision-boundary focus term. Symmetric, peaks
/// at 1/4 for s = 0.
inline double sigma_product(double s) {
    const double a = std::abs(s);
    const double e = std::exp(-a);
    const double denom = 1.0 + e;
    return e / (denom * denom);
}

/// d/ds sigma(s)sigma(-s) = sigma_product(s) (1 - 2 sigma(s)).
inline double sigma_product_derivative(double s) {
    return sigma_product(s) * (1.0 - 2.0 * sigmoid(s));
}

/// Gaussian surrogate (1/4) exp(-s^2/4) for sigma(s)sigma(-s).
inline double gauss_approx_sigma_product(double s) {
    return 0.25 * std::exp(-0.25 * s * s);
}

/// Tr F(x; theta) = |theta|^2 sigma(theta.x) sigma(-theta.x).
inline double fisher_trace(const Vec& theta, const Vec& x) {
    detail::check_dims(theta, x, "fisher_trace");
    return detail::norm_sq(theta) * sigma_product(detail::dot(theta, x));
}

/// Empirical information regularizer (lambda excluded): the average of
/// sigma(theta.x') sigma(-theta.x') over the unlabeled points, times
/// |theta|^2 when include_theta_norm_factor is set.
inline double info_reg_empirical(const Vec& theta,
                                 const UnlabeledDataset& unlabeled,
                                 bool include_theta_norm_factor) {
    if (unlabeled.empty())
        throw std::invalid_argument("info_reg_empirical: empty unlabeled set");
    double mean = 0.0;
    for (const auto& x : unlabeled.points) {
        detail::check_dims(theta, x, "info_reg_empirical");
        mean += sigma_product(detail::dot(theta, x));
    }
    mean /= static_cast<double>(unlabeled.size());
    return include_theta_norm_factor ? detail::norm_sq(theta) * mean : mean;
}

inline Vec info_reg_empirical_gradient(const Vec& theta,
                                       const UnlabeledDataset& unlabeled,
                                       bool include_theta_norm_factor) {
    if (unlabeled.empty())
        throw std::invalid_argument(
            "info_reg_empirical_gradient: empty unlabeled set");
    const double m = static_cast<double>(unlabeled.size());
    Vec g(theta.size(), 0.0);
    double mean = 0.0;
    for (const auto& x : unlabeled.points) {
        const double t = detail::dot(theta, x);
        mean += sigma_product(t);
        const double w = sigma_product_derivative(t) / m;
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += w * x[i];
    }
    mean /= m;
    if (!include_theta_norm_factor) return g;
    const double s = detail::norm_sq(theta);
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = 2.0 * theta[i] * mean + s * g[i];
    return g;
}

/// Closed-form Gaussian-kernel regularizer:
///   |theta|^2 / sqrt(1 + tau/2 |theta|^2)
///     * (1/4m) sum_j exp(-(theta.x'_j)^2 / (4 (1 + tau/2 |theta|^2))).
inline double info_reg_kernel(const Vec& theta,
                              const UnlabeledDataset& unlabeled, double tau) {
    if (unlabeled.empty())
        throw std::invalid_argument("info_reg_kernel: empty unlabeled set");
    if (!(tau > 0.0))
        throw std::invalid_argument("info_reg_kernel: tau must be positive");
    const double s = detail::norm_sq(theta);
    const double d = 1.0 + 0.5 * tau * s;
    double acc = 0.0;
    for (const auto& x : unlabeled.points) {
        detail::check_dims(theta, x, "info_reg_kernel");
        const double t = detail::dot(theta, x);
        acc += std::exp(-0.25 * t * t / d);
    }
    acc /= 4.0 * static_cast<double>(unlabeled.size());
    return s / std::sqrt(d) * acc;
}

inline Vec info_reg_kernel_gradient(const Vec& theta,
                                    const UnlabeledDataset& unlabeled,
                                    double tau) {
    if (unlabeled.empty())
        throw std::invalid_argument(
            "info_reg_kernel_gradient: empty unlabeled set");
    if (!(tau > 0.0))
        throw std::invalid_argument(
            "info_reg_kernel_gradient: tau must be positive");
    const double m = static_cast<double>(unlabeled.size());
    const double s = detail::norm_sq(theta);
    const double d = 1.0 + 0.5 * tau * s;
    const double a = s / std::sqrt(d);
    // grad A = theta (4 + tau s) / (2 d^{3/2});  A = s / sqrt(d)
    const double da_coeff = (4.0 + tau * s) / (2.0 * d * std::sqrt(d));
    double b = 0.0;          // (1/4m) sum E_j
    Vec db(theta.size(), 0.0);
    for (const auto& x : unlabeled.points) {
        const double t = detail::dot(theta, x);
        const double e = std::exp(-0.25 * t * t / d);
        b += e;
        // grad E_j = E_j (-t x / (2d) + t^2 tau theta / (4 d^2))
        const double wx = -e * t / (2.0 * d);
        const double wt = e * 0.25 * t * t * tau / (d * d);
        for (std::size_t i = 0; i < db.size(); ++i)
            db[i] += wx * x[i] + wt * theta[i];
    }
    b /= 4.0 * m;
    Vec g(theta.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = da_coeff * theta[i] * b + a * db[i] / (4.0 * m);
    return g;
}

namespace detail {

inline void check_objective_inputs(const LabeledDataset& labeled,
                                   const UnlabeledDataset& unlabeled,
                                   const FitConfig& config) {
    config.validate();
    if (labeled.empty())
        throw std::invalid_argument("objective: empty labeled dataset");
    const bool needs_unlabeled =
        config.regularizer == Regularizer::info_empirical ||
        config.regularizer == Regularizer::info_kernel;
    if (needs_unlabeled && unlabeled.empty())
        throw std::invalid_argument(
            "objective: information regularizer requires unlabeled data");
}

} // namespace detail

/// Regularizer value selected by the config (lambda not applied).
inline double regularizer_value(const Vec& theta,
                                const UnlabeledDataset& unlabeled,
                                const FitConfig& config) {
    switch (config.regularizer) {
        case Regularizer::none: return 0.0;
        case Regularizer::l2: return detail::norm_sq(theta);
        case Regularizer::info_empirical:
            return info_reg_empirical(theta, unlabeled,
                                      config.include_theta_norm_factor);
        case Regularizer::info_kernel:
            return info_reg_kernel(theta, unlabeled, config.tau);
    }
    return 0.0;
}

/// Regularized log-likelihood objective to be maximized:
///   sum_i log sigma(y_i theta.x_i) - lambda * R(theta).
inline double objective(const Vec& theta, const LabeledDataset& labeled,
                        const UnlabeledDataset& unlabeled,
                        const FitConfig& config) {
    detail::check_objective_inputs(labeled, unlabeled, config);
    const double ll = log_likelihood(theta, labeled);
    if (config.lambda == 0.0) return ll;
    return ll - config.lambda * regularizer_value(theta, unlabeled, config);
}

inline Vec objective_gradient(const Vec& theta, const LabeledDataset& labeled,
                              const UnlabeledDataset& unlabeled,
                              const FitConfig& config) {
    detail::check_objective_inputs(labeled, unlabeled, config);
    Vec g = log_likelihood_gradient(theta, labeled);
    if (config.lambda == 0.0) return g;
    Vec r;
    switch (config.regularizer) {
        case Regularizer::none: return g;
        case Regularizer::l2:
            r.assign(theta.size(), 0.0);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] = 2.0 * theta[i];
            break;
        case Regularizer::info_empirical:
            r = info_reg_empirical_gradient(theta, unlabeled,
                                            config.include_theta_norm_factor);
            break;
        case Regularizer::info_kernel:
            r = info_reg_kernel_gradient(theta, unlabeled, config.tau);
            break;
    }
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= config.lambda * r[i];
    return g;
}

/// Fraction of test points with sign(theta.x) != y; ties count as errors.
inline double error_rate(const Vec& theta, const LabeledDataset& test) {
    if (test.empty()) throw std::invalid_argument("error_rate: empty test set");
    std::size_t wrong = 0;
    for (const auto& p : test.points) {
        detail::check_dims(theta, p.x, "error_rate");
        const double t = detail::dot(theta, p.x);
        if (t == 0.0 || (t > 0.0) != (p.y > 0)) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(test.size());
}

} // namespace inforeg
