#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"
#include "rng.hpp"

namespace inforeg {

using Vec = std::vector<double>;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
};

struct Uniform1D {
    double lo = 0.0;
    double hi = 1.0;
};

/// Isotropic Gaussian in d dimensions (covariance = variance * I).
struct Gaussian {
    Vec mean;
    double variance = 1.0;
};

struct Laplace1D {
    double location = 0.0;
    double scale = 1.0;
};

/// Raw sample set; has no pointwise pdf and cannot be sampled from.
struct Empirical {
    std::vector<Vec> points;
};

/// Gaussian kernel density estimate with isotropic kernels of variance
/// bandwidth * I. Centers are kept lexicographically sorted so the pdf is
/// bit-identical under permutation of the input centers.
struct GaussianKde {
    std::vector<Vec> centers;
    double bandwidth = 1.0;
};

class Density;

struct Mixture {
    std::vector<double> weights;
    std::vector<Density> components;
};

namespace detail {

inline double gaussian_pdf(const Vec& x, const Vec& mean, double variance) {
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - mean[i];
        sq += d * d;
    }
    const double d = static_cast<double>(x.size());
    const double norm =
        std::pow(2.0 * std::numbers::pi * variance, -0.5 * d);
    return norm * std::exp(-0.5 * sq / variance);
}

} // namespace detail

/// Marginal density p(x): analytic families, finite mixtures of them, raw
/// sample sets, and Gaussian KDEs. Evaluation, seeded sampling and 1D
/// reciprocal-density integrals are the services the rest of the library
/// builds on.
class Density {
public:
    using Node =
        std::variant<Uniform1D, Gaussian, Laplace1D, Mixture, Empirical,
                     GaussianKde>;

    Density(Uniform1D u) : node_(std::move(u)) { validate(); }
    Density(Gaussian g) : node_(std::move(g)) { validate(); }
    Density(Laplace1D l) : node_(std::move(l)) { validate(); }
    Density(Mixture m) : node_(std::move(m)) { validate(); }
    Density(Empirical e) : node_(std::move(e)) { validate(); }
    Density(GaussianKde k) : node_(std::move(k)) { validate(); }

    const Node& node() const { return node_; }

    std::size_t dim() const {
        return std::visit(
            [](const auto& n) -> std::size_t {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Uniform1D> ||
                              std::is_same_v<T, Laplace1D>)
                    return 1;
                else if constexpr (std::is_same_v<T, Gaussian>)
                    return n.mean.size();
                else if constexpr (std::is_same_v<T, Mixture>)
                    return n.components.front().dim();
                else if constexpr (std::is_same_v<T, Empirical>)
                    return n.points.front().size();
                else
                    return n.centers.front().size();
            },
            node_);
    }

    /// Empirical sample sets have no pointwise density.
    bool has_pdf() const {
        if (std::holds_alternative<Empirical>(node_)) return false;
        if (const auto* m = std::get_if<Mixture>(&node_))
            return std::all_of(m->components.begin(), m->components.end(),
                               [](const Density& c) { return c.has_pdf(); });
        return true;
    }

    bool sampling_supported() const {
        if (std::holds_alternative<Empirical>(node_)) return false;
        if (const auto* m = std::get_if<Mixture>(&node_))
            return std::all_of(
                m->components.begin(), m->components.end(),
                [](const Density& c) { return c.sampling_supported(); });
        return true;
    }

    double pdf(const Vec& x) const {
        if (x.size() != dim())
            throw std::invalid_argument("pdf: dimension mismatch");
        return pdf_unchecked(x);
    }

    /// 1D convenience overload.
    double pdf1(double x) const {
        if (dim() != 1)
            throw std::invalid_argument("pdf1: density is not 1D");
        return pdf_unchecked(Vec{x});
    }

    /// Draw n points. Deterministic given the seed; each call owns its
    /// generator, so concurrent calls never share state.
    std::vector<Vec> sample(std::size_t n, std::uint64_t seed) const {
        if (n == 0) throw std::invalid_argument("sample: n must be >= 1");
        if (!sampling_supported())
            throw std::invalid_argument(
                "sample: unsupported for Empirical densities");
        Rng rng(derive_seed(seed));
        std::vector<Vec> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back(sample_one(rng));
        return out;
    }

    /// Integral of 1/p over [a, b] (1D densities with a pointwise pdf).
    /// Signals divergence when p hits zero inside the interval.
    double reciprocal_integral(double a, double b) const {
        if (!(a < b))
            throw std::invalid_argument("reciprocal_integral: requires a < b");
        if (dim() != 1 || !has_pdf())
            throw std::invalid_argument(
                "reciprocal_integral: requires a 1D density with a pdf");
        auto f = [this](double x) {
            const double p = pdf_unchecked(Vec{x});
            if (p <= 0.0)
                throw divergent_integral(
                    "reciprocal_integral: density reaches zero at x=" +
                    std::to_string(x));
            return 1.0 / p;
        };
        return integrate(f, a, b);
    }

    /// Support window on which quadrature is performed: exact support for
    /// bounded families, mean +/- 12 standard deviations otherwise
    /// (per-component for mixtures and KDEs).
    Interval effective_support() const {
        if (dim() != 1)
            throw std::invalid_argument("effective_support: density not 1D");
        return std::visit(
            [](const auto& n) -> Interval {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Uniform1D>)
                    return {n.lo, n.hi};
                else if constexpr (std::is_same_v<T, Gaussian>) {
                    const double s = 12.0 * std::sqrt(n.variance);
                    return {n.mean[0] - s, n.mean[0] + s};
                } else if constexpr (std::is_same_v<T, Laplace1D>) {
                    const double s =
                        12.0 * std::numbers::sqrt2 * n.scale;
                    return {n.location - s, n.location + s};
                } else if constexpr (std::is_same_v<T, Mixture>) {
                    Interval acc = n.components.front().effective_support();
                    for (std::size_t i = 1; i < n.components.size(); ++i) {
                        const Interval c =
                            n.components[i].effective_support();
                        acc.lo = std::min(acc.lo, c.lo);
                        acc.hi = std::max(acc.hi, c.hi);
                    }
                    return acc;
                } else if constexpr (std::is_same_v<T, GaussianKde>) {
                    double lo = n.centers.front()[0];
                    double hi = lo;
                    for (const auto& c : n.centers) {
                        lo = std::min(lo, c[0]);
                        hi = std::max(hi, c[0]);
                    }
                    const double s = 12.0 * std::sqrt(n.bandwidth);
                    return {lo - s, hi + s};
                } else {
                    throw std::invalid_argument(
                        "effective_support: Empirical has none");
                }
            },
            node_);
    }

    /// d/dx pdf for 1D densities (piecewise for Uniform/Laplace kinks).
    double pdf_derivative1(double x) const {
        if (dim() != 1 || !has_pdf())
            throw std::invalid_argument(
                "pdf_derivative1: requires a 1D density with a pdf");
        return std::visit(
            [&](const auto& n) -> double {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Uniform1D>)
                    return 0.0;
                else if constexpr (std::is_same_v<T, Gaussian>)
                    return detail::gaussian_pdf(Vec{x}, n.mean, n.variance) *
                           (-(x - n.mean[0]) / n.variance);
                else if constexpr (std::is_same_v<T, Laplace1D>) {
                    const double p =
                        std::exp(-std::abs(x - n.location) / n.scale) /
                        (2.0 * n.scale);
                    const double s =
                        x > n.location ? -1.0 : (x < n.location ? 1.0 : 0.0);
                    return p * s / n.scale;
                } else if constexpr (std::is_same_v<T, Mixture>) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < n.weights.size(); ++i)
                        acc += n.weights[i] *
                               n.components[i].pdf_derivative1(x);
                    return acc;
                } else if constexpr (std::is_same_v<T, GaussianKde>) {
                    double acc = 0.0;
                    for (const auto& c : n.centers)
                        acc += detail::gaussian_pdf(Vec{x}, c, n.bandwidth) *
                               (-(x - c[0]) / n.bandwidth);
                    return acc / static_cast<double>(n.centers.size());
                } else {
                    return 0.0; // unreachable; Empirical rejected above
                }
            },
            node_);
    }

    /// Candidate extremum locations (component peaks and support edges);
    /// used by level-set scans to make grid maxima exact for the analytic
    /// families.
    std::vector<double> peak_candidates() const {
        std::vector<double> out;
        collect_peaks(out);
        return out;
    }

private:
    Node node_;

    void validate() {
        std::visit(
            [](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Uniform1D>) {
                    if (!(n.lo < n.hi))
                        throw std::invalid_argument(
                            "Uniform1D: requires lo < hi");
                } else if constexpr (std::is_same_v<T, Gaussian>) {
                    if (n.mean.empty())
                        throw std::invalid_argument("Gaussian: empty mean");
                    if (!(n.variance > 0.0))
                        throw std::invalid_argument(
                            "Gaussian: variance must be positive");
                } else if constexpr (std::is_same_v<T, Laplace1D>) {
                    if (!(n.scale > 0.0))
                        throw std::invalid_argument(
                            "Laplace1D: scale must be positive");
                } else if constexpr (std::is_same_v<T, Mixture>) {
                    if (n.components.empty() ||
                        n.weights.size() != n.components.size())
                        throw std::invalid_argument(
                            "Mixture: weights/components size mismatch");
                    double sum = 0.0;
                    for (double w : n.weights) {
                        if (w < 0.0)
                            throw std::invalid_argument(
                                "Mixture: negative weight");
                        sum += w;
                    }
                    if (std::abs(sum - 1.0) > 1e-12)
                        throw std::invalid_argument(
                            "Mixture: weights must sum to 1 within 1e-12");
                    const std::size_t d = n.components.front().dim();
                    for (const auto& c : n.components)
                        if (c.dim() != d)
                            throw std::invalid_argument(
                                "Mixture: component dimension mismatch");
                } else if constexpr (std::is_same_v<T, Empirical>) {
                    if (n.points.empty())
                        throw std::invalid_argument(
                            "Empirical: requires at least one point");
                    const std::size_t d = n.points.front().size();
                    for (const auto& p : n.points)
                        if (p.size() != d)
                            throw std::invalid_argument(
                                "Empirical: point dimension mismatch");
                } else {
                    if (n.centers.empty())
                        throw std::invalid_argument(
                            "GaussianKde: requires at least one center");
                    if (!(n.bandwidth > 0.0))
                        throw std::invalid_argument(
                            "GaussianKde: bandwidth must be positive");
                    const std::size_t d = n.centers.front().size();
                    for (const auto& c : n.centers)
                        if (c.size() != d)
                            throw std::invalid_argument(
                                "GaussianKde: center dimension mismatch");
                }
            },
            node_);
        // Fixed summation order: sort KDE centers once at construction.
        if (auto* k = std::get_if<GaussianKde>(&node_))
            std::sort(k->centers.begin(), k->centers.end());
    }

    double pdf_unchecked(const Vec& x) const {
        return std::visit(
            [&](const auto& n) -> double {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Uniform1D>)
                    return (x[0] >= n.lo && x[0] <= n.hi)
                               ? 1.0 / (n.hi - n.lo)
                               : 0.0;
                else if constexpr (std::is_same_v<T, Gaussian>)
                    return detail::gaussian_pdf(x, n.mean, n.variance);
                else if constexpr (std::is_same_v<T, Laplace1D>)
                    return std::exp(-std::abs(x[0] - n.location) / n.scale) /
                           (2.0 * n.scale);
                else if constexpr (std::is_same_v<T, Mixture>) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < n.weights.size(); ++i)
                        acc +=
                            n.weights[i] * n.components[i].pdf_unchecked(x);
                    return acc;
                } else if constexpr (std::is_same_v<T, GaussianKde>) {
                    double acc = 0.0;
                    for (const auto& c : n.centers)
                        acc += detail::gaussian_pdf(x, c, n.bandwidth);
                    return acc / static_cast<double>(n.centers.size());
                } else {
                    throw std::invalid_argument(
                        "pdf: undefined for Empirical densities");
                }
            },
            node_);
    }

    Vec sample_one(Rng& rng) const {
        return std::visit(
            [&](const auto& n) -> Vec {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Uniform1D>)
                    return {rng.uniform(n.lo, n.hi)};
                else if constexpr (std::is_same_v<T, Gaussian>) {
                    Vec x(n.mean.size());
                    const double s = std::sqrt(n.variance);
                    for (std::size_t i = 0; i < x.size(); ++i)
                        x[i] = n.mean[i] + s * rng.normal();
                    return x;
                } else if constexpr (std::is_same_v<T, Laplace1D>) {
                    const double u = rng.uniform() - 0.5;
                    const double mag =
                        -n.scale * std::log(1.0 - 2.0 * std::abs(u));
                    return {n.location + (u < 0.0 ? -mag : mag)};
                } else if constexpr (std::is_same_v<T, Mixture>) {
                    // Inverse CDF over the weights, then the component.
                    const double u = rng.uniform();
                    double cum = 0.0;
                    std::size_t pick = n.components.size() - 1;
                    for (std::size_t i = 0; i < n.weights.size(); ++i) {
                        cum += n.weights[i];
                        if (u < cum) {
                            pick = i;
                            break;
                        }
                    }
                    return n.components[pick].sample_one(rng);
                } else if constexpr (std::is_same_v<T, GaussianKde>) {
                    const std::size_t j = rng.index(n.centers.size());
                    Vec x = n.centers[j];
                    const double s = std::sqrt(n.bandwidth);
                    for (double& xi : x) xi += s * rng.normal();
                    return x;
                } else {
                    throw std::invalid_argument(
                        "sample: unsupported for Empirical densities");
                }
            },
            node_);
    }

    void collect_peaks(std::vector<double>& out) const {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Uniform1D>) {
                    out.push_back(n.lo);
                    out.push_back(0.5 * (n.lo + n.hi));
                    out.push_back(n.hi);
                } else if constexpr (std::is_same_v<T, Gaussian>) {
                    out.push_back(n.mean[0]);
                } else if constexpr (std::is_same_v<T, Laplace1D>) {
                    out.push_back(n.location);
                } else if constexpr (std::is_same_v<T, Mixture>) {
                    for (const auto& c : n.components) c.collect_peaks(out);
                } else if constexpr (std::is_same_v<T, GaussianKde>) {
                    for (const auto& c : n.centers) out.push_back(c[0]);
                }
            },
            node_);
    }
};

/// Largest pdf value over the effective support (1e4-point scan plus the
/// exact component peaks, so single-family maxima are exact).
inline double max_pdf(const Density& density) {
    const Interval sup = density.effective_support();
    const int n = 10000;
    double best = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = sup.lo + sup.width() * (static_cast<double>(i) / n);
        best = std::max(best, density.pdf1(x));
    }
    for (double x : density.peak_candidates())
        if (x >= sup.lo && x <= sup.hi)
            best = std::max(best, density.pdf1(x));
    return best;
}

} // namespace inforeg
