#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "density.hpp"
#include "rng.hpp"

namespace inforeg {

/// Clamp applied to anchor conditionals; keeps the log-likelihood finite
/// while approximating the lambda -> 0 limit.
inline constexpr double kAnchorClamp = 1e-6;

/// g(f) = -2 arctan sqrt(1/f - 1), mapping (0,1) onto (-pi, 0). Under g the
/// minimal-regularizer conditional is linear in reciprocal-density arc
/// length.
inline double g_transform(double f) {
    f = std::clamp(f, kAnchorClamp, 1.0 - kAnchorClamp);
    return -2.0 * std::atan(std::sqrt(1.0 / f - 1.0));
}

/// Inverse of g_transform: f = cos^2(g/2).
inline double g_inverse(double g) {
    const double c = std::cos(0.5 * g);
    return c * c;
}

/// Minimal value of the 1D information regularizer over an interval with
/// fixed endpoint conditionals: (g(f_b) - g(f_a))^2 / int_a^b dx/p(x).
inline double interval_regularizer(double f_a, double f_b, double recint) {
    if (!(recint > 0.0))
        throw std::invalid_argument(
            "interval_regularizer: recint must be positive");
    const double dg = g_transform(f_b) - g_transform(f_a);
    return dg * dg / recint;
}

struct Anchor {
    double x = 0.0;
    int y = 1;
};

/// Labeled anchor locations, merged: duplicates collapse to one location
/// with label-count multiplicities.
struct AnchorSet {
    std::vector<double> locations; // sorted, strictly increasing
    std::vector<int> pos_count;
    std::vector<int> neg_count;

    std::size_t size() const { return locations.size(); }

    static AnchorSet from_points(std::vector<Anchor> anchors) {
        if (anchors.empty())
            throw std::invalid_argument("AnchorSet: requires >= 1 anchor");
        for (const auto& a : anchors)
            if (a.y != 1 && a.y != -1)
                throw std::invalid_argument("AnchorSet: labels must be +/-1");
        std::sort(anchors.begin(), anchors.end(),
                  [](const Anchor& a, const Anchor& b) { return a.x < b.x; });
        AnchorSet out;
        for (const auto& a : anchors) {
            if (out.locations.empty() || a.x != out.locations.back()) {
                out.locations.push_back(a.x);
                out.pos_count.push_back(0);
                out.neg_count.push_back(0);
            }
            (a.y > 0 ? out.pos_count.back() : out.neg_count.back()) += 1;
        }
        return out;
    }
};

namespace detail {

struct IntervalInfo {
    double recint = 0.0;   // int dx/p over the interval (if finite)
    bool divergent = false;
    double zero_lo = 0.0;  // zero-density span when divergent
    double zero_hi = 0.0;
};

/// Scan an interval for interior zeros of the density and compute its
/// reciprocal integral when there are none.
inline IntervalInfo scan_interval(const Density& density, double a, double b) {
    IntervalInfo info;
    const int n = 4096;
    int first_zero = -1, last_zero = -1;
    for (int i = 0; i <= n; ++i) {
        const double x = a + (b - a) * (static_cast<double>(i) / n);
        if (density.pdf1(x) <= 0.0) {
            if (first_zero < 0) first_zero = i;
            last_zero = i;
        }
    }
    if (first_zero < 0) {
        try {
            info.recint = density.reciprocal_integral(a, b);
            return info;
        } catch (const divergent_integral&) {
            // A zero slipped between scan points; treat the whole gap as
            // the midpoint of the interval.
            info.divergent = true;
            info.zero_lo = info.zero_hi = 0.5 * (a + b);
            return info;
        }
    }
    info.divergent = true;
    auto bisect = [&](double pos_x, double zero_x) {
        for (int it = 0; it < 80 && std::abs(pos_x - zero_x) > 1e-12; ++it) {
            const double m = 0.5 * (pos_x + zero_x);
            (density.pdf1(m) > 0.0 ? pos_x : zero_x) = m;
        }
        return zero_x;
    };
    const double grid = (b - a) / n;
    info.zero_lo = first_zero == 0
                       ? a
                       : bisect(a + grid * (first_zero - 1),
                                a + grid * first_zero);
    info.zero_hi = last_zero == n
                       ? b
                       : bisect(a + grid * (last_zero + 1),
                                a + grid * last_zero);
    return info;
}

inline std::vector<IntervalInfo> scan_intervals(
    const Density& density, const std::vector<double>& locations) {
    std::vector<IntervalInfo> out;
    out.reserve(locations.size() > 0 ? locations.size() - 1 : 0);
    for (std::size_t k = 0; k + 1 < locations.size(); ++k)
        out.push_back(scan_interval(density, locations[k], locations[k + 1]));
    return out;
}

} // namespace detail

/// Piecewise-analytic conditional p(y=1|x) defined by anchor values and the
/// closed-form minimal-regularizer interpolant between them. Constant
/// outside the outermost anchors. Zero-density gaps split the domain; the
/// conditional is constant on each side of a gap at the adjacent anchor
/// value.
class Conditional1D {
public:
    Conditional1D(Density density, std::vector<double> locations,
                  std::vector<double> values)
        : density_(std::move(density)),
          locations_(std::move(locations)),
          values_(std::move(values)) {
        if (locations_.empty() || locations_.size() != values_.size())
            throw std::invalid_argument(
                "Conditional1D: locations/values mismatch");
        if (!std::is_sorted(locations_.begin(), locations_.end()) ||
            std::adjacent_find(locations_.begin(), locations_.end()) !=
                locations_.end())
            throw std::invalid_argument(
                "Conditional1D: locations must be strictly increasing");
        if (density_.dim() != 1 || !density_.has_pdf())
            throw std::invalid_argument(
                "Conditional1D: requires a 1D density with a pdf");
        for (double& f : values_)
            f = std::clamp(f, kAnchorClamp, 1.0 - kAnchorClamp);
        g_.reserve(values_.size());
        for (double f : values_) g_.push_back(g_transform(f));
        intervals_ = detail::scan_intervals(density_, locations_);
    }

    const Density& density() const { return density_; }
    const std::vector<double>& locations() const { return locations_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<detail::IntervalInfo>& intervals() const {
        return intervals_;
    }

    double evaluate(double x) const {
        if (x <= locations_.front()) return values_.front();
        if (x >= locations_.back()) return values_.back();
        const auto it =
            std::lower_bound(locations_.begin(), locations_.end(), x);
        const std::size_t hi = static_cast<std::size_t>(
            std::distance(locations_.begin(), it));
        if (locations_[hi] == x) return values_[hi];
        const std::size_t k = hi - 1;
        const auto& info = intervals_[k];
        if (info.divergent) {
            if (x <= info.zero_lo) return values_[k];
            if (x >= info.zero_hi) return values_[k + 1];
            return x < 0.5 * (info.zero_lo + info.zero_hi) ? values_[k]
                                                           : values_[k + 1];
        }
        const double partial =
            density_.reciprocal_integral(locations_[k], x);
        const double r = std::clamp(partial / info.recint, 0.0, 1.0);
        return g_inverse(g_[k] + (g_[k + 1] - g_[k]) * r);
    }

    /// Sum of minimal interval regularizers; tails and zero-density gaps
    /// contribute nothing.
    double total_regularizer() const {
        double acc = 0.0;
        for (std::size_t k = 0; k + 1 < values_.size(); ++k) {
            if (intervals_[k].divergent) continue;
            const double dg = g_[k + 1] - g_[k];
            acc += dg * dg / intervals_[k].recint;
        }
        return acc;
    }

    /// Uniform grid over the anchor range; endpoints land exactly on the
    /// outermost anchors.
    std::vector<std::pair<double, double>> emit_curve(
        std::size_t grid) const {
        if (grid < 2) throw std::invalid_argument("emit_curve: grid >= 2");
        std::vector<std::pair<double, double>> out;
        out.reserve(grid);
        const double lo = locations_.front();
        const double hi = locations_.back();
        for (std::size_t i = 0; i < grid; ++i) {
            const double x =
                i + 1 == grid
                    ? hi
                    : lo + (hi - lo) * (static_cast<double>(i) / (grid - 1));
            out.emplace_back(x, evaluate(x));
        }
        return out;
    }

private:
    Density density_;
    std::vector<double> locations_;
    std::vector<double> values_;
    std::vector<double> g_;
    std::vector<detail::IntervalInfo> intervals_;
};

namespace detail {

/// Per-component outer objective in g-coordinates:
///   sum_k [ 2 n+_k log cos(g_k/2) + 2 n-_k log|sin(g_k/2)| ]
///     - lambda sum_k (g_{k+1}-g_k)^2 / r_k.
/// Strictly concave with tridiagonal Hessian, so a projected damped Newton
/// iteration converges fast at any lambda; gradient steps back it up.
class AnchorProblem {
public:
    AnchorProblem(std::vector<int> pos, std::vector<int> neg,
                  std::vector<double> recints, double lambda)
        : pos_(std::move(pos)),
          neg_(std::move(neg)),
          recints_(std::move(recints)),
          lambda_(lambda) {}

    std::size_t size() const { return pos_.size(); }

    double value(const std::vector<double>& g) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double c = std::cos(0.5 * g[k]);
            const double s = std::sin(0.5 * g[k]);
            acc += 2.0 * pos_[k] * std::log(c) +
                   2.0 * neg_[k] * std::log(std::abs(s));
        }
        for (std::size_t k = 0; k + 1 < g.size(); ++k) {
            const double dg = g[k + 1] - g[k];
            acc -= lambda_ * dg * dg / recints_[k];
        }
        return acc;
    }

    std::vector<double> gradient(const std::vector<double>& g) const {
        std::vector<double> grad(g.size(), 0.0);
        for (std::size_t k = 0; k < g.size(); ++k) {
            grad[k] = -pos_[k] * std::tan(0.5 * g[k]) +
                      neg_[k] / std::tan(0.5 * g[k]);
        }
        for (std::size_t k = 0; k + 1 < g.size(); ++k) {
            const double w = 2.0 * lambda_ / recints_[k];
            const double dg = g[k + 1] - g[k];
            grad[k] += w * dg;
            grad[k + 1] -= w * dg;
        }
        return grad;
    }

    /// Diagonal and super-diagonal of -Hessian (positive definite).
    void neg_hessian(const std::vector<double>& g, std::vector<double>& diag,
                     std::vector<double>& off) const {
        diag.assign(g.size(), 0.0);
        off.assign(g.size() > 0 ? g.size() - 1 : 0, 0.0);
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double c = std::cos(0.5 * g[k]);
            const double s = std::sin(0.5 * g[k]);
            diag[k] = 0.5 * pos_[k] / (c * c) + 0.5 * neg_[k] / (s * s);
        }
        for (std::size_t k = 0; k + 1 < g.size(); ++k) {
            const double w = 2.0 * lambda_ / recints_[k];
            diag[k] += w;
            diag[k + 1] += w;
            off[k] = -w;
        }
    }

private:
    std::vector<int> pos_, neg_;
    std::vector<double> recints_;
    double lambda_;
};

/// Tridiagonal SPD solve (Thomas algorithm); inputs are consumed.
inline std::vector<double> solve_tridiag(std::vector<double> diag,
                                         std::vector<double> off,
                                         std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = off[i - 1] / diag[i - 1];
        diag[i] -= m * off[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        rhs[i] = (rhs[i] - off[i] * rhs[i + 1]) / diag[i];
    return rhs;
}

inline std::vector<double> maximize_anchor_component(
    const AnchorProblem& prob, std::vector<double> g, double g_lo,
    double g_hi) {
    const double tol = 1e-8;
    double val = prob.value(g);
    for (int iter = 0; iter < 500; ++iter) {
        const std::vector<double> grad = prob.gradient(g);
        // Projected gradient norm: bound-pinned coordinates with outward
        // gradient do not count.
        double pg = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            double gk = grad[k];
            if (g[k] <= g_lo && gk < 0.0) gk = 0.0;
            if (g[k] >= g_hi && gk > 0.0) gk = 0.0;
            pg += gk * gk;
        }
        if (std::sqrt(pg) <= tol) break;

        std::vector<double> diag, off;
        prob.neg_hessian(g, diag, off);
        std::vector<double> dir = solve_tridiag(diag, off, grad);

        bool moved = false;
        for (const bool newton : {true, false}) {
            const std::vector<double>& d = newton ? dir : grad;
            double slope = 0.0;
            for (std::size_t k = 0; k < g.size(); ++k) slope += d[k] * grad[k];
            if (!(slope > 0.0) || !std::isfinite(slope)) continue;
            double alpha = 1.0;
            for (int h = 0; h < 70; ++h) {
                std::vector<double> cand(g.size());
                double progress = 0.0;
                for (std::size_t k = 0; k < g.size(); ++k) {
                    cand[k] = std::clamp(g[k] + alpha * d[k], g_lo, g_hi);
                    progress += grad[k] * (cand[k] - g[k]);
                }
                const double cval = prob.value(cand);
                if (std::isfinite(cval) && cval >= val + 1e-4 * progress &&
                    cval > val) {
                    g = std::move(cand);
                    val = cval;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (moved) break;
        }
        if (!moved) break; // numerically stationary
    }
    return g;
}

} // namespace detail

/// Outer optimization over the anchor conditionals:
///   max sum_i log f(x_i; y_i) - lambda * total_regularizer,
/// solved per connected density component in g-coordinates with restarts.
inline Conditional1D fit_anchors(const AnchorSet& anchors,
                                 const Density& density, double lambda,
                                 std::uint64_t seed = 0, int restarts = 3) {
    if (lambda < 0.0)
        throw std::invalid_argument("fit_anchors: lambda must be >= 0");
    if (anchors.size() == 0)
        throw std::invalid_argument("fit_anchors: empty anchor set");
    if (density.dim() != 1 || !density.has_pdf())
        throw std::invalid_argument(
            "fit_anchors: requires a 1D density with a pdf");
    for (double x : anchors.locations)
        if (!(density.pdf1(x) > 0.0))
            throw std::invalid_argument(
                "fit_anchors: density must be positive at anchors");

    const auto intervals = detail::scan_intervals(density, anchors.locations);
    const double g_lo = g_transform(kAnchorClamp);
    const double g_hi = g_transform(1.0 - kAnchorClamp);

    std::vector<double> values(anchors.size(), 0.5);
    std::size_t comp_start = 0;
    std::size_t comp_index = 0;
    while (comp_start < anchors.size()) {
        std::size_t comp_end = comp_start; // inclusive
        while (comp_end + 1 < anchors.size() &&
               !intervals[comp_end].divergent)
            ++comp_end;

        const std::size_t n = comp_end - comp_start + 1;
        std::vector<int> pos(anchors.pos_count.begin() + comp_start,
                             anchors.pos_count.begin() + comp_end + 1);
        std::vector<int> neg(anchors.neg_count.begin() + comp_start,
                             anchors.neg_count.begin() + comp_end + 1);
        std::vector<double> recints;
        for (std::size_t k = comp_start; k < comp_end; ++k)
            recints.push_back(intervals[k].recint);
        detail::AnchorProblem prob(pos, neg, recints, lambda);

        // Deterministic inits: per-anchor MLE and the pooled constant,
        // plus seeded random starts.
        std::vector<std::vector<double>> inits;
        std::vector<double> mle(n), pooled(n);
        int tot_pos = 0, tot = 0;
        for (std::size_t k = 0; k < n; ++k) {
            tot_pos += pos[k];
            tot += pos[k] + neg[k];
            mle[k] = g_transform(static_cast<double>(pos[k]) /
                                 (pos[k] + neg[k]));
        }
        pooled.assign(
            n, g_transform(static_cast<double>(tot_pos) / tot));
        inits.push_back(mle);
        inits.push_back(pooled);
        for (int r = 2; r < restarts; ++r) {
            Rng rng(derive_seed(seed, comp_index, static_cast<std::uint64_t>(r)));
            std::vector<double> g0(n);
            for (double& g : g0) g = rng.uniform(g_lo, g_hi);
            inits.push_back(std::move(g0));
        }

        std::vector<double> best;
        double best_val = 0.0;
        for (auto& g0 : inits) {
            auto g = detail::maximize_anchor_component(prob, std::move(g0),
                                                       g_lo, g_hi);
            const double v = prob.value(g);
            if (best.empty() || v > best_val) {
                best = std::move(g);
                best_val = v;
            }
        }
        for (std::size_t k = 0; k < n; ++k)
            values[comp_start + k] = g_inverse(best[k]);

        comp_start = comp_end + 1;
        ++comp_index;
    }
    return Conditional1D(density, anchors.locations, values);
}

/// Log-likelihood of the anchor labels under a conditional.
inline double anchor_log_likelihood(const AnchorSet& anchors,
                                    const Conditional1D& cond) {
    double acc = 0.0;
    for (std::size_t k = 0; k < anchors.size(); ++k) {
        const double f = cond.evaluate(anchors.locations[k]);
        acc += anchors.pos_count[k] * std::log(f) +
               anchors.neg_count[k] * std::log(1.0 - f);
    }
    return acc;
}

/// The Eq.-8-style objective of a fitted conditional.
inline double anchor_objective(const AnchorSet& anchors,
                               const Conditional1D& cond, double lambda) {
    return anchor_log_likelihood(anchors, cond) -
           lambda * cond.total_regularizer();
}

} // namespace inforeg
