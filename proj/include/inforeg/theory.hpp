#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "dataset.hpp"
#include "density.hpp"
#include "quadrature.hpp"
#include "rng.hpp"

namespace inforeg {

namespace detail {

/// Sub/superlevel intervals of a 1D density at threshold alpha, over the
/// effective support. 1e4-point scan; boundaries sharpened by bisection.
struct LevelSets {
    std::vector<Interval> sublevel;   // p <= alpha
    std::vector<Interval> superlevel; // p > alpha
};

inline LevelSets level_sets(const Density& density, double alpha) {
    const Interval sup = density.effective_support();
    const int n = 10000;
    auto below = [&](double x) { return density.pdf1(x) <= alpha; };
    auto boundary = [&](double lo, double hi) {
        // invariant: classification differs at lo and hi
        const bool lo_below = below(lo);
        for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
            const double m = 0.5 * (lo + hi);
            (below(m) == lo_below ? lo : hi) = m;
        }
        return 0.5 * (lo + hi);
    };
    LevelSets out;
    double seg_start = sup.lo;
    bool seg_below = below(sup.lo);
    double prev = sup.lo;
    for (int i = 1; i <= n; ++i) {
        const double x = sup.lo + sup.width() * (static_cast<double>(i) / n);
        if (below(x) != seg_below) {
            const double b = boundary(prev, x);
            (seg_below ? out.sublevel : out.superlevel)
                .push_back({seg_start, b});
            seg_start = b;
            seg_below = !seg_below;
        }
        prev = x;
    }
    (seg_below ? out.sublevel : out.superlevel).push_back({seg_start, sup.hi});
    return out;
}

} // namespace detail

/// m_p(alpha): probability mass of the sublevel set {x : p(x) <= alpha}.
inline double m_p(const Density& density, double alpha) {
    if (density.dim() != 1 || !density.has_pdf())
        throw std::invalid_argument("m_p: requires a 1D density with a pdf");
    if (!(alpha > 0.0)) return 0.0;
    if (alpha >= max_pdf(density)) return 1.0;
    const auto sets = detail::level_sets(density, alpha);
    double mass = 0.0;
    for (const auto& iv : sets.sublevel)
        if (iv.hi > iv.lo)
            mass += integrate([&](double x) { return density.pdf1(x); },
                              iv.lo, iv.hi);
    return std::min(mass, 1.0);
}

/// c_p(alpha): number of maximal intervals of the superlevel set
/// {x : p(x) > alpha}. Requires alpha below the density's maximum.
inline int c_p(const Density& density, double alpha) {
    if (density.dim() != 1 || !density.has_pdf())
        throw std::invalid_argument("c_p: requires a 1D density with a pdf");
    if (alpha >= max_pdf(density))
        throw std::invalid_argument(
            "c_p: alpha must be below the maximum of the density");
    const auto sets = detail::level_sets(density, alpha);
    return static_cast<int>(sets.superlevel.size());
}

/// m_p^{-1}(t) = sup{alpha : m_p(alpha) <= t}, capped at the maximum of the
/// density (so a uniform density yields its plateau value exactly).
inline double m_p_inverse(const Density& density, double t) {
    const double top = max_pdf(density);
    if (m_p(density, top) <= t) return top;
    double lo = 0.0, hi = top;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (m_p(density, mid) <= t ? lo : hi) = mid;
    }
    return hi == top ? top : hi;
}

struct ComplexityProfile {
    std::vector<double> alphas;
    std::vector<double> m_values;
    std::vector<int> c_values;
};

inline ComplexityProfile complexity_profile(const Density& density,
                                            const std::vector<double>& alphas) {
    if (alphas.empty())
        throw std::invalid_argument("complexity_profile: empty alpha grid");
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (!(alphas[i] > 0.0))
            throw std::invalid_argument(
                "complexity_profile: alphas must be positive");
        if (i > 0 && !(alphas[i] > alphas[i - 1]))
            throw std::invalid_argument(
                "complexity_profile: alphas must be increasing");
    }
    ComplexityProfile out;
    out.alphas = alphas;
    for (double a : alphas) {
        out.m_values.push_back(m_p(density, a));
        out.c_values.push_back(c_p(density, a));
    }
    return out;
}

struct TheoryQuery {
    double epsilon = 0.1;
    double delta = 0.1;
    double gamma = 1.0;
    Density density;
};

struct SampleBoundResult {
    unsigned long long n = 0;
    double alpha_star = 0.0;   // m_p^{-1}(epsilon^2)
    double m_at_alpha = 0.0;
    int c_value = 0;
    double raw = 0.0;          // value before integer truncation
};

/// Theorem-2-style sample size with the asymptotic constant set to 1:
///   (1/eps^4) ln(1/eps) [ ln(1/delta) + c_p(m_p^{-1}(eps^2))
///                         + gamma / m_p^{-1}(eps^2)^2 ].
/// Intended for monotone comparison, not absolute prediction.
inline SampleBoundResult sample_bound(const TheoryQuery& query) {
    if (!(query.epsilon > 0.0 && query.epsilon < 1.0))
        throw std::invalid_argument("sample_bound: epsilon in (0,1)");
    if (!(query.delta > 0.0 && query.delta < 1.0))
        throw std::invalid_argument("sample_bound: delta in (0,1)");
    if (!(query.gamma > 0.0))
        throw std::invalid_argument("sample_bound: gamma > 0");
    SampleBoundResult res;
    res.alpha_star = m_p_inverse(query.density, query.epsilon * query.epsilon);
    if (!(res.alpha_star > 0.0))
        throw numerical_error("sample_bound: m_p^{-1}(eps^2) is zero");
    res.m_at_alpha = m_p(query.density, res.alpha_star);
    const double top = max_pdf(query.density);
    const double alpha_c = std::min(res.alpha_star, top * (1.0 - 1e-9));
    res.c_value = c_p(query.density, alpha_c);
    const double inv_eps = 1.0 / query.epsilon;
    const double bracket = std::log(1.0 / query.delta) + res.c_value +
                           query.gamma / (res.alpha_star * res.alpha_star);
    res.raw = inv_eps * inv_eps * inv_eps * inv_eps * std::log(inv_eps) *
              bracket;
    res.n = static_cast<unsigned long long>(std::floor(res.raw));
    return res;
}

// ---------------------------------------------------------------------------
// Test conditionals (smooth h(1|x) used by the inequality checkers)

/// A differentiable conditional h(1|x) with its derivative.
struct TestConditional {
    std::function<double(double)> value;
    std::function<double(double)> deriv;
};

inline TestConditional constant_conditional(double f) {
    return {[f](double) { return f; }, [](double) { return 0.0; }};
}

namespace detail {

/// Natural cubic spline through (xs, ys); value and first derivative.
class CubicSpline {
public:
    CubicSpline(std::vector<double> xs, std::vector<double> ys)
        : xs_(std::move(xs)), ys_(std::move(ys)) {
        const std::size_t n = xs_.size();
        m_.assign(n, 0.0);
        if (n < 3) return;
        std::vector<double> diag(n - 2), off(n - 2, 0.0), rhs(n - 2);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hl = xs_[i] - xs_[i - 1];
            const double hr = xs_[i + 1] - xs_[i];
            diag[i - 1] = 2.0 * (hl + hr);
            if (i + 2 < n) off[i - 1] = hr;
            rhs[i - 1] = 6.0 * ((ys_[i + 1] - ys_[i]) / hr -
                                (ys_[i] - ys_[i - 1]) / hl);
        }
        for (std::size_t i = 1; i < rhs.size(); ++i) {
            const double w = off[i - 1] / diag[i - 1];
            diag[i] -= w * off[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        if (!rhs.empty()) {
            rhs.back() /= diag.back();
            for (std::size_t i = rhs.size() - 1; i-- > 0;)
                rhs[i] = (rhs[i] - off[i] * rhs[i + 1]) / diag[i];
        }
        for (std::size_t i = 0; i < rhs.size(); ++i) m_[i + 1] = rhs[i];
    }

    double value(double x) const {
        const auto [i, h, a, b] = locate(x);
        return a * ys_[i] + b * ys_[i + 1] +
               ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) *
                   (h * h) / 6.0;
    }

    double deriv(double x) const {
        const auto [i, h, a, b] = locate(x);
        return (ys_[i + 1] - ys_[i]) / h -
               (3.0 * a * a - 1.0) / 6.0 * h * m_[i] +
               (3.0 * b * b - 1.0) / 6.0 * h * m_[i + 1];
    }

private:
    std::tuple<std::size_t, double, double, double> locate(double x) const {
        std::size_t i =
            static_cast<std::size_t>(std::distance(
                xs_.begin(),
                std::upper_bound(xs_.begin(), xs_.end(), x)));
        i = std::clamp<std::size_t>(i, 1, xs_.size() - 1) - 1;
        const double h = xs_[i + 1] - xs_[i];
        const double a = (xs_[i + 1] - x) / h;
        const double b = (x - xs_[i]) / h;
        return {i, h, a, b};
    }

    std::vector<double> xs_, ys_;
    std::vector<double> m_;
};

} // namespace detail

/// Random smooth conditional: a natural cubic spline through seeded knot
/// values, affinely rescaled so its range over [x_lo, x_hi] is exactly
/// [f_lo, f_hi].
inline TestConditional random_spline_conditional(double x_lo, double x_hi,
                                                 Rng& rng, double f_lo = 0.05,
                                                 double f_hi = 0.95,
                                                 int knots = 6) {
    if (!(x_lo < x_hi) || knots < 2)
        throw std::invalid_argument("random_spline_conditional: bad inputs");
    std::vector<double> xs(knots), ys(knots);
    for (int i = 0; i < knots; ++i) {
        xs[i] = x_lo + (x_hi - x_lo) * (static_cast<double>(i) / (knots - 1));
        ys[i] = rng.uniform(f_lo, f_hi);
    }
    auto spline = std::make_shared<detail::CubicSpline>(std::move(xs),
                                                        std::move(ys));
    double smin = std::numeric_limits<double>::infinity();
    double smax = -smin;
    for (int i = 0; i <= 2000; ++i) {
        const double v =
            spline->value(x_lo + (x_hi - x_lo) * (i / 2000.0));
        smin = std::min(smin, v);
        smax = std::max(smax, v);
    }
    if (smax - smin < 1e-12) {
        const double mid = 0.5 * (f_lo + f_hi);
        return constant_conditional(mid);
    }
    const double scale = (f_hi - f_lo) / (smax - smin);
    const double shift = f_lo - smin * scale;
    // Clamp so extrapolation beyond the knot range stays in [f_lo, f_hi];
    // inside the range the clamp is inactive up to grid resolution.
    return {[spline, scale, shift, f_lo, f_hi](double x) {
                return std::clamp(spline->value(x) * scale + shift, f_lo,
                                  f_hi);
            },
            [spline, scale](double x) { return spline->deriv(x) * scale; }};
}

// ---------------------------------------------------------------------------
// Inequality and asymptotics checkers

struct Lemma3Report {
    double lhs = 0.0; // int p E[(d/dx log h)^2]
    double rhs = 0.0; // 4 (h(x1)-h(x2))^2 / int 1/p
    double margin = 0.0;
};

/// Lemma 3: the information regularizer of h over [x1, x2] dominates
/// 4 (Delta h)^2 / int 1/p. Both sides by quadrature.
inline Lemma3Report lemma3_check(const TestConditional& h,
                                 const Density& density, double x1,
                                 double x2) {
    if (!(x1 < x2)) throw std::invalid_argument("lemma3_check: x1 < x2");
    Lemma3Report rep;
    rep.lhs = integrate(
        [&](double x) {
            const double f = h.value(x);
            const double df = h.deriv(x);
            return density.pdf1(x) * df * df / (f * (1.0 - f));
        },
        x1, x2);
    const double recint = density.reciprocal_integral(x1, x2);
    const double dh = h.value(x1) - h.value(x2);
    rep.rhs = 4.0 * dh * dh / recint;
    rep.margin = rep.lhs - rep.rhs;
    return rep;
}

struct Lemma4Report {
    double lhs_true = 0.0, rhs_true = 0.0, slack_true = 0.0;
    double lhs_emp = 0.0, rhs_emp = 0.0, slack_emp = 0.0;
};

/// Lemma 4 for the square loss L_h = (h(y|x) - 1)^2: both the population
/// inequality (expectations by quadrature under density x true_cond) and
/// its empirical analogue on the sample.
inline Lemma4Report lemma4_check(const TestConditional& h1,
                                 const TestConditional& h2,
                                 const Density& density,
                                 const LabeledDataset& sample,
                                 const TestConditional& true_cond =
                                     constant_conditional(0.5)) {
    const Interval sup = density.effective_support();
    auto exp_loss = [&](const TestConditional& h) {
        return integrate(
            [&](double x) {
                const double q = true_cond.value(x);
                const double f = h.value(x);
                // y=+1 loss (f-1)^2, y=-1 loss ((1-f)-1)^2 = f^2
                return density.pdf1(x) *
                       (q * (f - 1.0) * (f - 1.0) + (1.0 - q) * f * f);
            },
            sup.lo, sup.hi);
    };
    Lemma4Report rep;
    rep.lhs_true = std::abs(exp_loss(h1) - exp_loss(h2));
    rep.rhs_true =
        2.0 * std::sqrt(integrate(
                  [&](double x) {
                      const double d = h1.value(x) - h2.value(x);
                      return density.pdf1(x) * d * d;
                  },
                  sup.lo, sup.hi));
    rep.slack_true = rep.rhs_true - rep.lhs_true;

    if (!sample.empty()) {
        double l1 = 0.0, l2 = 0.0, sq = 0.0;
        for (const auto& p : sample.points) {
            const double x = p.x.at(0);
            const double f1 = h1.value(x);
            const double f2 = h2.value(x);
            const double a1 = p.y > 0 ? f1 - 1.0 : f1;
            const double a2 = p.y > 0 ? f2 - 1.0 : f2;
            l1 += a1 * a1;
            l2 += a2 * a2;
            sq += (f1 - f2) * (f1 - f2);
        }
        const double n = static_cast<double>(sample.size());
        rep.lhs_emp = std::abs(l1 - l2) / n;
        rep.rhs_emp = 2.0 * std::sqrt(sq / n);
        rep.slack_emp = rep.rhs_emp - rep.lhs_emp;
    }
    return rep;
}

/// Draw a labeled 1D sample from density x true conditional.
inline LabeledDataset make_labeled_sample(const Density& density,
                                          const TestConditional& true_cond,
                                          std::size_t n, std::uint64_t seed) {
    LabeledDataset out;
    Rng rng(derive_seed(seed, 0xabcdULL));
    for (const auto& x : density.sample(n, derive_seed(seed, 0x77ULL))) {
        const int y = rng.uniform() < true_cond.value(x[0]) ? 1 : -1;
        out.points.push_back({x, y});
    }
    return out;
}

/// Small region around a center: the exact regional mutual information is
/// compared against its second-order asymptotic form.
struct RegionSpec {
    double center = 0.0;
    double half_width = 0.1;
    TestConditional conditional;
    Density density;
};

struct MiReport {
    std::vector<double> diameters;
    std::vector<double> exact;
    std::vector<double> asymptotic;
    std::vector<double> abs_error;
    double fitted_order = 0.0; // log-log slope over the last three diameters
};

inline MiReport mi_region_check(const RegionSpec& region,
                                const std::vector<double>& diameters) {
    if (diameters.size() < 2)
        throw std::invalid_argument("mi_region_check: need >= 2 diameters");
    const QuadOptions tight{1e-13, 1e-11, 60};
    MiReport rep;
    rep.diameters = diameters;
    for (double dia : diameters) {
        const double a = region.center - 0.5 * dia;
        const double b = region.center + 0.5 * dia;
        auto p = [&](double x) { return region.density.pdf1(x); };
        const auto& h = region.conditional;
        {
            // Conditional must stay inside (0,1) on the region.
            const double h_a = h.value(a), h_b = h.value(b);
            if (!(h_a > 0.0 && h_a < 1.0 && h_b > 0.0 && h_b < 1.0))
                throw std::invalid_argument(
                    "mi_region_check: conditional leaves (0,1) on Q");
        }
        const double z = integrate(p, a, b, tight);
        const double x0 =
            integrate([&](double x) { return x * p(x); }, a, b, tight) / z;
        const double var =
            integrate([&](double x) { return (x - x0) * (x - x0) * p(x); },
                      a, b, tight) /
            z;
        const double pq1 =
            integrate([&](double x) { return p(x) * h.value(x); }, a, b,
                      tight) /
            z;
        const double exact =
            integrate(
                [&](double x) {
                    const double f = h.value(x);
                    return p(x) * (f * std::log(f / pq1) +
                                   (1.0 - f) *
                                       std::log((1.0 - f) / (1.0 - pq1)));
                },
                a, b, tight) /
            z;
        const double f0 = h.value(x0);
        const double fisher =
            h.deriv(x0) * h.deriv(x0) / (f0 * (1.0 - f0));
        const double asym = 0.5 * var * fisher;
        rep.exact.push_back(exact);
        rep.asymptotic.push_back(asym);
        rep.abs_error.push_back(std::abs(exact - asym));
    }
    // Least-squares slope of log(err) vs log(diameter), last three points.
    const std::size_t n = diameters.size();
    const std::size_t k0 = n >= 3 ? n - 3 : 0;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int cnt = 0;
    for (std::size_t i = k0; i < n; ++i) {
        if (!(rep.abs_error[i] > 1e-300)) continue;
        const double lx = std::log(rep.diameters[i]);
        const double ly = std::log(rep.abs_error[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++cnt;
    }
    rep.fitted_order =
        cnt >= 2 ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx)
                 : std::numeric_limits<double>::infinity();
    return rep;
}

struct IsotropyReport {
    std::vector<double> values; // v^T cov v per direction
    double spread = 0.0;        // max - min
};

/// Theorem 1 witness: the quadratic form v^T cov v is direction-free iff
/// cov is a multiple of the identity.
inline IsotropyReport isotropy_check(const std::vector<Vec>& cov,
                                     const std::vector<Vec>& directions) {
    const std::size_t d = cov.size();
    for (const auto& row : cov)
        if (row.size() != d)
            throw std::invalid_argument("isotropy_check: cov not square");
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            if (std::abs(cov[i][j] - cov[j][i]) > 1e-12)
                throw std::invalid_argument("isotropy_check: cov not symmetric");
    if (directions.empty())
        throw std::invalid_argument("isotropy_check: no directions");
    IsotropyReport rep;
    for (const auto& v : directions) {
        if (v.size() != d)
            throw std::invalid_argument(
                "isotropy_check: direction dimension mismatch");
        double norm = 0.0;
        for (double x : v) norm += x * x;
        if (std::abs(norm - 1.0) > 1e-9)
            throw std::invalid_argument("isotropy_check: non-unit direction");
        double q = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) q += v[i] * cov[i][j] * v[j];
        rep.values.push_back(q);
    }
    const auto [mn, mx] =
        std::minmax_element(rep.values.begin(), rep.values.end());
    rep.spread = *mx - *mn;
    return rep;
}

} // namespace inforeg
