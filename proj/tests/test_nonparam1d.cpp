#include <doctest.h>

#include <cmath>
#include <numbers>

#include "inforeg/logistic.hpp"
#include "inforeg/nonparam1d.hpp"
#include "oracles.hpp"

using namespace inforeg;

namespace {

Density gapped_uniforms() {
    // Two uniform bumps with a true zero-density gap on (1, 2).
    Mixture m;
    m.weights = {0.5, 0.5};
    m.components.emplace_back(Uniform1D{0.0, 1.0});
    m.components.emplace_back(Uniform1D{2.0, 3.0});
    return Density(std::move(m));
}

Density bimodal_bumps() {
    // Two uniform bumps joined by a low-density plateau (never zero).
    Mixture m;
    m.weights = {0.495, 0.495, 0.01};
    m.components.emplace_back(Uniform1D{0.0, 1.0});
    m.components.emplace_back(Uniform1D{2.0, 3.0});
    m.components.emplace_back(Uniform1D{0.0, 3.0});
    return Density(std::move(m));
}

// Closed-form solutions in extended precision for the residual study.
struct LongDoubleSolution {
    long double g_a, dg;
    std::function<long double(long double)> rho;   // normalized int 1/p
    std::function<long double(long double)> dlogp; // (log p)'
    long double value(long double x) const {
        const long double g = g_a + dg * rho(x);
        const long double c = std::cos(0.5L * g);
        return c * c;
    }
};

// Eq.-7 residual (1D), with f' and f'' by central differences at step h.
long double el_residual(const LongDoubleSolution& sol, long double x,
                        long double h) {
    const long double fp = sol.value(x + h), fm = sol.value(x - h);
    const long double f0 = sol.value(x);
    const long double d1 = (fp - fm) / (2.0L * h);
    const long double d2 = (fp - 2.0L * f0 + fm) / (h * h);
    return sol.dlogp(x) * d1 + d2 +
           (2.0L * f0 - 1.0L) / (2.0L * f0 * (1.0L - f0)) * d1 * d1;
}

double fitted_order(const std::vector<double>& hs,
                    const std::vector<double>& rs) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(hs.size());
    for (int i = 0; i < n; ++i) {
        const double lx = std::log(hs[i]), ly = std::log(rs[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

TEST_CASE("g_transform: worked values and round trip") {
    CHECK(g_transform(0.5) ==
          doctest::Approx(-std::numbers::pi / 2).epsilon(1e-12));
    CHECK(g_transform(0.75) ==
          doctest::Approx(-std::numbers::pi / 3).epsilon(1e-12));
    double worst = 0.0;
    for (int i = 0; i <= 10000; ++i) {
        const double f =
            kAnchorClamp + (1.0 - 2.0 * kAnchorClamp) * (i / 10000.0);
        worst = std::max(worst, std::abs(g_inverse(g_transform(f)) - f));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("interval_regularizer: worked values and scaling") {
    CHECK(interval_regularizer(0.3, 0.3, 2.7) == 0.0);
    const double pi3 = std::numbers::pi / 3.0;
    CHECK(interval_regularizer(0.25, 0.75, 1.0) ==
          doctest::Approx(pi3 * pi3).epsilon(1e-12));
    CHECK(interval_regularizer(0.25, 0.75, 2.0) ==
          doctest::Approx(0.5 * pi3 * pi3).epsilon(1e-12));
    CHECK(interval_regularizer(0.25, 0.75, 1.0) ==
          interval_regularizer(0.75, 0.25, 1.0));
    CHECK_THROWS_AS((void)interval_regularizer(0.2, 0.8, 0.0),
                    std::invalid_argument);
}

TEST_CASE("interval_regularizer dominates the Lemma 3 bound") {
    Rng rng(1);
    for (int k = 0; k < 200; ++k) {
        const double fa = rng.uniform(0.01, 0.99);
        const double fb = rng.uniform(0.01, 0.99);
        const double r = rng.uniform(0.1, 10.0);
        const double reg = interval_regularizer(fa, fb, r);
        const double bound = 4.0 * (fa - fb) * (fa - fb) / r;
        CHECK(reg >= bound - 1e-12);
        if (std::abs(fa - fb) > 1e-3) CHECK(reg > bound);
    }
}

TEST_CASE("evaluate: uniform-density worked values") {
    const Conditional1D cond(Density(Uniform1D{0.0, 1.0}), {0.0, 1.0},
                             {0.25, 0.75});
    CHECK(cond.evaluate(0.5) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(cond.evaluate(0.25) == doctest::Approx(0.3705905).epsilon(1e-6));
    CHECK(cond.evaluate(0.0) == doctest::Approx(0.25));
    CHECK(cond.evaluate(1.0) == doctest::Approx(0.75));
    CHECK(cond.evaluate(-5.0) == doctest::Approx(0.25)); // constant tails
    CHECK(cond.evaluate(7.0) == doctest::Approx(0.75));

    const Conditional1D flat(Density(Uniform1D{0.0, 1.0}), {0.0, 1.0},
                             {0.9, 0.9});
    for (double x : {0.1, 0.33, 0.5, 0.95})
        CHECK(flat.evaluate(x) == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("evaluate: monotone between anchors") {
    const Conditional1D cond(Density(Gaussian{{0.5}, 0.4}), {0.0, 1.0},
                             {0.1, 0.8});
    double prev = cond.evaluate(0.0);
    for (int i = 1; i <= 200; ++i) {
        const double f = cond.evaluate(i / 200.0);
        CHECK(f >= prev - 1e-14);
        prev = f;
    }
}

TEST_CASE("total_regularizer: values and midpoint insertion") {
    const Conditional1D single(Density(Uniform1D{0.0, 1.0}), {0.5}, {0.8});
    CHECK(single.total_regularizer() == 0.0);

    const Conditional1D two(Density(Uniform1D{0.0, 1.0}), {0.0, 1.0},
                            {0.25, 0.75});
    CHECK(two.total_regularizer() ==
          doctest::Approx(1.0966227).epsilon(1e-6));

    // Insert a g-collinear midpoint: total must not change.
    const double g0 = g_transform(0.25), g1 = g_transform(0.75);
    const double fm = g_inverse(0.5 * (g0 + g1));
    const Conditional1D three(Density(Uniform1D{0.0, 1.0}), {0.0, 0.5, 1.0},
                              {0.25, fm, 0.75});
    CHECK(std::abs(three.total_regularizer() - two.total_regularizer()) <
          1e-10);
}

TEST_CASE("zero-density gap: split into independent components") {
    const Density d = gapped_uniforms();
    const auto anchors = AnchorSet::from_points({{0.5, 1}, {2.5, -1}});
    const Conditional1D cond = fit_anchors(anchors, d, 5.0, 3);
    // Decoupled anchors revert to their independent optima at any lambda.
    CHECK(cond.values()[0] == doctest::Approx(1.0 - kAnchorClamp));
    CHECK(cond.values()[1] == doctest::Approx(kAnchorClamp));
    CHECK(cond.total_regularizer() == 0.0);
    // Constant on each side of the gap, at the adjacent anchor value.
    CHECK(cond.evaluate(1.2) == doctest::Approx(1.0 - kAnchorClamp));
    CHECK(cond.evaluate(2.2) == doctest::Approx(kAnchorClamp));
}

TEST_CASE("fit_anchors: lambda extremes") {
    const Density u(Uniform1D{0.0, 1.0});
    const auto anchors = AnchorSet::from_points({{0.0, 1}, {1.0, -1}});

    const Conditional1D strong = fit_anchors(anchors, u, 1e9, 5);
    CHECK(strong.values()[0] == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(strong.values()[1] == doctest::Approx(0.5).epsilon(1e-3));

    const Conditional1D free = fit_anchors(anchors, u, 0.0, 5);
    CHECK(free.values()[0] == doctest::Approx(1.0 - kAnchorClamp));
    CHECK(free.values()[1] == doctest::Approx(kAnchorClamp));

    CHECK_THROWS_AS(fit_anchors(anchors, u, -1.0), std::invalid_argument);
}

TEST_CASE("fit_anchors: matches the 2-variable grid-search oracle") {
    const Density u(Uniform1D{0.0, 1.0});
    const auto anchors = AnchorSet::from_points({{0.0, 1}, {1.0, -1}});
    const double lambda = 1.0;
    const Conditional1D cond = fit_anchors(anchors, u, lambda, 11);
    const double solver_obj = anchor_objective(anchors, cond, lambda);
    const double recint = u.reciprocal_integral(0.0, 1.0);
    const auto grid = oracles::anchor_grid_search(1, 0, 0, 1, recint, lambda);
    CHECK(solver_obj >= grid.objective - 1e-9);
    CHECK(std::abs(solver_obj - grid.objective) < 1e-3);
}

TEST_CASE("fit_anchors: duplicate anchors merge with multiplicities") {
    const Density u(Uniform1D{0.0, 1.0});
    const auto anchors =
        AnchorSet::from_points({{0.3, 1}, {0.3, -1}, {0.3, 1}, {0.8, -1}});
    CHECK(anchors.size() == 2);
    CHECK(anchors.pos_count[0] == 2);
    CHECK(anchors.neg_count[0] == 1);
    const Conditional1D cond = fit_anchors(anchors, u, 1e9, 4);
    // At huge lambda both values approach the pooled label fraction 2/4.
    CHECK(cond.values()[0] == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("emit_curve: endpoints, monotone steepness profile") {
    const Conditional1D cond(Density(Uniform1D{0.0, 1.0}), {0.0, 1.0},
                             {0.01, 0.99});
    const auto two = cond.emit_curve(2);
    CHECK(two.size() == 2);
    CHECK(two.front().first == 0.0);
    CHECK(two.back().first == 1.0);
    CHECK(two.front().second == doctest::Approx(0.01));
    CHECK(two.back().second == doctest::Approx(0.99));

    const auto curve = cond.emit_curve(101);
    double max_step = 0.0;
    std::size_t argmax = 0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const double step = curve[i].second - curve[i - 1].second;
        CHECK(step > 0.0); // strictly monotone
        if (step > max_step) {
            max_step = step;
            argmax = i;
        }
    }
    // Steepest where f crosses 1/2.
    const double mid_lo = curve[argmax - 1].second;
    const double mid_hi = curve[argmax].second;
    CHECK(mid_lo < 0.5);
    CHECK(mid_hi > 0.5);
}

TEST_CASE("emit_curve: variation concentrates in the low-density valley") {
    const Density d = bimodal_bumps();
    const Conditional1D cond(d, {0.5, 2.5}, {0.2, 0.8});
    const auto curve = cond.emit_curve(201);
    double gap_step = 0.0, bump_step = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const double x = curve[i].first;
        const double step =
            std::abs(curve[i].second - curve[i - 1].second);
        if (x > 1.0 && x <= 2.0)
            gap_step = std::max(gap_step, step);
        else
            bump_step = std::max(bump_step, step);
    }
    CHECK(gap_step > bump_step);
}

TEST_CASE("closed form agrees with the discretized functional oracle") {
    struct Case {
        Density density;
        double a, b, fa, fb;
    };
    std::vector<Case> cases;
    cases.push_back({Density(Uniform1D{0.0, 1.0}), 0.0, 1.0, 0.25, 0.75});
    cases.push_back({Density(Gaussian{{0.5}, 0.5}), -0.3, 1.2, 0.9, 0.15});
    cases.push_back({Density(Laplace1D{0.0, 1.0}), 0.2, 1.4, 0.35, 0.6});
    for (const auto& c : cases) {
        const auto oracle = oracles::minimize_interval_functional(
            c.density, c.a, c.b, c.fa, c.fb, 10000);
        const double recint = c.density.reciprocal_integral(c.a, c.b);
        const double closed = interval_regularizer(c.fa, c.fb, recint);
        CHECK(oracle.energy ==
              doctest::Approx(closed).epsilon(1e-3));

        const Conditional1D cond(c.density, {c.a, c.b}, {c.fa, c.fb});
        for (int i = 1; i < 8; ++i) {
            const double x = c.a + (c.b - c.a) * (i / 8.0);
            CHECK(cond.evaluate(x) ==
                  doctest::Approx(oracle.interpolate(x)).epsilon(1e-3));
        }
    }
}

TEST_CASE("discretized functional converges to the closed form from above") {
    const Density u(Uniform1D{0.0, 1.0});
    const double recint = u.reciprocal_integral(0.0, 1.0);
    const double closed = interval_regularizer(0.2, 0.9, recint);
    double prev = std::numeric_limits<double>::infinity();
    for (int cells : {100, 1000, 10000}) {
        const auto sol =
            oracles::minimize_interval_functional(u, 0.0, 1.0, 0.2, 0.9,
                                                  cells);
        CHECK(sol.energy >= closed - 1e-9);
        CHECK(sol.energy <= prev + 1e-12);
        prev = sol.energy;
    }
    CHECK(prev == doctest::Approx(closed).epsilon(1e-6));
}

TEST_CASE("Euler-Lagrange residual shrinks at second order") {
    // Closed forms with analytic reciprocal integrals, evaluated in long
    // double so the h = 1e-4 second difference stays above roundoff.
    std::vector<LongDoubleSolution> cases;
    {
        // Uniform density on [0,1], anchors 0.25 / 0.75.
        LongDoubleSolution s;
        s.g_a = -2.0L * std::atan(std::sqrt(3.0L));
        s.dg = -2.0L * std::atan(1.0L / std::sqrt(3.0L)) - s.g_a;
        s.rho = [](long double x) { return x; };
        s.dlogp = [](long double) { return 0.0L; };
        cases.push_back(std::move(s));
    }
    {
        // Laplace(0,1) right flank on [0.2, 1.2]: p = e^{-x}/2,
        // int 1/p = 2(e^x - e^{0.2}).
        LongDoubleSolution s;
        const long double e_a = std::exp(0.2L), e_b = std::exp(1.2L);
        s.g_a = -2.0L * std::atan(std::sqrt(1.0L / 0.35L - 1.0L));
        const long double g_b =
            -2.0L * std::atan(std::sqrt(1.0L / 0.6L - 1.0L));
        s.dg = g_b - s.g_a;
        s.rho = [e_a, e_b](long double x) {
            return (std::exp(x) - e_a) / (e_b - e_a);
        };
        s.dlogp = [](long double) { return -1.0L; };
        cases.push_back(std::move(s));
    }

    // The double-precision evaluate() agrees with the first closed form.
    const Conditional1D cond(Density(Uniform1D{0.0, 1.0}), {0.0, 1.0},
                             {0.25, 0.75});
    for (int i = 1; i < 10; ++i) {
        const double x = i / 10.0;
        CHECK(cond.evaluate(x) ==
              doctest::Approx(static_cast<double>(cases[0].value(x)))
                  .epsilon(1e-9));
    }
    const Conditional1D lap_cond(Density(Laplace1D{0.0, 1.0}), {0.2, 1.2},
                                 {0.35, 0.6});
    for (int i = 1; i < 10; ++i) {
        const double x = 0.2 + i / 10.0;
        CHECK(lap_cond.evaluate(x) ==
              doctest::Approx(static_cast<double>(cases[1].value(x)))
                  .epsilon(1e-9));
    }

    const std::vector<double> hs{1e-2, 1e-3, 1e-4};
    const std::pair<double, double> spans[2] = {{0.05, 0.95}, {0.25, 1.15}};
    for (std::size_t c = 0; c < cases.size(); ++c) {
        std::vector<double> residuals;
        for (double h : hs) {
            long double worst = 0.0L;
            for (int i = 0; i <= 20; ++i) {
                const long double x =
                    spans[c].first +
                    (spans[c].second - spans[c].first) * (i / 20.0L);
                worst = std::max(
                    worst, std::abs(el_residual(
                               cases[c], x, static_cast<long double>(h))));
            }
            residuals.push_back(static_cast<double>(worst));
        }
        const double order = fitted_order(hs, residuals);
        CHECK(order > 1.7);
        CHECK(order < 2.3);
    }
}

TEST_CASE("fit_anchors: three anchors match a 3-variable grid oracle") {
    const Density g(Gaussian{{0.5}, 1.0});
    const auto anchors =
        AnchorSet::from_points({{-0.5, 1}, {0.6, -1}, {1.4, -1}});
    const double lambda = 0.8;
    const Conditional1D cond = fit_anchors(anchors, g, lambda, 5);
    const double got = anchor_objective(anchors, cond, lambda);

    const double r0 = g.reciprocal_integral(-0.5, 0.6);
    const double r1 = g.reciprocal_integral(0.6, 1.4);
    double best = -std::numeric_limits<double>::infinity();
    const int n = 120;
    for (int i = 0; i < n; ++i) {
        const double f0 = 1e-6 + (1.0 - 2e-6) * i / (n - 1.0);
        for (int j = 0; j < n; ++j) {
            const double f1 = 1e-6 + (1.0 - 2e-6) * j / (n - 1.0);
            const double base = std::log(f0) + std::log(1.0 - f1) -
                                lambda * interval_regularizer(f0, f1, r0);
            for (int k = 0; k < n; ++k) {
                const double f2 = 1e-6 + (1.0 - 2e-6) * k / (n - 1.0);
                const double obj =
                    base + std::log(1.0 - f2) -
                    lambda * interval_regularizer(f1, f2, r1);
                best = std::max(best, obj);
            }
        }
    }
    CHECK(got >= best - 1e-9); // solver at least as good as the grid
    CHECK(std::abs(got - best) < 5e-3);
}

TEST_CASE("solve pipeline on a KDE density") {
    // Sample-based marginals enter via a KDE; reciprocal integrals and the
    // interpolant must work through its pdf.
    const Density base = bimodal_bumps();
    GaussianKde kde;
    kde.bandwidth = 0.05;
    for (const auto& x : base.sample(60, 9)) kde.centers.push_back(x);
    const Density density(std::move(kde));

    const auto anchors = AnchorSet::from_points({{0.5, 1}, {2.5, -1}});
    const Conditional1D cond = fit_anchors(anchors, density, 1.0, 7);
    CHECK(cond.values()[0] > 0.5);
    CHECK(cond.values()[1] < 0.5);
    const auto curve = cond.emit_curve(64);
    for (std::size_t i = 1; i < curve.size(); ++i)
        CHECK(curve[i].second <= curve[i - 1].second + 1e-12);
    CHECK(cond.total_regularizer() > 0.0);
}

TEST_CASE("fit_anchors: long anchor chain beats baseline conditionals") {
    const Density g(Gaussian{{0.0}, 2.0});
    Rng rng(123);
    std::vector<Anchor> pts;
    for (int i = 0; i < 50; ++i) {
        const double x = rng.uniform(-3.0, 3.0);
        const int y = rng.uniform() < sigmoid(1.5 * x) ? 1 : -1;
        pts.push_back({x, y});
    }
    const auto anchors = AnchorSet::from_points(std::move(pts));
    for (double lambda : {0.05, 1.0, 25.0}) {
        const Conditional1D cond = fit_anchors(anchors, g, lambda, 77);
        const double solver_obj = anchor_objective(anchors, cond, lambda);
        for (double f : cond.values()) {
            CHECK(f >= kAnchorClamp);
            CHECK(f <= 1.0 - kAnchorClamp);
        }
        // Baselines: the pooled constant and the per-anchor MLE.
        int pos = 0, tot = 0;
        for (std::size_t k = 0; k < anchors.size(); ++k) {
            pos += anchors.pos_count[k];
            tot += anchors.pos_count[k] + anchors.neg_count[k];
        }
        std::vector<double> constant(anchors.size(),
                                     static_cast<double>(pos) / tot);
        std::vector<double> mle;
        for (std::size_t k = 0; k < anchors.size(); ++k)
            mle.push_back(static_cast<double>(anchors.pos_count[k]) /
                          (anchors.pos_count[k] + anchors.neg_count[k]));
        const Conditional1D c_const(g, anchors.locations, constant);
        const Conditional1D c_mle(g, anchors.locations, mle);
        CHECK(solver_obj >=
              anchor_objective(anchors, c_const, lambda) - 1e-9);
        CHECK(solver_obj >= anchor_objective(anchors, c_mle, lambda) - 1e-9);
    }
}

TEST_CASE("anchor and conditional construction errors") {
    CHECK_THROWS_AS(AnchorSet::from_points({}), std::invalid_argument);
    CHECK_THROWS_AS(AnchorSet::from_points({{0.0, 2}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(Conditional1D(Density(Uniform1D{0, 1}), {0.5, 0.5},
                                  {0.2, 0.8}),
                    std::invalid_argument);
    // Density must be positive at anchors.
    const auto anchors = AnchorSet::from_points({{5.0, 1}, {6.0, -1}});
    CHECK_THROWS_AS(fit_anchors(anchors, Density(Uniform1D{0, 1}), 1.0),
                    std::invalid_argument);
}
