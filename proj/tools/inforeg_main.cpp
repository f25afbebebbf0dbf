// inforeg: information-regularized semi-supervised classification CLI.
//
// Subcommands: gen, fit, predict, experiment, solve1d, theory.
// Exit codes: 0 success, 1 usage error, 2 numerical failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "inforeg/inforeg.hpp"

using namespace inforeg;

namespace {

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

int cmd_gen(const std::string& density_path, bool two_gaussians,
            const std::string& config_path, int n, int trial,
            std::uint64_t seed, const std::string& out) {
    if (two_gaussians) {
        ExperimentConfig config;
        if (!config_path.empty()) {
            auto f = detail::open_in(config_path);
            json j;
            f >> j;
            config = j.get<ExperimentConfig>();
        }
        config.seed = seed;
        const TrialData data = gen_two_gaussians(config, trial);
        write_dataset_csv(out + "_train.csv", data.labeled, data.unlabeled);
        write_dataset_csv(out + "_test.csv", data.test, UnlabeledDataset{});
        std::printf("wrote %s_train.csv (%zu labeled + %zu unlabeled), "
                    "%s_test.csv (%zu)\n",
                    out.c_str(), data.labeled.size(), data.unlabeled.size(),
                    out.c_str(), data.test.size());
        return 0;
    }
    const Density density = load_density(density_path);
    UnlabeledDataset pts;
    pts.points = density.sample(static_cast<std::size_t>(n), seed);
    write_dataset_csv(out, LabeledDataset{}, pts);
    std::printf("wrote %s (%zu samples, d=%zu)\n", out.c_str(), pts.size(),
                pts.dim());
    return 0;
}

int cmd_fit(const std::string& data_path, const std::string& reg,
            double lambda, double tau, int restarts, std::uint64_t seed,
            bool bias, bool no_norm_factor, bool continuation,
            const std::string& out) {
    const auto [labeled, unlabeled] = read_dataset_csv(data_path);
    FitConfig fc;
    fc.regularizer = regularizer_from_string(reg);
    fc.lambda = lambda;
    fc.tau = tau;
    fc.restarts = restarts;
    fc.seed = seed;
    fc.bias = bias;
    fc.include_theta_norm_factor = !no_norm_factor;
    std::optional<ContinuationSchedule> schedule;
    if (continuation) schedule = geometric_schedule(lambda);
    const FitResult res =
        fit(labeled, unlabeled, fc, OptimizerConfig{}, schedule);
    ModelFile model{res.theta, fc.bias, fc, res.objective};
    if (!out.empty()) save_model(out, model);
    std::printf("objective %.10g after restart %d; theta =", res.objective,
                res.restart_index);
    for (double t : res.theta) std::printf(" %.6g", t);
    std::printf("\n");
    if (!out.empty()) std::printf("model written to %s\n", out.c_str());
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out) {
    const ModelFile model = load_model(model_path);
    const auto [labeled, unlabeled] = read_dataset_csv(data_path);
    std::ofstream f;
    if (!out.empty()) {
        f.open(out);
        if (!f) throw std::runtime_error("cannot open " + out);
        f << "p,yhat\n";
    }
    auto emit = [&](const Vec& x) {
        const Vec xx = model.bias ? augment(x) : x;
        const double p = predict(model.theta, xx);
        if (f.is_open()) f << p << "," << (p >= 0.5 ? 1 : -1) << "\n";
    };
    for (const auto& pt : labeled.points) emit(pt.x);
    for (const auto& x : unlabeled.points) emit(x);
    if (!labeled.empty()) {
        const LabeledDataset scored =
            model.bias ? augment(labeled) : labeled;
        std::printf("error rate on %zu labeled rows: %.6f\n", scored.size(),
                    error_rate(model.theta, scored));
    }
    std::printf("predicted %zu rows\n", labeled.size() + unlabeled.size());
    return 0;
}

int cmd_experiment(const std::string& config_path, int trials,
                   std::int64_t seed, int threads, const std::string& out) {
    ExperimentConfig config;
    if (!config_path.empty()) {
        auto f = detail::open_in(config_path);
        json j;
        f >> j;
        config = j.get<ExperimentConfig>();
    }
    if (trials > 0) config.trials = trials;
    if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
    const ExperimentReport report = run_experiment(config, threads);
    for (const auto& m : report.methods)
        std::printf("%-16s mean error %.4f  (se %.4f, %d failures)\n",
                    to_string(m.method).c_str(), m.mean_error, m.std_error,
                    m.failures);
    std::printf("wall time %.2fs\n", report.wall_seconds);
    if (!out.empty()) {
        emit_report(report, out);
        std::printf("report written to %s.json / %s.csv\n", out.c_str(),
                    out.c_str());
    }
    return 0;
}

int cmd_solve1d(const std::string& density_path, const std::string& data_path,
                double lambda, int grid, std::uint64_t seed,
                const std::string& out) {
    const Density density = load_density(density_path);
    const auto anchors = AnchorSet::from_points(read_anchors_csv(data_path));
    const Conditional1D cond = fit_anchors(anchors, density, lambda, seed);
    const double reg = cond.total_regularizer();
    const double ll = anchor_log_likelihood(anchors, cond);
    json summary = {{"objective", ll - lambda * reg},
                    {"log_likelihood", ll},
                    {"regularizer", reg},
                    {"lambda", lambda},
                    {"anchor_locations", cond.locations()},
                    {"anchor_values", cond.values()}};
    if (!out.empty()) {
        write_curve_csv(out + "_curve.csv",
                        cond.emit_curve(static_cast<std::size_t>(grid)));
        auto f = detail::open_out(out + "_summary.json");
        f << summary.dump(2) << "\n";
        std::printf("wrote %s_curve.csv and %s_summary.json\n", out.c_str(),
                    out.c_str());
    }
    std::printf("%s\n", summary.dump(2).c_str());
    return 0;
}

// --- theory subcommands ---

int cmd_theory_profile(const std::string& density_path,
                       const std::string& alphas_csv,
                       const std::string& out) {
    const Density density = load_density(density_path);
    const auto alphas = parse_double_list(alphas_csv);
    const ComplexityProfile prof = complexity_profile(density, alphas);
    json j = {{"alphas", prof.alphas},
              {"m_values", prof.m_values},
              {"c_values", prof.c_values}};
    if (!out.empty()) {
        auto f = detail::open_out(out);
        f << j.dump(2) << "\n";
    }
    std::printf("alpha,m_p,c_p\n");
    for (std::size_t i = 0; i < prof.alphas.size(); ++i)
        std::printf("%.12g,%.12g,%d\n", prof.alphas[i], prof.m_values[i],
                    prof.c_values[i]);
    return 0;
}

int cmd_theory_bound(const std::string& density_path, double eps,
                     double delta, double gamma) {
    const TheoryQuery q{eps, delta, gamma, load_density(density_path)};
    const auto res = sample_bound(q);
    json j = {{"n", res.n},
              {"raw", res.raw},
              {"alpha_star", res.alpha_star},
              {"m_at_alpha_star", res.m_at_alpha},
              {"c_value", res.c_value}};
    std::printf("%s\n", j.dump(2).c_str());
    return 0;
}

int cmd_theory_lemma3(const std::string& density_path, int instances,
                      std::uint64_t seed) {
    const Density density = density_path.empty()
                                ? Density(Gaussian{{0.0}, 1.0})
                                : load_density(density_path);
    const Interval sup = density.effective_support();
    const double lo = std::max(sup.lo, -6.0);
    const double hi = std::min(sup.hi, 6.0);
    Rng rng(derive_seed(seed));
    double min_margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < instances; ++k) {
        const double x1 =
            rng.uniform(lo + 0.02 * (hi - lo), lo + 0.45 * (hi - lo));
        const double x2 =
            rng.uniform(lo + 0.55 * (hi - lo), hi - 0.02 * (hi - lo));
        const auto h = random_spline_conditional(x1, x2, rng);
        min_margin =
            std::min(min_margin, lemma3_check(h, density, x1, x2).margin);
    }
    const bool pass = min_margin >= -1e-9;
    json j = {{"instances", instances},
              {"min_margin", min_margin},
              {"pass", pass}};
    std::printf("%s\n", j.dump(2).c_str());
    return pass ? 0 : 2;
}

int cmd_theory_lemma4(const std::string& density_path, int instances,
                      std::uint64_t seed) {
    const Density density = density_path.empty()
                                ? Density(Uniform1D{-1.0, 1.0})
                                : load_density(density_path);
    const Interval sup = density.effective_support();
    const double lo = std::max(sup.lo, -8.0), hi = std::min(sup.hi, 8.0);
    Rng rng(derive_seed(seed, 4));
    double min_slack = std::numeric_limits<double>::infinity();
    for (int k = 0; k < instances; ++k) {
        const auto h1 = random_spline_conditional(lo, hi, rng);
        const auto h2 = random_spline_conditional(lo, hi, rng);
        const auto truth = random_spline_conditional(lo, hi, rng);
        const auto sample =
            make_labeled_sample(density, truth, 50, seed * 1000 + k);
        const auto rep = lemma4_check(h1, h2, density, sample, truth);
        min_slack = std::min({min_slack, rep.slack_true, rep.slack_emp});
    }
    const bool pass = min_slack >= -1e-9;
    json j = {{"instances", instances},
              {"min_slack", min_slack},
              {"pass", pass}};
    std::printf("%s\n", j.dump(2).c_str());
    return pass ? 0 : 2;
}

int cmd_theory_mi(const std::string& density_path, int instances,
                  std::uint64_t seed, const std::string& diameters_csv) {
    const Density density = density_path.empty()
                                ? Density(Uniform1D{-1.0, 1.0})
                                : load_density(density_path);
    const auto diameters = parse_double_list(diameters_csv);
    Rng rng(derive_seed(seed, 9));
    double min_order = std::numeric_limits<double>::infinity();
    for (int k = 0; k < instances; ++k) {
        const auto h = random_spline_conditional(-0.6, 0.6, rng);
        RegionSpec region{rng.uniform(-0.2, 0.2), 0.2, h, density};
        const auto rep = mi_region_check(region, diameters);
        min_order = std::min(min_order, rep.fitted_order);
    }
    const bool pass = min_order >= 2.5;
    json j = {{"instances", instances},
              {"diameters", diameters},
              {"min_fitted_order", min_order},
              {"pass", pass}};
    std::printf("%s\n", j.dump(2).c_str());
    return pass ? 0 : 2;
}

int cmd_theory_isotropy(int dim, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 11));
    std::vector<Vec> cov(static_cast<std::size_t>(dim),
                         Vec(static_cast<std::size_t>(dim), 0.0));
    for (int i = 0; i < dim; ++i) cov[i][i] = 3.0;
    std::vector<Vec> dirs;
    for (int i = 0; i < 100; ++i) {
        Vec v(static_cast<std::size_t>(dim));
        double n = 0.0;
        for (double& x : v) {
            x = rng.normal();
            n += x * x;
        }
        for (double& x : v) x /= std::sqrt(n);
        dirs.push_back(std::move(v));
    }
    const auto scalar = isotropy_check(cov, dirs);
    std::vector<Vec> diag = cov;
    diag[0][0] = 1.0;
    diag[1][1] = 2.0;
    std::vector<Vec> eig;
    for (int i = 0; i < 2; ++i) {
        Vec e(static_cast<std::size_t>(dim), 0.0);
        e[static_cast<std::size_t>(i)] = 1.0;
        eig.push_back(std::move(e));
    }
    const auto aniso = isotropy_check(diag, eig);
    const bool pass = scalar.spread <= 1e-12 && aniso.spread > 0.0;
    json j = {{"scalar_spread", scalar.spread},
              {"anisotropic_spread", aniso.spread},
              {"pass", pass}};
    std::printf("%s\n", j.dump(2).c_str());
    return pass ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"information-regularized semi-supervised classification"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "sample synthetic data");
    std::string gen_density, gen_config, gen_out = "data.csv";
    bool gen_two = false;
    int gen_n = 100, gen_trial = 0;
    std::uint64_t gen_seed = 0;
    gen->add_option("--density", gen_density, "density JSON file");
    gen->add_flag("--two-gaussians", gen_two,
                  "two-Gaussian experiment data (labeled + unlabeled + test)");
    gen->add_option("--config", gen_config, "experiment config JSON");
    gen->add_option("-n,--n", gen_n, "number of samples");
    gen->add_option("--trial", gen_trial, "trial index");
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--out", gen_out, "output CSV path (or prefix)");

    // fit
    auto* fitc = app.add_subcommand("fit", "fit a regularized logistic model");
    std::string fit_data, fit_reg = "info-emp", fit_out = "model.json";
    double fit_lambda = 1.0, fit_tau = 0.25;
    int fit_restarts = 8;
    std::uint64_t fit_seed = 0;
    bool fit_bias = false, fit_no_norm = false, fit_cont = false;
    fitc->add_option("--data", fit_data, "dataset CSV (labeled + unlabeled)")
        ->required();
    fitc->add_option("--reg", fit_reg,
                     "regularizer: none|l2|info-emp|info-kernel");
    fitc->add_option("--lambda", fit_lambda, "regularization strength");
    fitc->add_option("--tau", fit_tau, "kernel variance (info-kernel)");
    fitc->add_option("--restarts", fit_restarts, "random restarts");
    fitc->add_option("--seed", fit_seed, "RNG seed");
    fitc->add_flag("--bias", fit_bias, "append a constant-1 bias feature");
    fitc->add_flag("--no-norm-factor", fit_no_norm,
                   "drop the |theta|^2 factor in the empirical regularizer");
    fitc->add_flag("--continuation", fit_cont,
                   "solve along a geometric lambda ladder");
    fitc->add_option("--out", fit_out, "model JSON output");

    // predict
    auto* pred = app.add_subcommand("predict", "score data with a model");
    std::string pred_model, pred_data, pred_out;
    pred->add_option("--model", pred_model, "model JSON")->required();
    pred->add_option("--data", pred_data, "dataset CSV")->required();
    pred->add_option("--out", pred_out, "predictions CSV");

    // experiment
    auto* exp = app.add_subcommand("experiment",
                                   "two-Gaussian comparison experiment");
    std::string exp_config, exp_out;
    int exp_trials = 0, exp_threads = 0;
    std::int64_t exp_seed = -1;
    exp->add_option("--config", exp_config, "experiment config JSON");
    exp->add_option("--trials", exp_trials, "override trial count");
    exp->add_option("--seed", exp_seed, "override seed");
    exp->add_option("--threads", exp_threads, "worker threads (0 = auto)");
    exp->add_option("--out", exp_out, "report prefix (.json/.csv)");

    // solve1d
    auto* s1d = app.add_subcommand("solve1d",
                                   "analytic 1D nonparametric solver");
    std::string s1d_density, s1d_data, s1d_out;
    double s1d_lambda = 1.0;
    int s1d_grid = 512;
    std::uint64_t s1d_seed = 0;
    s1d->add_option("--density", s1d_density, "density JSON")->required();
    s1d->add_option("--data", s1d_data, "anchors CSV (x,y)")->required();
    s1d->add_option("--lambda", s1d_lambda, "regularization strength");
    s1d->add_option("--grid", s1d_grid, "curve grid size");
    s1d->add_option("--seed", s1d_seed, "RNG seed");
    s1d->add_option("--out", s1d_out, "output prefix");

    // theory
    auto* theory = app.add_subcommand("theory",
                                      "complexity calculators and checkers");
    theory->require_subcommand(1);
    std::string th_density, th_alphas = "0.05,0.1,0.2", th_out;
    std::string th_diameters = "0.4,0.2,0.1,0.05";
    double th_eps = 0.1, th_delta = 0.1, th_gamma = 1.0;
    int th_instances = 100, th_dim = 5;
    std::uint64_t th_seed = 0;
    auto* prof = theory->add_subcommand("profile", "m_p / c_p profile");
    prof->add_option("--density", th_density, "density JSON")->required();
    prof->add_option("--alphas", th_alphas, "comma-separated alpha grid");
    prof->add_option("--out", th_out, "profile JSON output");
    auto* bound = theory->add_subcommand("bound", "Theorem-2-style bound");
    bound->add_option("--density", th_density, "density JSON")->required();
    bound->add_option("--epsilon", th_eps, "accuracy");
    bound->add_option("--delta", th_delta, "confidence");
    bound->add_option("--gamma", th_gamma, "regularizer budget");
    auto* l3 = theory->add_subcommand("check-lemma3", "variation bound sweep");
    l3->add_option("--density", th_density, "density JSON (default N(0,1))");
    l3->add_option("--instances", th_instances, "random instances");
    l3->add_option("--seed", th_seed, "RNG seed");
    auto* l4 = theory->add_subcommand("check-lemma4", "square-loss sweep");
    l4->add_option("--density", th_density, "density JSON (default U(-1,1))");
    l4->add_option("--instances", th_instances, "random instances");
    l4->add_option("--seed", th_seed, "RNG seed");
    auto* mi = theory->add_subcommand("check-mi",
                                      "regional MI asymptotics check");
    mi->add_option("--density", th_density, "density JSON (default U(-1,1))");
    mi->add_option("--instances", th_instances, "random instances");
    mi->add_option("--diameters", th_diameters, "region diameters");
    mi->add_option("--seed", th_seed, "RNG seed");
    auto* iso = theory->add_subcommand("check-isotropy",
                                       "Theorem-1 isotropy check");
    iso->add_option("--dim", th_dim, "dimension");
    iso->add_option("--seed", th_seed, "RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed())
            return cmd_gen(gen_density, gen_two, gen_config, gen_n,
                           gen_trial, gen_seed, gen_out);
        if (fitc->parsed())
            return cmd_fit(fit_data, fit_reg, fit_lambda, fit_tau,
                           fit_restarts, fit_seed, fit_bias, fit_no_norm,
                           fit_cont, fit_out);
        if (pred->parsed()) return cmd_predict(pred_model, pred_data, pred_out);
        if (exp->parsed())
            return cmd_experiment(exp_config, exp_trials, exp_seed,
                                  exp_threads, exp_out);
        if (s1d->parsed())
            return cmd_solve1d(s1d_density, s1d_data, s1d_lambda, s1d_grid,
                               s1d_seed, s1d_out);
        if (theory->parsed()) {
            if (prof->parsed())
                return cmd_theory_profile(th_density, th_alphas, th_out);
            if (bound->parsed())
                return cmd_theory_bound(th_density, th_eps, th_delta,
                                        th_gamma);
            if (l3->parsed())
                return cmd_theory_lemma3(th_density, th_instances, th_seed);
            if (l4->parsed())
                return cmd_theory_lemma4(th_density, th_instances, th_seed);
            if (mi->parsed())
                return cmd_theory_mi(th_density, th_instances, th_seed,
                                     th_diameters);
            if (iso->parsed()) return cmd_theory_isotropy(th_dim, th_seed);
        }
        std::fprintf(stderr, "no subcommand selected\n");
        return 1;
    } catch (const numerical_error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
