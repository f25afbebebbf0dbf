#pragma once

#include <atomic>
#include <mutex>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dataset.hpp"
#include "logistic.hpp"
#include "optimize.hpp"
#include "rng.hpp"

namespace inforeg {

/// Two-Gaussian synthetic classification experiment: equiprobable labels,
/// x | y ~ N(mean_y, variance * I) in 2D.
struct ExperimentConfig {
    int n_labeled = 5;
    int n_unlabeled = 100;
    int n_test = 2000;
    int n_validation = 500;
    int trials = 100;
    double variance = 1.0;        // shared isotropic covariance scale
    double mean_separation = 2.0; // between means, along the first axis
    std::optional<std::pair<Vec, Vec>> class_means; // overrides separation
    std::vector<double> lambda_grid{0.01, 0.1, 1.0, 10.0, 100.0};
    double tau = 0.25;
    std::vector<Regularizer> methods{Regularizer::l2,
                                     Regularizer::info_empirical,
                                     Regularizer::info_kernel};
    std::uint64_t seed = 0;
    int restarts = 8;
    OptimizerConfig optimizer{AscentMethod::gradient, 1.0, 1e-5, 300};

    void validate() const {
        if (n_labeled < 2)
            throw std::invalid_argument("ExperimentConfig: n_labeled >= 2");
        if (trials < 1)
            throw std::invalid_argument("ExperimentConfig: trials >= 1");
        if (n_unlabeled < 1 || n_test < 1 || n_validation < 1)
            throw std::invalid_argument("ExperimentConfig: dataset sizes >= 1");
        if (!(variance > 0.0))
            throw std::invalid_argument("ExperimentConfig: variance > 0");
        if (lambda_grid.empty() || methods.empty())
            throw std::invalid_argument(
                "ExperimentConfig: empty lambda grid or method list");
        if (restarts < 1)
            throw std::invalid_argument("ExperimentConfig: restarts >= 1");
    }

    std::pair<Vec, Vec> resolved_means() const {
        if (class_means) return *class_means;
        return {Vec{-0.5 * mean_separation, 0.0},
                Vec{+0.5 * mean_separation, 0.0}};
    }
};

struct TrialData {
    LabeledDataset labeled;
    UnlabeledDataset unlabeled;
    LabeledDataset test;
};

namespace detail {

// RNG purpose tags; every (seed, trial, purpose) triple is its own stream.
enum class StreamTag : std::uint64_t {
    labeled = 1,
    unlabeled = 2,
    test = 3,
    validation = 4,
    fit_base = 16
};

inline LabeledDataset draw_joint(const ExperimentConfig& config,
                                 int trial_index, StreamTag tag, int n) {
    const auto [mean_neg, mean_pos] = config.resolved_means();
    const double sd = std::sqrt(config.variance);
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(trial_index),
                        static_cast<std::uint64_t>(tag)));
    LabeledDataset out;
    out.points.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int y = rng.uniform() < 0.5 ? -1 : 1;
        const Vec& mean = y > 0 ? mean_pos : mean_neg;
        Vec x(mean.size());
        for (std::size_t j = 0; j < x.size(); ++j)
            x[j] = mean[j] + sd * rng.normal();
        out.points.push_back({std::move(x), y});
    }
    return out;
}

} // namespace detail

/// Per-trial synthetic data. Deterministic in (config.seed, trial_index);
/// the labeled set is redrawn until both classes are present.
inline TrialData gen_two_gaussians(const ExperimentConfig& config,
                                   int trial_index) {
    config.validate();
    TrialData data;
    const auto [mean_neg, mean_pos] = config.resolved_means();
    const double sd = std::sqrt(config.variance);
    {
        Rng rng(derive_seed(config.seed,
                            static_cast<std::uint64_t>(trial_index),
                            static_cast<std::uint64_t>(
                                detail::StreamTag::labeled)));
        for (;;) {
            data.labeled.points.clear();
            bool has_pos = false, has_neg = false;
            for (int i = 0; i < config.n_labeled; ++i) {
                const int y = rng.uniform() < 0.5 ? -1 : 1;
                (y > 0 ? has_pos : has_neg) = true;
                const Vec& mean = y > 0 ? mean_pos : mean_neg;
                Vec x(mean.size());
                for (std::size_t j = 0; j < x.size(); ++j)
                    x[j] = mean[j] + sd * rng.normal();
                data.labeled.points.push_back({std::move(x), y});
            }
            if (has_pos && has_neg) break;
        }
    }
    for (auto& p : detail::draw_joint(config, trial_index,
                                      detail::StreamTag::unlabeled,
                                      config.n_unlabeled)
                       .points)
        data.unlabeled.points.push_back(std::move(p.x));
    data.test = detail::draw_joint(config, trial_index,
                                   detail::StreamTag::test, config.n_test);
    return data;
}

struct MethodResult {
    Regularizer method = Regularizer::l2;
    double mean_error = 0.0;
    double std_error = 0.0;
    std::vector<double> trial_errors;
    std::vector<double> selected_lambdas;
    int failures = 0;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<MethodResult> methods;
    double wall_seconds = 0.0;
};

namespace detail {

struct TrialOutcome {
    double error = 0.0;
    double lambda = 0.0;
    bool failed = false;
    std::string what;
};

inline TrialOutcome run_method_trial(const ExperimentConfig& config,
                                     int trial_index, std::size_t method_index,
                                     const TrialData& data,
                                     const LabeledDataset& validation) {
    TrialOutcome out;
    try {
        FitConfig fc;
        fc.regularizer = config.methods[method_index];
        fc.tau = config.tau;
        fc.restarts = config.restarts;
        fc.include_theta_norm_factor = true;
        fc.bias = false;
        Vec best_theta;
        double best_val_err = 0.0;
        double best_lambda = 0.0;
        for (std::size_t li = 0; li < config.lambda_grid.size(); ++li) {
            fc.lambda = config.lambda_grid[li];
            fc.seed = derive_seed(
                config.seed, static_cast<std::uint64_t>(trial_index),
                static_cast<std::uint64_t>(StreamTag::fit_base) +
                    method_index * 64 + li);
            const FitResult fr =
                fit(data.labeled, data.unlabeled, fc, config.optimizer);
            const double ve = error_rate(fr.theta, validation);
            if (best_theta.empty() || ve < best_val_err) {
                best_theta = fr.theta;
                best_val_err = ve;
                best_lambda = fc.lambda;
            }
        }
        out.error = error_rate(best_theta, data.test);
        out.lambda = best_lambda;
    } catch (const std::exception& e) {
        out.failed = true;
        out.what = e.what();
    }
    return out;
}

} // namespace detail

/// Run the full experiment: per trial, fit every method at every lambda,
/// select lambda on a fresh validation draw, score on the test set.
/// Trials run concurrently; results are keyed by trial index, so any
/// execution order yields the identical report.
inline ExperimentReport run_experiment(const ExperimentConfig& config,
                                       int threads = 0) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n_methods = config.methods.size();
    std::vector<std::vector<detail::TrialOutcome>> outcomes(
        n_methods, std::vector<detail::TrialOutcome>(
                       static_cast<std::size_t>(config.trials)));

    int n_workers = threads > 0
                        ? threads
                        : static_cast<int>(std::min<unsigned>(
                              std::max(1u, std::thread::hardware_concurrency()),
                              static_cast<unsigned>(config.trials)));
    std::atomic<int> next_trial{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        try {
            for (;;) {
                const int t = next_trial.fetch_add(1);
                if (t >= config.trials) return;
                const TrialData data = gen_two_gaussians(config, t);
                LabeledDataset validation = detail::draw_joint(
                    config, t, detail::StreamTag::validation,
                    config.n_validation);
                bool any_ok = false;
                for (std::size_t m = 0; m < n_methods; ++m) {
                    outcomes[m][static_cast<std::size_t>(t)] =
                        detail::run_method_trial(config, t, m, data,
                                                 validation);
                    any_ok |= !outcomes[m][static_cast<std::size_t>(t)].failed;
                }
                if (!any_ok)
                    throw numerical_error(
                        "run_experiment: every method failed on trial " +
                        std::to_string(t) + ": " +
                        outcomes[0][static_cast<std::size_t>(t)].what);
            }
        } catch (...) {
            const std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            next_trial.store(config.trials);
        }
    };
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    ExperimentReport report;
    report.config = config;
    for (std::size_t m = 0; m < n_methods; ++m) {
        MethodResult res;
        res.method = config.methods[m];
        double sum = 0.0;
        int ok = 0;
        for (const auto& o : outcomes[m]) {
            res.trial_errors.push_back(o.failed ? -1.0 : o.error);
            res.selected_lambdas.push_back(o.failed ? -1.0 : o.lambda);
            if (o.failed) {
                ++res.failures;
            } else {
                sum += o.error;
                ++ok;
            }
        }
        res.mean_error = ok > 0 ? sum / ok : 0.0;
        double ssq = 0.0;
        for (const auto& o : outcomes[m])
            if (!o.failed) {
                const double d = o.error - res.mean_error;
                ssq += d * d;
            }
        res.std_error =
            ok > 1 ? std::sqrt(ssq / (ok - 1)) / std::sqrt(ok) : 0.0;
        report.methods.push_back(std::move(res));
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return report;
}

} // namespace inforeg
