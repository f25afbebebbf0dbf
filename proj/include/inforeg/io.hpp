#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dataset.hpp"
#include "density.hpp"
#include "harness.hpp"
#include "logistic.hpp"
#include "nonparam1d.hpp"

namespace inforeg {

using json = nlohmann::json;

namespace detail {

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    return f;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Density JSON

inline json density_to_json(const Density& d) {
    return std::visit(
        [](const auto& n) -> json {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Uniform1D>)
                return {{"kind", "uniform"}, {"lo", n.lo}, {"hi", n.hi}};
            else if constexpr (std::is_same_v<T, Gaussian>)
                return {{"kind", "gaussian"},
                        {"mean", n.mean},
                        {"variance", n.variance}};
            else if constexpr (std::is_same_v<T, Laplace1D>)
                return {{"kind", "laplace"},
                        {"location", n.location},
                        {"scale", n.scale}};
            else if constexpr (std::is_same_v<T, Mixture>) {
                json comps = json::array();
                for (std::size_t i = 0; i < n.weights.size(); ++i)
                    comps.push_back(
                        {{"weight", n.weights[i]},
                         {"density", density_to_json(n.components[i])}});
                return {{"kind", "mixture"}, {"components", comps}};
            } else if constexpr (std::is_same_v<T, GaussianKde>)
                return {{"kind", "kde"},
                        {"centers", n.centers},
                        {"bandwidth", n.bandwidth}};
            else
                throw std::invalid_argument(
                    "density_to_json: Empirical has no JSON form");
        },
        d.node());
}

inline Density density_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "uniform")
        return Density(Uniform1D{j.at("lo").get<double>(),
                                 j.at("hi").get<double>()});
    if (kind == "gaussian") {
        Gaussian g;
        if (j.at("mean").is_array())
            g.mean = j.at("mean").get<Vec>();
        else
            g.mean = {j.at("mean").get<double>()};
        g.variance = j.at("variance").get<double>();
        return Density(std::move(g));
    }
    if (kind == "laplace")
        return Density(Laplace1D{j.at("location").get<double>(),
                                 j.at("scale").get<double>()});
    if (kind == "mixture") {
        Mixture m;
        for (const auto& c : j.at("components")) {
            m.weights.push_back(c.at("weight").get<double>());
            m.components.push_back(density_from_json(c.at("density")));
        }
        return Density(std::move(m));
    }
    if (kind == "kde") {
        GaussianKde k;
        for (const auto& c : j.at("centers")) {
            if (c.is_array())
                k.centers.push_back(c.get<Vec>());
            else
                k.centers.push_back({c.get<double>()});
        }
        k.bandwidth = j.at("bandwidth").get<double>();
        return Density(std::move(k));
    }
    throw std::invalid_argument("density_from_json: unknown kind " + kind);
}

inline Density load_density(const std::string& path) {
    auto f = detail::open_in(path);
    json j;
    f >> j;
    return density_from_json(j);
}

// ---------------------------------------------------------------------------
// Dataset CSV: header "x1,...,xd,y"; empty y marks an unlabeled row.

inline void write_dataset_csv(const std::string& path,
                              const LabeledDataset& labeled,
                              const UnlabeledDataset& unlabeled) {
    std::size_t d = 0;
    if (!labeled.empty()) d = labeled.dim();
    else if (!unlabeled.empty()) d = unlabeled.dim();
    else throw std::invalid_argument("write_dataset_csv: both sets empty");
    auto f = detail::open_out(path);
    for (std::size_t i = 0; i < d; ++i) f << "x" << (i + 1) << ",";
    f << "y\n";
    for (const auto& p : labeled.points) {
        for (double v : p.x) f << detail::fmt_double(v) << ",";
        f << p.y << "\n";
    }
    for (const auto& x : unlabeled.points) {
        for (double v : x) f << detail::fmt_double(v) << ",";
        f << "\n";
    }
}

inline std::pair<LabeledDataset, UnlabeledDataset> read_dataset_csv(
    const std::string& path) {
    auto f = detail::open_in(path);
    std::string line;
    if (!std::getline(f, line))
        throw std::runtime_error("empty dataset file: " + path);
    const auto header = detail::split_csv_line(line);
    if (header.size() < 2 || header.back() != "y")
        throw std::runtime_error("dataset header must be x1,...,xd,y: " +
                                 path);
    const std::size_t d = header.size() - 1;
    LabeledDataset labeled;
    UnlabeledDataset unlabeled;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != d + 1)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected " + std::to_string(d + 1) +
                                     " fields");
        Vec x(d);
        for (std::size_t i = 0; i < d; ++i) x[i] = std::stod(fields[i]);
        if (fields[d].empty()) {
            unlabeled.points.push_back(std::move(x));
        } else {
            const int y = std::stoi(fields[d]);
            labeled.points.push_back({std::move(x), y});
        }
    }
    labeled.validate();
    unlabeled.validate();
    return {std::move(labeled), std::move(unlabeled)};
}

// ---------------------------------------------------------------------------
// Anchors CSV ("x,y") and curve CSV ("x,f") for solve1d

inline std::vector<Anchor> read_anchors_csv(const std::string& path) {
    auto f = detail::open_in(path);
    std::string line;
    if (!std::getline(f, line))
        throw std::runtime_error("empty anchors file: " + path);
    std::vector<Anchor> anchors;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 2)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected x,y");
        anchors.push_back({std::stod(fields[0]), std::stoi(fields[1])});
    }
    return anchors;
}

inline void write_curve_csv(const std::string& path,
                            const std::vector<std::pair<double, double>>&
                                curve) {
    auto f = detail::open_out(path);
    f << "x,f\n";
    for (const auto& [x, v] : curve)
        f << detail::fmt_double(x) << "," << detail::fmt_double(v) << "\n";
}

// ---------------------------------------------------------------------------
// Model JSON

inline void to_json(json& j, const FitConfig& c) {
    j = {{"lambda", c.lambda},
         {"regularizer", to_string(c.regularizer)},
         {"tau", c.tau},
         {"include_theta_norm_factor", c.include_theta_norm_factor},
         {"bias", c.bias},
         {"restarts", c.restarts},
         {"seed", c.seed}};
}

inline void from_json(const json& j, FitConfig& c) {
    c.lambda = j.value("lambda", 0.0);
    c.regularizer = regularizer_from_string(j.value("regularizer", "none"));
    c.tau = j.value("tau", 0.0);
    c.include_theta_norm_factor = j.value("include_theta_norm_factor", true);
    c.bias = j.value("bias", false);
    c.restarts = j.value("restarts", 1);
    c.seed = j.value("seed", std::uint64_t{0});
}

struct ModelFile {
    Vec theta;
    bool bias = false;
    FitConfig config;
    double objective = 0.0;
};

inline void to_json(json& j, const ModelFile& m) {
    j = {{"theta", m.theta},
         {"bias", m.bias},
         {"config", m.config},
         {"objective", m.objective}};
}

inline void from_json(const json& j, ModelFile& m) {
    m.theta = j.at("theta").get<Vec>();
    m.bias = j.value("bias", false);
    if (j.contains("config")) m.config = j.at("config").get<FitConfig>();
    m.objective = j.value("objective", 0.0);
}

inline void save_model(const std::string& path, const ModelFile& m) {
    auto f = detail::open_out(path);
    f << json(m).dump(2) << "\n";
}

inline ModelFile load_model(const std::string& path) {
    auto f = detail::open_in(path);
    json j;
    f >> j;
    return j.get<ModelFile>();
}

// ---------------------------------------------------------------------------
// Experiment config / report JSON and the flat result CSV

inline void to_json(json& j, const ExperimentConfig& c) {
    json methods = json::array();
    for (auto m : c.methods) methods.push_back(to_string(m));
    j = {{"n_labeled", c.n_labeled},
         {"n_unlabeled", c.n_unlabeled},
         {"n_test", c.n_test},
         {"n_validation", c.n_validation},
         {"trials", c.trials},
         {"variance", c.variance},
         {"mean_separation", c.mean_separation},
         {"lambda_grid", c.lambda_grid},
         {"tau", c.tau},
         {"methods", methods},
         {"seed", c.seed},
         {"restarts", c.restarts}};
    if (c.class_means)
        j["class_means"] = {c.class_means->first, c.class_means->second};
}

inline void from_json(const json& j, ExperimentConfig& c) {
    c.n_labeled = j.value("n_labeled", c.n_labeled);
    c.n_unlabeled = j.value("n_unlabeled", c.n_unlabeled);
    c.n_test = j.value("n_test", c.n_test);
    c.n_validation = j.value("n_validation", c.n_validation);
    c.trials = j.value("trials", c.trials);
    c.variance = j.value("variance", c.variance);
    c.mean_separation = j.value("mean_separation", c.mean_separation);
    if (j.contains("lambda_grid"))
        c.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
    c.tau = j.value("tau", c.tau);
    if (j.contains("methods")) {
        c.methods.clear();
        for (const auto& m : j.at("methods"))
            c.methods.push_back(
                regularizer_from_string(m.get<std::string>()));
    }
    c.seed = j.value("seed", c.seed);
    c.restarts = j.value("restarts", c.restarts);
    if (j.contains("class_means")) {
        const auto& cm = j.at("class_means");
        c.class_means = {cm.at(0).get<Vec>(), cm.at(1).get<Vec>()};
    }
}

inline void to_json(json& j, const MethodResult& r) {
    j = {{"method", to_string(r.method)},
         {"mean_error", r.mean_error},
         {"std_error", r.std_error},
         {"trial_errors", r.trial_errors},
         {"selected_lambdas", r.selected_lambdas},
         {"failures", r.failures}};
}

inline void from_json(const json& j, MethodResult& r) {
    r.method = regularizer_from_string(j.at("method").get<std::string>());
    r.mean_error = j.at("mean_error").get<double>();
    r.std_error = j.at("std_error").get<double>();
    r.trial_errors = j.at("trial_errors").get<std::vector<double>>();
    r.selected_lambdas =
        j.at("selected_lambdas").get<std::vector<double>>();
    r.failures = j.value("failures", 0);
}

inline void to_json(json& j, const ExperimentReport& r) {
    j = {{"config", r.config},
         {"methods", r.methods},
         {"wall_seconds", r.wall_seconds}};
}

inline void from_json(const json& j, ExperimentReport& r) {
    r.config = j.at("config").get<ExperimentConfig>();
    r.methods = j.at("methods").get<std::vector<MethodResult>>();
    r.wall_seconds = j.value("wall_seconds", 0.0);
}

/// Write <prefix>.json and the flat <prefix>.csv
/// ("method,trial,lambda,error"); the CSV is byte-identical across reruns
/// with the same config.
inline void emit_report(const ExperimentReport& report,
                        const std::string& prefix) {
    try {
        {
            auto f = detail::open_out(prefix + ".json");
            f << json(report).dump(2) << "\n";
        }
        auto f = detail::open_out(prefix + ".csv");
        f << "method,trial,lambda,error\n";
        for (const auto& m : report.methods)
            for (std::size_t t = 0; t < m.trial_errors.size(); ++t)
                f << to_string(m.method) << "," << t << ","
                  << detail::fmt_double(m.selected_lambdas[t]) << ","
                  << detail::fmt_double(m.trial_errors[t]) << "\n";
    } catch (const std::exception& e) {
        throw std::runtime_error("emit_report: failed writing '" + prefix +
                                 ".{json,csv}': " + e.what());
    }
}

} // namespace inforeg
