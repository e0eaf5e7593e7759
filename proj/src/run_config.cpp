#include "elute/run_config.hpp"

#include "elute/errors.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using nlohmann::json;

namespace elute {

std::string join_path(const std::string& base, const std::string& relative) {
    namespace fs = std::filesystem;
    fs::path p(relative);
    if (p.is_absolute() || base.empty()) {
        return relative;
    }
    return (fs::path(base) / p).string();
}

namespace {

Eigen::VectorXd json_vector(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError(where + ": expected non-empty array");
    }
    Eigen::VectorXd v(j.size());
    for (size_t i = 0; i < j.size(); ++i) {
        v[static_cast<long>(i)] = j[i].get<double>();
    }
    return v;
}

Eigen::MatrixXd json_matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError(where + ": expected matrix");
    }
    const long rows = static_cast<long>(j.size());
    const long cols = static_cast<long>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (long r = 0; r < rows; ++r) {
        if (static_cast<long>(j[r].size()) != cols) {
            throw ConfigError(where + ": ragged matrix");
        }
        for (long c = 0; c < cols; ++c) {
            m(r, c) = j[r][c].get<double>();
        }
    }
    return m;
}

TargetConfig parse_target(const json& j, const std::string& origin) {
    TargetConfig target;
    const std::string kind = j.value("kind", "");
    if (kind == "mechanistic") {
        target.kind = TargetConfig::Kind::mechanistic;
        if (!j.contains("model") || !j.contains("data")) {
            throw ConfigError(origin + ": target: mechanistic targets need model and data");
        }
        target.model_file = j["model"].get<std::string>();
        target.data_file = j["data"].get<std::string>();
        if (j.contains("noise")) {
            target.alpha0 = j["noise"].value("alpha0", 0.5);
            target.beta0 = j["noise"].value("beta0", 0.0);
        }
        if (!j.contains("parameters") || !j["parameters"].is_array()
            || j["parameters"].empty()) {
            throw ConfigError(origin + ": target.parameters: expected non-empty array");
        }
        for (const auto& jp : j["parameters"]) {
            ParameterSpec spec;
            spec.name = jp.value("name", "");
            spec.lower = jp.value("min", 0.0);
            spec.upper = jp.value("max", 0.0);
            const std::string transform = jp.value("transform", "log");
            if (transform == "log") {
                spec.transform = Transform::logarithmic;
            } else if (transform == "linear") {
                spec.transform = Transform::linear;
            } else {
                throw ConfigError(origin + ": parameter '" + spec.name
                                  + "': transform must be log or linear");
            }
            if (jp.contains("paths")) {
                for (const auto& p : jp["paths"]) {
                    spec.paths.push_back(p.get<std::string>());
                }
            } else if (jp.contains("path")) {
                spec.paths.push_back(jp["path"].get<std::string>());
            }
            spec.validate();
            target.parameters.push_back(std::move(spec));
        }
    } else if (kind == "mixture") {
        target.kind = TargetConfig::Kind::mixture;
        if (!j.contains("modes") || !j["modes"].is_array() || j["modes"].empty()) {
            throw ConfigError(origin + ": target.modes: expected non-empty array");
        }
        for (const auto& jm : j["modes"]) {
            GaussianMixtureTarget::Mode mode;
            mode.weight = jm.value("weight", 1.0);
            mode.mean = json_vector(jm.at("mean"), origin + ": mode.mean");
            mode.covariance = json_matrix(jm.at("cov"), origin + ": mode.cov");
            target.mixture.modes.push_back(std::move(mode));
        }
        if (!j.contains("box")) {
            throw ConfigError(origin + ": target.box: mixture targets need a start box");
        }
        target.mixture.box_lower = json_vector(j["box"].at("lower"), origin + ": box.lower");
        target.mixture.box_upper = json_vector(j["box"].at("upper"), origin + ": box.upper");
        if (j.contains("names")) {
            for (const auto& n : j["names"]) {
                target.mixture.names.push_back(n.get<std::string>());
            }
        }
    } else {
        throw ConfigError(origin + ": target.kind: expected mechanistic|mixture");
    }
    return target;
}

ClusterMethod parse_method(const std::string& name, const std::string& origin) {
    if (name == "kmeans") {
        return ClusterMethod::kmeans;
    }
    if (name == "kmedoids") {
        return ClusterMethod::kmedoids;
    }
    if (name == "kmedians") {
        return ClusterMethod::kmedians;
    }
    if (name == "hierarchical") {
        return ClusterMethod::hierarchical;
    }
    throw ConfigError(origin + ": diagnostics.method: unknown method '" + name + "'");
}

} // namespace

RunConfig parse_run_config(const std::string& text, const std::string& origin,
                           const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": JSON parse error: " + e.what());
    }
    RunConfig config;
    config.base_dir = base_dir;
    if (!j.contains("target")) {
        throw ConfigError(origin + ": target: missing block");
    }
    config.target = parse_target(j["target"], origin);

    if (j.contains("sampler")) {
        const json& js = j["sampler"];
        config.sampler.chains = js.value("chains", 6);
        config.sampler.iterations = js.value("iterations", 10000L);
        config.sampler.burn_in_fraction = js.value("burn_in", 0.25);
        config.sampler.delayed_rejection = js.value("delayed_rejection", true);
        config.sampler.dr_shrink = js.value("dr_shrink", 0.1);
        config.sampler.adapt_interval = js.value("adapt_interval", 100L);
        config.sampler.adapt_epsilon = js.value("adapt_epsilon", 1e-10);
        config.sampler.initial_step_fraction = js.value("initial_step_fraction", 0.1);
        config.sampler.master_seed = js.value("seed", 1ULL);
        config.sampler.online_poll_interval = js.value("online_poll_interval", 0L);
        if (js.contains("initial_points")) {
            for (const auto& pt : js["initial_points"]) {
                config.sampler.initial_points.push_back(
                    json_vector(pt, origin + ": sampler.initial_points"));
            }
        }
        if (config.sampler.chains < 1) {
            throw ConfigError(origin + ": sampler.chains: must be >= 1");
        }
        if (!(config.sampler.burn_in_fraction >= 0.0)
            || !(config.sampler.burn_in_fraction < 1.0)) {
            throw ConfigError(origin + ": sampler.burn_in: must lie in [0, 1)");
        }
        if (!(config.sampler.dr_shrink > 0.0) || !(config.sampler.dr_shrink < 1.0)) {
            throw ConfigError(origin + ": sampler.dr_shrink: must lie in (0, 1)");
        }
    }

    if (j.contains("diagnostics")) {
        const json& jd = j["diagnostics"];
        config.diagnostics.global_threshold = jd.value("global_threshold", 1.20);
        config.diagnostics.cluster_threshold = jd.value("cluster_threshold", 1.10);
        config.diagnostics.feature_points = jd.value("feature_points", 64);
        config.diagnostics.k_max = jd.value("k_max", 0);
        config.diagnostics.force_k = jd.value("force_k", 0);
        config.diagnostics.restarts = jd.value("restarts", 10);
        config.diagnostics.seed = jd.value("seed", 12345ULL);
        config.diagnostics.method = parse_method(jd.value("method", "kmeans"), origin);
    }

    if (j.contains("synthesize")) {
        const json& jy = j["synthesize"];
        config.synthesize.sigma2 = jy.value("sigma2", 0.0);
        config.synthesize.seed = jy.value("seed", 1ULL);
        config.synthesize.output = jy.value("output", "observations.csv");
        if (config.synthesize.sigma2 < 0.0) {
            throw ConfigError(origin + ": synthesize.sigma2: must be non-negative");
        }
    }

    config.output_dir = j.value("output", "run");
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open run config: " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path,
                            std::filesystem::path(path).parent_path().string());
}

ColumnSystem load_target_model(const RunConfig& config) {
    if (config.target.kind != TargetConfig::Kind::mechanistic) {
        throw ConfigError("this command needs a mechanistic target with a model file");
    }
    return load_model_file(join_path(config.base_dir, config.target.model_file));
}

std::unique_ptr<TargetDensity> build_target(const RunConfig& config) {
    if (config.target.kind == TargetConfig::Kind::mixture) {
        return std::make_unique<GaussianMixtureTarget>(
            config.target.mixture.modes, config.target.mixture.box_lower,
            config.target.mixture.box_upper, config.target.mixture.names);
    }
    ColumnSystem model = load_target_model(config);
    Observations obs = load_observations(join_path(config.base_dir, config.target.data_file),
                                         model.n_components);
    return std::make_unique<MechanisticTarget>(std::move(model), config.target.parameters,
                                               std::move(obs), config.target.alpha0,
                                               config.target.beta0);
}

} // namespace elute
