#include "lprel/simulate.hpp"

#include <fstream>
#include <json.hpp>

#include "lprel/error.hpp"
#include "lprel/rng.hpp"

namespace lprel {

using nlohmann::json;

Eigen::Index FunnelConfig::total_n() const {
    return static_cast<Eigen::Index>(x_max - x_min + 1) * nulls_per_x +
           static_cast<Eigen::Index>(signal_locations.size()) * signals_per_location;
}

void FunnelConfig::validate() const {
    if (x_max < x_min) throw config_error("funnel: x_max < x_min");
    if (nulls_per_x < 1) throw config_error("funnel: nulls_per_x must be positive");
    if (signals_per_location < 0) throw config_error("funnel: negative signals_per_location");
    for (int x = x_min; x <= x_max; ++x) {
        if (sigma(x) <= 0.0)
            throw config_error("funnel: sigma(" + std::to_string(x) + ") = " +
                               std::to_string(sigma(x)) + " is not positive");
    }
    for (int loc : signal_locations) {
        if (loc < x_min || loc > x_max)
            throw config_error("funnel: signal location " + std::to_string(loc) + " off grid");
    }
}

FunnelConfig FunnelConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("funnel config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw data_error("funnel config: " + std::string(e.what()));
    }
    FunnelConfig c;
    if (j.contains("x_min")) c.x_min = j["x_min"].get<int>();
    if (j.contains("x_max")) c.x_max = j["x_max"].get<int>();
    if (j.contains("nulls_per_x")) c.nulls_per_x = j["nulls_per_x"].get<int>();
    if (j.contains("signal_locations"))
        c.signal_locations = j["signal_locations"].get<std::vector<int>>();
    if (j.contains("signals_per_location"))
        c.signals_per_location = j["signals_per_location"].get<int>();
    if (j.contains("signal_theta")) c.signal_theta = j["signal_theta"].get<double>();
    if (j.contains("sigma_slope")) c.sigma_slope = j["sigma_slope"].get<double>();
    if (j.contains("sigma_intercept")) c.sigma_intercept = j["sigma_intercept"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    return c;
}

std::string FunnelConfig::to_json() const {
    json j;
    j["x_min"] = x_min;
    j["x_max"] = x_max;
    j["nulls_per_x"] = nulls_per_x;
    j["signal_locations"] = signal_locations;
    j["signals_per_location"] = signals_per_location;
    j["signal_theta"] = signal_theta;
    j["sigma_slope"] = sigma_slope;
    j["sigma_intercept"] = sigma_intercept;
    j["seed"] = seed;
    return j.dump();
}

Dataset simulate_funnel(const FunnelConfig& config) {
    config.validate();
    const Eigen::Index n = config.total_n();
    Dataset out;
    out.x.resize(n, 1);
    out.z.resize(n);
    Eigen::VectorXd truth(n);

    RngStream rng(config.seed, "funnel");
    Eigen::Index row = 0;
    for (int x = config.x_min; x <= config.x_max; ++x) {
        const double sd = config.sigma(x);
        for (int k = 0; k < config.nulls_per_x; ++k, ++row) {
            out.x(row, 0) = x;
            truth[row] = 0.0;
            out.z[row] = rng.normal(0.0, sd);
        }
    }
    for (int loc : config.signal_locations) {
        const double sd = config.sigma(loc);
        for (int k = 0; k < config.signals_per_location; ++k, ++row) {
            out.x(row, 0) = loc;
            truth[row] = config.signal_theta;
            out.z[row] = rng.normal(config.signal_theta, sd);
        }
    }
    out.truth = std::move(truth);
    out.covariate_names = {"x"};
    out.validate();
    return out;
}

std::pair<Dataset, Dataset> replicate_pair(const FunnelConfig& config,
                                           std::uint64_t seed1, std::uint64_t seed2) {
    if (seed1 == seed2)
        throw config_error("replicate_pair: seeds must differ for independent replications");
    FunnelConfig c1 = config, c2 = config;
    c1.seed = seed1;
    c2.seed = seed2;
    return {simulate_funnel(c1), simulate_funnel(c2)};
}

}  // namespace lprel
