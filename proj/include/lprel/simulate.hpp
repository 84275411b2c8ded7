#ifndef LPREL_SIMULATE_HPP
#define LPREL_SIMULATE_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lprel/dataset.hpp"

namespace lprel {

/// Heteroscedastic benchmark generator: for each integer x on
/// [x_min, x_max] it draws `nulls_per_x` null scores z ~ N(0, sigma(x)^2)
/// with sigma(x) = x * sigma_slope + sigma_intercept, then appends
/// `signals_per_location` true signals with mean `signal_theta` at each
/// listed location.
struct FunnelConfig {
    int x_min = 30;
    int x_max = 100;
    int nulls_per_x = 50;
    std::vector<int> signal_locations = {30, 31, 32};
    int signals_per_location = 5;
    double signal_theta = 4.49;
    double sigma_slope = 1.0 / 21.0;
    double sigma_intercept = -0.71;
    std::uint64_t seed = 0;

    double sigma(double x) const { return x * sigma_slope + sigma_intercept; }
    Eigen::Index total_n() const;
    /// Throws config_error if sigma(x) <= 0 anywhere on the grid or the
    /// counts are inconsistent.
    void validate() const;

    static FunnelConfig from_json_file(const std::string& path);
    std::string to_json() const;
};

Dataset simulate_funnel(const FunnelConfig& config);

/// Two datasets from the identical model with independent streams;
/// seed1 != seed2 is required.
std::pair<Dataset, Dataset> replicate_pair(const FunnelConfig& config,
                                           std::uint64_t seed1, std::uint64_t seed2);

}  // namespace lprel

#endif  // LPREL_SIMULATE_HPP
