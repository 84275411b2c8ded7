#ifndef LPREL_LASER_HPP
#define LPREL_LASER_HPP

#include <Eigen/Dense>
#include <cstdint>

#include "lprel/dataset.hpp"
#include "lprel/relevance.hpp"
#include "lprel/rng.hpp"

namespace lprel {

/// Artificial relevant sample targeted at one covariate profile. Every
/// entry of `samples` is an element of the source z multiset; when the
/// relevance model is flat the samples are the source data verbatim.
struct LaserSample {
    Eigen::VectorXd x0;
    Eigen::VectorXd samples;
    std::uint64_t proposals = 0;
    double acceptance_rate = 1.0;
    std::uint64_t seed = 0;
    bool flat = false;
};

/// Maximum of the floored relevance series d_x0 over 1001 equispaced rank
/// points on [1/(2N), 1-1/(2N)] joined with the observed ranks.
double max_relevance(const RelevanceModel& model, const Eigen::VectorXd& x0);

/// Accept-reject sampler through the fitted relevance function: proposals
/// are drawn uniformly from the source scores and accepted with
/// probability d_x0(F~(z')) / max_u d_x0(u). A flat model short-circuits
/// and returns the source scores unchanged. Throws numeric_error if the
/// acceptance rate collapses below 1e-4 within the 1e7 proposal budget.
LaserSample generate_laser(const Dataset& data, const RelevanceModel& model,
                           const Eigen::VectorXd& x0, Eigen::Index n_out,
                           RngStream rng);

}  // namespace lprel

#endif  // LPREL_LASER_HPP
