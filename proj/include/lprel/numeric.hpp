#ifndef LPREL_NUMERIC_HPP
#define LPREL_NUMERIC_HPP

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace lprel {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

double normal_pdf(double x, double mu = 0.0, double sigma = 1.0);
double normal_cdf(double x, double mu = 0.0, double sigma = 1.0);

/// Inverse of the standard normal cdf (Wichura's PPND16 rational
/// approximation, accurate to ~1e-15). Pure arithmetic, so results are
/// identical on every platform.
double normal_quantile(double p);

/// Two-sided normal tail probability 2*(1 - Phi(|t|)), stable in the tails.
double two_sided_p(double t);

/// Linear-interpolation sample quantile (R type 7). `sorted` must be
/// ascending and non-empty; p in [0,1].
double quantile_sorted(const Eigen::VectorXd& sorted, double p);

/// Quantile of an unsorted sample (copies and sorts).
double quantile(const Eigen::VectorXd& v, double p);

double interquartile_range(const Eigen::VectorXd& v);

double sample_sd(const Eigen::VectorXd& v);

double trapezoid(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Cumulative trapezoid integral; result[0] = 0.
Eigen::VectorXd cumtrapz(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

Eigen::VectorXd linspace(double lo, double hi, int n);

double log_sum_exp(const Eigen::VectorXd& v);

/// Piecewise-linear interpolation of (x, y) at xq; x strictly increasing.
/// Outside the range the boundary segment is extended linearly.
double interp_linear(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double xq);

/// Downhill simplex minimizer for small smooth problems.
/// Returns the best point found; `fn` is evaluated on candidate points.
Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& fn,
                            const Eigen::VectorXd& start,
                            const Eigen::VectorXd& step,
                            int max_iter = 500, double tol = 1e-12);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

}  // namespace lprel

#endif  // LPREL_NUMERIC_HPP
