#ifndef LPREL_ENGINES_HPP
#define LPREL_ENGINES_HPP

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace lprel {

/// Normal null N(mu0, sigma0^2) with null proportion pi0, fitted to the
/// central bulk of a score sample.
struct EmpiricalNull {
    double mu0 = 0.0;
    double sigma0 = 1.0;
    double pi0 = 1.0;

    double pdf(double z) const;
    /// Two-sided tail p-value 2*(1 - Phi(|z - mu0| / sigma0)).
    double p_value(double z) const;
};

/// Smooth positive marginal density from histogram counts fitted by
/// Poisson regression on a polynomial basis of the bin centers.
struct LindseyDensity {
    Eigen::VectorXd grid;       // bin centers
    Eigen::VectorXd density;    // normalized to unit trapezoid integral
    Eigen::VectorXd log_density;
    int bins = 0;
    int degree = 0;

    /// Interpolates log-density linearly; extrapolates the boundary slope.
    double operator()(double z) const;
};

LindseyDensity lindsey_density(const Eigen::VectorXd& z, int bins = 120, int degree = 7);

EmpiricalNull fit_empirical_null(const Eigen::VectorXd& z);

struct LocfdrConfig {
    int bins = 120;
    int degree = 7;
    bool monotone_tails = false;
};

/// Local false discovery rate curve fdr(z) = min(1, pi0 f0(z) / f(z)).
struct FdrCurve {
    Eigen::VectorXd grid;
    Eigen::VectorXd fdr;
    Eigen::VectorXd f;    // marginal density values on grid
    Eigen::VectorXd f0;   // null density component values on grid
    EmpiricalNull null_fit;
    std::string engine = "locfdr";
    bool from_components = true;  // false for averaged/bagged curves

    LindseyDensity marginal;      // retained for exact evaluation

    double operator()(double z) const;
};

FdrCurve locfdr_curve(const Eigen::VectorXd& z, const LocfdrConfig& config = {});

/// Benjamini-Hochberg step-up at level alpha; returns the rejected indices
/// (ascending). Throws data_error for p-values outside [0,1].
std::vector<Eigen::Index> bh_procedure(const Eigen::VectorXd& p, double alpha);

/// Discrete nonparametric prior on a theta grid, fitted by EM to maximize
/// sum_i log sum_g w_g N(z_i; theta_g, sigma^2).
struct PriorEstimate {
    Eigen::VectorXd theta;      // grid
    Eigen::VectorXd weight;     // nonnegative, sums to 1
    double sigma = 1.0;
    std::vector<double> log_likelihood;  // per EM iteration
};

struct NpmleConfig {
    int grid_size = 200;
    double tol = 1e-8;
    int max_iter = 500;
    // Optional explicit grid span; NaN = derive from the sample as
    // [min z - sigma, max z + sigma].
    double grid_lo = std::numeric_limits<double>::quiet_NaN();
    double grid_hi = std::numeric_limits<double>::quiet_NaN();
};

PriorEstimate npmle_prior(const Eigen::VectorXd& z, double sigma,
                          const NpmleConfig& config = {});

/// Posterior over the prior's theta grid for one observation.
struct Posterior {
    Eigen::VectorXd theta;
    Eigen::VectorXd mass;       // sums to 1
    double mean = 0.0;
    double hpd_lo = 0.0;
    double hpd_hi = 0.0;
    double hpd_mass = 0.0;
    double level = 0.8;         // 1 - alpha
};

Posterior posterior(const PriorEstimate& prior, double z, double sigma, double alpha = 0.2);

/// Posterior built from explicit masses on a grid (used when averaging).
Posterior posterior_from_mass(Eigen::VectorXd theta, Eigen::VectorXd mass, double alpha);

/// A global inference engine fitted to one score sample: exposes the fdr
/// curve and relevant-null p-values so both the locfdr and BH selection
/// paths can run off the same fit.
struct FittedEngine {
    FdrCurve curve;
    std::string name;

    double fdr(double z) const { return curve(z); }
    double p_value(double z) const { return curve.null_fit.p_value(z); }
    const EmpiricalNull& null_fit() const { return curve.null_fit; }
};

using EngineFactory = std::function<FittedEngine(const Eigen::VectorXd&)>;

/// Registry mapping engine names to factories; "locfdr" and "bh" are
/// registered at startup (they share the locfdr fit and differ in how the
/// macro stage selects discoveries).
class EngineRegistry {
public:
    static EngineRegistry& instance();
    void register_engine(const std::string& name, EngineFactory factory);
    FittedEngine fit(const std::string& name, const Eigen::VectorXd& sample) const;
    bool contains(const std::string& name) const;

private:
    std::vector<std::pair<std::string, EngineFactory>> factories_;
};

}  // namespace lprel

#endif  // LPREL_ENGINES_HPP
