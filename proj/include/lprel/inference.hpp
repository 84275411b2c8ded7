#ifndef LPREL_INFERENCE_HPP
#define LPREL_INFERENCE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "lprel/dataset.hpp"
#include "lprel/engines.hpp"
#include "lprel/laser.hpp"
#include "lprel/relevance.hpp"

namespace lprel {

enum class AdjustMethod { none, ols, smoother };

/// Fitted conditional-mean E[z|x] and the flattened residuals
/// y_i = z_i - E[z|x_i].
struct RegressionAdjustment {
    AdjustMethod method = AdjustMethod::ols;
    Eigen::VectorXd coef;        // (alpha, beta_1..beta_p) when ols
    Eigen::VectorXd residuals;
    Eigen::MatrixXd train_x;     // smoother state
    Eigen::VectorXd train_z;
    double bandwidth = 0.0;

    double predict(const Eigen::VectorXd& x) const;
};

RegressionAdjustment regression_adjust(const Dataset& data,
                                       AdjustMethod method = AdjustMethod::ols);

/// Copy of `data` with z replaced by the adjusted residuals.
Dataset flattened(const Dataset& data, const RegressionAdjustment& adj);

struct CustomizedFdrOptions {
    std::string engine = "locfdr";
    FitOptions fit;
    LocfdrConfig locfdr;
    int bags = 1;
    AdjustMethod adjust = AdjustMethod::none;
};

/// Algorithm: fit the relevance model (optionally on flattened scores),
/// draw LASER(N; x0), run the global engine on the lasers, and map the
/// curve back to the z domain. bags > 1 averages curves over independent
/// LASER bags. A flat relevance model reproduces the global engine output.
FdrCurve customized_fdr(const Dataset& data, const Eigen::VectorXd& x0,
                        std::uint64_t seed, const CustomizedFdrOptions& opts = {});

/// The three bracket factors of the conditional-fdr decomposition
///   fdr(z|x) = fdr(z) * [pi0(x)/pi0 * f0(z|x)/f0(z) * 1/d_x(F(z))]
/// together with their product with the global fdr.
struct FdrFactors {
    double pi_ratio = 1.0;
    double null_ratio = 1.0;
    double inv_d = 1.0;
    double product = 0.0;     // fdr(z) * pi_ratio * null_ratio * inv_d
    bool floored = false;     // d hit the density floor at this z
};

/// Pure arithmetic core (no estimation); useful with analytic components.
FdrFactors fdr_factors(double fdr_z, double pi0_x, double pi0, double f0_zx,
                       double f0_z, double d_value, double floor_value);

enum class NullMethod { laser_locfdr, quantile };

/// x-specific null N(mu0(x), sigma0(x)^2) with local null proportion.
struct RelevantNull {
    Eigen::VectorXd x0;
    double mu0 = 0.0;
    double sigma0 = 1.0;
    double pi0 = 1.0;
    NullMethod method = NullMethod::laser_locfdr;
};

/// Estimates the relevant null at x0. laser_locfdr fits the empirical
/// null to LASER(N; x0); quantile uses the conditional quantiles implied
/// by the relevance cdf (pi0 then comes from the global fit).
RelevantNull relevant_null(const Dataset& data, const RelevanceModel& model,
                           const Eigen::VectorXd& x0, NullMethod method, RngStream rng);

FdrFactors fdr_factorization(const FdrCurve& global_fdr, const RelevantNull& rnull,
                             const EmpiricalNull& global_null, const RelevanceModel& model,
                             const Eigen::VectorXd& x0, double z);

/// Conditional quantile Q(u|x) obtained by inverting the relevance cdf
/// D_x (cumulative trapezoid of the normalized density) and applying the
/// sample quantile of z.
double conditional_quantile(const RelevanceModel& model, const Dataset& data,
                            double u, const Eigen::VectorXd& x0);

/// Discovery propensity scores -log10(fdr), with fdr floored at 1e-12.
Eigen::VectorXd dps_scores(const Eigen::VectorXd& fdr);

struct MacroOptions {
    std::string engine = "locfdr";   // locfdr | bh (selection rule)
    double alpha = 0.05;
    bool customize = true;           // false = plain global engine
    AdjustMethod adjust = AdjustMethod::none;
    FitOptions fit;
    LocfdrConfig locfdr;
};

struct CaseResult {
    Eigen::Index id = 0;
    double z = 0.0;
    double fdr = 1.0;
    double dps = 0.0;
    bool significant = false;
};

struct InferenceReport {
    std::vector<CaseResult> cases;   // input row order
    double threshold = 0.0;
    std::string engine;
    std::uint64_t seed = 0;
    Eigen::Index rejections = 0;
    int false_discoveries = -1;      // -1 when truth unknown
    int missed = -1;
    int group_count = 0;
};

/// Full-scale search: groups cases by unique covariate profile, runs the
/// engine per group on cached LASERs (or once globally), ranks cases by
/// DPS, and applies the threshold rule (locfdr cutoff min(0.2, 2*alpha);
/// BH at level alpha).
InferenceReport macro_inference(const Dataset& data, std::uint64_t seed,
                                const MacroOptions& opts = {});

struct RebOptions {
    int bags = 10;
    double alpha = 0.2;
    AdjustMethod adjust = AdjustMethod::ols;  // none disables flattening
    bool use_relevance = true;                // false = global EB
    double sigma = std::numeric_limits<double>::quiet_NaN();  // NaN: IQR/1.3489
    FitOptions fit;
    NpmleConfig npmle;
};

struct RebResult {
    PriorEstimate prior;      // averaged over bags, y domain
    Posterior post;           // averaged posterior, y domain
    double y0 = 0.0;
    double shift = 0.0;       // E[z|x0]
    double sigma = 0.0;       // likelihood sd (mean over bags)
    double mean_z = 0.0;      // post.mean + shift
    double hpd_lo_z = 0.0;
    double hpd_hi_z = 0.0;
    bool flat = false;
};

/// Relevance-integrated empirical Bayes for one case: flatten, draw
/// LASER bags at x0, estimate the prior on each bag, average prior and
/// posterior, and report both domains.
RebResult reb_inference(const Dataset& data, const Eigen::VectorXd& x0, double z0,
                        std::uint64_t seed, const RebOptions& opts = {});

struct FiniteBayesResult {
    Posterior averaged;       // mean of the bootstrap posteriors
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double sigma = 0.0;
    int cycles_failed = 0;
};

/// Parametric-bootstrap average of re-estimated posteriors: simulate
/// theta from the laser prior, regenerate scores, re-fit prior and
/// posterior, repeat B times, and average. Fails if more than 10% of
/// cycles fail. `data` is in the (possibly flattened) y domain, as is y0.
FiniteBayesResult finite_bayes_ci(const Dataset& data, const Eigen::VectorXd& x0,
                                  double y0, int B, double alpha, std::uint64_t seed,
                                  const RebOptions& opts = {});

struct ReproducibilityReport {
    InferenceReport first;
    InferenceReport second;
    std::vector<Eigen::Index> common;  // discovered in both runs
    int common_true = -1;
    int common_false = -1;
};

/// Runs macro_inference on two replications sharing a covariate design
/// and reports the discovery overlap.
ReproducibilityReport reproducibility_report(const Dataset& data1, const Dataset& data2,
                                             std::uint64_t seed, const MacroOptions& opts = {});

}  // namespace lprel

#endif  // LPREL_INFERENCE_HPP
