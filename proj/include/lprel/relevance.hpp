#ifndef LPREL_RELEVANCE_HPP
#define LPREL_RELEVANCE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "lprel/dataset.hpp"
#include "lprel/lp_basis.hpp"

namespace lprel {

enum class Selector { none, aic, bic };
enum class Fitter { least_squares, knn };

struct FitOptions {
    int m = 6;                     // rank-polynomial functions of z
    int k = 6;                     // per-covariate basis size (continuous)
    Selector selector = Selector::bic;
    Fitter fitter = Fitter::least_squares;
    int knn_k = 0;                 // 0 = round(sqrt(N))
    bool interactions = true;      // pairwise degree-1 products when p >= 2
    int discrete_max_levels = 12;  // <= this many distinct values: contrast basis
    double density_floor = 1e-4;
};

/// One column of the covariate design: a basis function of one covariate,
/// or a product of two degree-1 functions.
struct XTerm {
    int cov_a = 0;
    int fn_a = 0;     // 0-based index into the covariate's basis
    int cov_b = -1;   // >= 0 for interaction terms
    int fn_b = -1;
};

/// Relevance model: fitted coefficient functions x -> LP_{j|x} for
/// j = 1..m, giving the local-to-global density ratio on the rank scale
///   d_x(u) = 1 + sum_j LP_{j|x} T~_j(u).
///
/// The least-squares fitter regresses each T~_j(z_i) on rank-polynomial
/// bases of the covariates (so fits depend on x only through its ranks);
/// the knn fitter averages T~_j(z_i) over nearest neighbors in rank
/// coordinates.
class RelevanceModel {
public:
    static RelevanceModel fit(const Dataset& data, const FitOptions& opts = {});

    /// Model with coefficients that do not vary with x; handy for fixed
    /// coefficient vectors taken from an external analysis.
    static RelevanceModel with_constant_coefficients(LpBasis z_basis,
                                                     Eigen::VectorXd lp,
                                                     double density_floor = 1e-4);

    const LpBasis& z_basis() const { return z_basis_; }
    int m() const { return z_basis_.size(); }
    const FitOptions& options() const { return opts_; }

    /// (LP_{1|x}, ..., LP_{m|x}) at a covariate profile.
    Eigen::VectorXd coefficients_at(const Eigen::VectorXd& x) const;

    /// True when selection kept no term anywhere, i.e. d_x(u) = 1 for
    /// every x. The knn fitter never reports flat.
    bool flat() const { return flat_; }

    double density_floor() const { return opts_.density_floor; }

    /// Floored (but not renormalized) series value at one rank point.
    double density_floored(const Eigen::VectorXd& lp, double u) const;

    /// Terms that survived selection for response j (1-based j).
    std::vector<XTerm> selected_terms(int j) const;

private:
    LpBasis z_basis_;
    FitOptions opts_;
    bool constant_ = false;
    Eigen::VectorXd constant_lp_;

    std::vector<LpBasis> x_bases_;        // one per usable covariate
    std::vector<int> x_cols_;             // dataset column of each basis
    std::vector<XTerm> terms_;
    Eigen::MatrixXd beta_;                // m x terms (zero = dropped)
    Eigen::VectorXd intercept_;           // m
    bool flat_ = false;

    // knn state
    Eigen::MatrixXd train_u_;             // N x p rank coordinates
    Eigen::MatrixXd train_resp_;          // N x m
    int knn_k_ = 0;

    double term_value(const XTerm& t, const Eigen::VectorXd& x) const;
};

/// d_x on a rank-probability grid: series evaluation, floored at the
/// model's density floor, then renormalized to unit trapezoid integral
/// over the grid.
Eigen::VectorXd relevance_density(const RelevanceModel& model,
                                  const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u_grid);

/// Squared L2 deviation of d_x from uniformity: sum_j LP_{j|x}^2.
double cust(const RelevanceModel& model, const Eigen::VectorXd& x);

/// Relevance dampening factor 1 / (1 + CUST(x)).
double rel(const RelevanceModel& model, const Eigen::VectorXd& x);

/// Effective relevant sample size N * rel(x).
double n_rel(const RelevanceModel& model, const Eigen::VectorXd& x, Eigen::Index n);

struct RelevanceBands {
    Eigen::VectorXd u_grid;
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;
    Eigen::VectorXd lo;   // 2.5th percentile
    Eigen::VectorXd hi;   // 97.5th percentile
    int replicates_used = 0;
    int replicates_skipped = 0;
};

/// Nonparametric bootstrap of the fitted relevance function at x:
/// B resamples with replacement, refit, pointwise sd and percentile
/// bands on a rank grid. Degenerate resamples are skipped and counted.
RelevanceBands bootstrap_relevance(const Dataset& data, const Eigen::VectorXd& x,
                                   int B, std::uint64_t seed,
                                   const FitOptions& opts = {}, int grid_size = 101);

}  // namespace lprel

#endif  // LPREL_RELEVANCE_HPP
