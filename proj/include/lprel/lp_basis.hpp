#ifndef LPREL_LP_BASIS_HPP
#define LPREL_LP_BASIS_HPP

#include <Eigen/Dense>

namespace lprel {

/// Rank probabilities F~(z_i) = midrank(z_i) / N, in input order.
Eigen::VectorXd empirical_cdf(const Eigen::VectorXd& z);

/// Orthonormal rank-polynomial system T~_1..T~_m for a score sample.
///
/// T~_j is a degree-j polynomial in the standardized rank variable
/// u~ = (F~(z) - mean) / sd, built by modified Gram-Schmidt (with one
/// reorthogonalization pass) against the empirical measure, so that
/// (1/N) sum_i T~_j(z_i) = 0 and (1/N) sum_i T~_j(z_i) T~_k(z_i) = delta_jk.
class LpBasis {
public:
    /// Requires m >= 1 and more than m distinct values in z.
    static LpBasis build(const Eigen::VectorXd& z, int m);

    int size() const { return m_; }
    Eigen::Index sample_size() const { return n_; }

    /// In-sample values, N x m; row i is (T~_1(z_i), ..., T~_m(z_i)).
    const Eigen::MatrixXd& in_sample_values() const { return values_; }

    /// Rank probabilities of the build sample, in input order.
    const Eigen::VectorXd& rank_probs() const { return u_; }

    /// Midrank-consistent empirical cdf at an arbitrary score,
    /// clamped to [1/(2N), 1 - 1/(2N)].
    double cdf(double z_new) const;

    /// (T~_1(z_new), ..., T~_m(z_new)) through the clamped empirical cdf.
    Eigen::VectorXd evaluate(double z_new) const;

    /// Basis values at a point on the rank-probability scale; u is clamped
    /// to [1/(2N), 1 - 1/(2N)] before polynomial evaluation.
    Eigen::VectorXd evaluate_u(double u) const;

    /// Polynomial coefficients of T~_j (row j-1) in powers of the
    /// standardized rank variable; column d is the coefficient of u~^d.
    const Eigen::MatrixXd& coefficients() const { return coef_; }

    double rank_mean() const { return mean_u_; }
    double rank_sd() const { return sd_u_; }

private:
    int m_ = 0;
    Eigen::Index n_ = 0;
    Eigen::VectorXd sorted_z_;
    Eigen::VectorXd u_;        // rank probs, input order
    Eigen::MatrixXd values_;   // N x m
    Eigen::MatrixXd coef_;     // m x (m+1)
    double mean_u_ = 0.0;
    double sd_u_ = 1.0;
};

}  // namespace lprel

#endif  // LPREL_LP_BASIS_HPP
