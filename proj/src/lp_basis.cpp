#include "lprel/lp_basis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "lprel/error.hpp"

namespace lprel {

Eigen::VectorXd empirical_cdf(const Eigen::VectorXd& z) {
    const Eigen::Index n = z.size();
    if (n == 0) throw data_error("empirical_cdf: empty sample");
    if (!z.allFinite()) throw data_error("empirical_cdf: non-finite entry");

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return z[a] < z[b]; });

    Eigen::VectorXd u(n);
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        while (j + 1 < n && z[order[j + 1]] == z[order[i]]) ++j;
        // midrank of the tie group spanning sorted positions [i, j]
        const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (Eigen::Index k = i; k <= j; ++k) u[order[k]] = midrank / static_cast<double>(n);
        i = j + 1;
    }
    return u;
}

LpBasis LpBasis::build(const Eigen::VectorXd& z, int m) {
    if (m < 1) throw data_error("lp_basis: m must be >= 1");
    const Eigen::Index n = z.size();
    if (n < 1) throw data_error("lp_basis: empty sample");

    LpBasis b;
    b.m_ = m;
    b.n_ = n;
    b.sorted_z_ = z;
    std::sort(b.sorted_z_.data(), b.sorted_z_.data() + n);

    Eigen::Index distinct = 1;
    for (Eigen::Index i = 1; i < n; ++i)
        if (b.sorted_z_[i] != b.sorted_z_[i - 1]) ++distinct;
    if (distinct <= m)
        throw data_error("lp_basis: need more than m=" + std::to_string(m) +
                         " distinct values, got " + std::to_string(distinct));

    b.u_ = empirical_cdf(z);
    b.mean_u_ = b.u_.mean();
    b.sd_u_ = std::sqrt((b.u_.array() - b.mean_u_).square().mean());
    const Eigen::VectorXd ustd = (b.u_.array() - b.mean_u_) / b.sd_u_;

    // Powers u~^1..u~^m, then Gram-Schmidt under <a,b> = (1/N) sum a_i b_i.
    // Coefficient rows are carried through the same operations so each
    // T~_j stays available as an explicit degree-j polynomial.
    Eigen::MatrixXd pow(n, m);
    pow.col(0) = ustd;
    for (int j = 1; j < m; ++j) pow.col(j) = pow.col(j - 1).cwiseProduct(ustd);

    b.values_.resize(n, m);
    b.coef_ = Eigen::MatrixXd::Zero(m, m + 1);
    const double inv_n = 1.0 / static_cast<double>(n);

    for (int j = 0; j < m; ++j) {
        Eigen::VectorXd w = pow.col(j);
        Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(m + 1);
        c[j + 1] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            const double mu = w.mean();
            w.array() -= mu;
            c[0] -= mu;
            for (int k = 0; k < j; ++k) {
                const double dot = inv_n * w.dot(b.values_.col(k));
                w -= dot * b.values_.col(k);
                c -= dot * b.coef_.row(k);
            }
        }
        const double norm = std::sqrt(inv_n * w.squaredNorm());
        if (!(norm > 1e-12))
            throw data_error("lp_basis: rank deficiency at degree " + std::to_string(j + 1));
        b.values_.col(j) = w / norm;
        b.coef_.row(j) = c / norm;
    }
    return b;
}

double LpBasis::cdf(double z_new) const {
    const double* lo = sorted_z_.data();
    const double* hi = lo + n_;
    const auto below = static_cast<double>(std::lower_bound(lo, hi, z_new) - lo);
    const auto leq = static_cast<double>(std::upper_bound(lo, hi, z_new) - lo);
    // midrank convention for ties; reduces to (#points <= z)/N otherwise
    const double count = (leq > below) ? below + 0.5 * (leq - below + 1.0) : leq;
    const double n = static_cast<double>(n_);
    return std::clamp(count / n, 0.5 / n, 1.0 - 0.5 / n);
}

Eigen::VectorXd LpBasis::evaluate(double z_new) const {
    return evaluate_u(cdf(z_new));
}

Eigen::VectorXd LpBasis::evaluate_u(double u) const {
    const double n = static_cast<double>(n_);
    u = std::clamp(u, 0.5 / n, 1.0 - 0.5 / n);
    const double ustd = (u - mean_u_) / sd_u_;
    Eigen::VectorXd out(m_);
    for (int j = 0; j < m_; ++j) {
        double acc = coef_(j, m_);
        for (int d = m_ - 1; d >= 0; --d) acc = acc * ustd + coef_(j, d);
        out[j] = acc;
    }
    return out;
}

}  // namespace lprel
