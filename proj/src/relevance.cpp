#include "lprel/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "lprel/error.hpp"
#include "lprel/numeric.hpp"
#include "lprel/rng.hpp"

namespace lprel {

namespace {

Eigen::Index count_distinct(const Eigen::VectorXd& v) {
    Eigen::VectorXd s = v;
    std::sort(s.data(), s.data() + s.size());
    Eigen::Index d = s.size() > 0 ? 1 : 0;
    for (Eigen::Index i = 1; i < s.size(); ++i)
        if (s[i] != s[i - 1]) ++d;
    return d;
}

// Subset OLS through the precomputed Gram matrix. Column 0 is the
// intercept. Returns false when the subsystem is numerically singular.
bool solve_subset(const Eigen::MatrixXd& gram, const Eigen::VectorXd& xty,
                  const std::vector<int>& cols, Eigen::VectorXd& beta, double& rss,
                  double yty) {
    const int s = static_cast<int>(cols.size());
    Eigen::MatrixXd g(s, s);
    Eigen::VectorXd c(s);
    for (int a = 0; a < s; ++a) {
        c[a] = xty[cols[a]];
        for (int b = 0; b < s; ++b) g(a, b) = gram(cols[a], cols[b]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
    if (ldlt.info() != Eigen::Success) return false;
    const double dmin = ldlt.vectorD().minCoeff();
    const double dmax = ldlt.vectorD().maxCoeff();
    if (!(dmin > 1e-10 * std::max(1.0, dmax))) return false;
    beta = ldlt.solve(c);
    rss = std::max(0.0, yty - c.dot(beta));
    return true;
}

double ic_penalty(Selector sel, double n) {
    return sel == Selector::aic ? 2.0 : std::log(n);
}

}  // namespace

RelevanceModel RelevanceModel::fit(const Dataset& data, const FitOptions& opts) {
    data.validate();
    if (opts.m < 1) throw data_error("fit_relevance: m must be >= 1");
    const Eigen::Index n = data.n();
    if (opts.fitter == Fitter::least_squares &&
        n <= static_cast<Eigen::Index>(opts.m) * opts.k + 1)
        throw data_error("fit_relevance: need N > m*k + 1 rows");

    RelevanceModel mod;
    mod.opts_ = opts;
    mod.z_basis_ = LpBasis::build(data.z, opts.m);
    const Eigen::MatrixXd& resp = mod.z_basis_.in_sample_values();

    // Per-covariate rank-polynomial bases; covariates with <= the discrete
    // cutoff of distinct levels get the full contrast space (levels - 1).
    for (Eigen::Index c = 0; c < data.p(); ++c) {
        const Eigen::Index distinct = count_distinct(data.x.col(c));
        if (distinct < 2) continue;  // constant column carries no information
        const int size = distinct <= opts.discrete_max_levels
                             ? static_cast<int>(distinct - 1)
                             : std::min<int>(opts.k, static_cast<int>(distinct - 1));
        mod.x_bases_.push_back(LpBasis::build(data.x.col(c), size));
        mod.x_cols_.push_back(static_cast<int>(c));
    }

    for (std::size_t b = 0; b < mod.x_bases_.size(); ++b)
        for (int f = 0; f < mod.x_bases_[b].size(); ++f)
            mod.terms_.push_back({static_cast<int>(b), f, -1, -1});
    if (opts.interactions) {
        for (std::size_t a = 0; a < mod.x_bases_.size(); ++a)
            for (std::size_t b = a + 1; b < mod.x_bases_.size(); ++b)
                mod.terms_.push_back({static_cast<int>(a), 0, static_cast<int>(b), 0});
    }

    const int q = static_cast<int>(mod.terms_.size());
    mod.beta_ = Eigen::MatrixXd::Zero(opts.m, q);
    mod.intercept_ = Eigen::VectorXd::Zero(opts.m);

    if (opts.fitter == Fitter::knn) {
        mod.train_u_.resize(n, static_cast<Eigen::Index>(mod.x_bases_.size()));
        for (std::size_t b = 0; b < mod.x_bases_.size(); ++b)
            mod.train_u_.col(static_cast<Eigen::Index>(b)) = mod.x_bases_[b].rank_probs();
        mod.train_resp_ = resp;
        mod.knn_k_ = opts.knn_k > 0
                         ? opts.knn_k
                         : std::max(2, static_cast<int>(std::lround(std::sqrt(double(n)))));
        mod.flat_ = false;
        return mod;
    }

    if (q == 0) {  // no usable covariate variation
        mod.flat_ = true;
        return mod;
    }
    if (n <= q + 1) throw data_error("fit_relevance: more design columns than rows");

    // Design with intercept in column 0.
    Eigen::MatrixXd design(n, q + 1);
    design.col(0).setOnes();
    for (int t = 0; t < q; ++t) {
        const XTerm& tm = mod.terms_[static_cast<std::size_t>(t)];
        Eigen::VectorXd col = mod.x_bases_[tm.cov_a].in_sample_values().col(tm.fn_a);
        if (tm.cov_b >= 0)
            col = col.cwiseProduct(mod.x_bases_[tm.cov_b].in_sample_values().col(tm.fn_b));
        design.col(t + 1) = col;
    }

    const Eigen::MatrixXd gram = design.transpose() * design;
    const double zero_cut = 2.0 / std::sqrt(static_cast<double>(n));

    for (int j = 0; j < opts.m; ++j) {
        const Eigen::VectorXd y = resp.col(j);
        const Eigen::VectorXd xty = design.transpose() * y;
        const double yty = y.squaredNorm();

        std::vector<int> chosen = {0};
        Eigen::VectorXd beta;
        double rss;
        if (!solve_subset(gram, xty, chosen, beta, rss, yty))
            throw numeric_error("fit_relevance: degenerate intercept fit");

        if (opts.selector == Selector::none) {
            chosen.resize(static_cast<std::size_t>(q) + 1);
            std::iota(chosen.begin(), chosen.end(), 0);
            if (!solve_subset(gram, xty, chosen, beta, rss, yty)) {
                // Identify a collinear culprit by growing the set column
                // by column.
                std::vector<int> ok = {0};
                for (int t = 1; t <= q; ++t) {
                    std::vector<int> trial = ok;
                    trial.push_back(t);
                    Eigen::VectorXd bb;
                    double rr;
                    if (solve_subset(gram, xty, trial, bb, rr, yty)) ok = trial;
                    else
                        throw numeric_error(
                            "fit_relevance: singular design, term " + std::to_string(t) +
                            " (covariate index " +
                            std::to_string(mod.terms_[static_cast<std::size_t>(t - 1)].cov_a) +
                            ") is collinear with earlier terms");
                }
            }
        } else {
            const double pen = ic_penalty(opts.selector, static_cast<double>(n));
            double best_ic =
                static_cast<double>(n) * std::log(std::max(rss, 1e-300) / static_cast<double>(n)) +
                pen * static_cast<double>(chosen.size());
            std::set<int> remaining;
            for (int t = 1; t <= q; ++t) remaining.insert(t);
            while (!remaining.empty()) {
                int best_t = -1;
                double best_t_ic = best_ic;
                Eigen::VectorXd best_beta;
                double best_rss = rss;
                for (int t : remaining) {
                    std::vector<int> trial = chosen;
                    trial.push_back(t);
                    Eigen::VectorXd bb;
                    double rr;
                    if (!solve_subset(gram, xty, trial, bb, rr, yty)) continue;
                    const double ic = static_cast<double>(n) *
                                          std::log(std::max(rr, 1e-300) / static_cast<double>(n)) +
                                      pen * static_cast<double>(trial.size());
                    if (ic < best_t_ic) {
                        best_t_ic = ic;
                        best_t = t;
                        best_beta = bb;
                        best_rss = rr;
                    }
                }
                if (best_t < 0) break;
                chosen.push_back(best_t);
                remaining.erase(best_t);
                beta = best_beta;
                rss = best_rss;
                best_ic = best_t_ic;
            }
        }

        for (std::size_t s = 0; s < chosen.size(); ++s) {
            const double b = beta[static_cast<Eigen::Index>(s)];
            const bool keep = opts.selector == Selector::none || std::abs(b) >= zero_cut;
            if (chosen[s] == 0) mod.intercept_[j] = keep ? b : 0.0;
            else if (keep) mod.beta_(j, chosen[s] - 1) = b;
        }
    }

    mod.flat_ = mod.beta_.isZero(0.0) && mod.intercept_.isZero(0.0);
    return mod;
}

RelevanceModel RelevanceModel::with_constant_coefficients(LpBasis z_basis,
                                                          Eigen::VectorXd lp,
                                                          double density_floor) {
    if (lp.size() != z_basis.size())
        throw data_error("with_constant_coefficients: coefficient count != basis size");
    RelevanceModel mod;
    mod.opts_.m = z_basis.size();
    mod.opts_.density_floor = density_floor;
    mod.z_basis_ = std::move(z_basis);
    mod.constant_ = true;
    mod.constant_lp_ = std::move(lp);
    mod.flat_ = mod.constant_lp_.isZero(0.0);
    return mod;
}

double RelevanceModel::term_value(const XTerm& t, const Eigen::VectorXd& x) const {
    double v = x_bases_[t.cov_a].evaluate(x[x_cols_[t.cov_a]])[t.fn_a];
    if (t.cov_b >= 0) v *= x_bases_[t.cov_b].evaluate(x[x_cols_[t.cov_b]])[t.fn_b];
    return v;
}

Eigen::VectorXd RelevanceModel::coefficients_at(const Eigen::VectorXd& x) const {
    if (constant_) return constant_lp_;
    const int m = opts_.m;
    if (flat_ || terms_.empty()) return Eigen::VectorXd::Zero(m);

    if (opts_.fitter == Fitter::knn) {
        // Average responses over the knn_k nearest rows in rank coordinates.
        Eigen::VectorXd xu(train_u_.cols());
        for (std::size_t b = 0; b < x_bases_.size(); ++b)
            xu[static_cast<Eigen::Index>(b)] = x_bases_[b].cdf(x[x_cols_[b]]);
        const Eigen::Index n = train_u_.rows();
        std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i)
            dist[static_cast<std::size_t>(i)] = {(train_u_.row(i).transpose() - xu).squaredNorm(), i};
        const int k = std::min<int>(knn_k_, static_cast<int>(n));
        std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
        Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
        for (int s = 0; s < k; ++s)
            out += train_resp_.row(dist[static_cast<std::size_t>(s)].second).transpose();
        return out / static_cast<double>(k);
    }

    Eigen::VectorXd out = intercept_;
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        bool used = false;
        for (int j = 0; j < m && !used; ++j) used = beta_(j, static_cast<Eigen::Index>(t)) != 0.0;
        if (!used) continue;
        const double v = term_value(terms_[t], x);
        out += beta_.col(static_cast<Eigen::Index>(t)) * v;
    }
    return out;
}

std::vector<XTerm> RelevanceModel::selected_terms(int j) const {
    std::vector<XTerm> out;
    if (constant_ || j < 1 || j > opts_.m) return out;
    for (std::size_t t = 0; t < terms_.size(); ++t)
        if (beta_(j - 1, static_cast<Eigen::Index>(t)) != 0.0) out.push_back(terms_[t]);
    return out;
}

double RelevanceModel::density_floored(const Eigen::VectorXd& lp, double u) const {
    const double v = 1.0 + lp.dot(z_basis_.evaluate_u(u));
    return std::max(v, opts_.density_floor);
}

Eigen::VectorXd relevance_density(const RelevanceModel& model,
                                  const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u_grid) {
    const Eigen::VectorXd lp = model.coefficients_at(x);
    Eigen::VectorXd d(u_grid.size());
    for (Eigen::Index i = 0; i < u_grid.size(); ++i)
        d[i] = model.density_floored(lp, u_grid[i]);
    const double integral = trapezoid(u_grid, d);
    if (!(integral > 0.0)) throw numeric_error("relevance_density: non-positive integral");
    return d / integral;
}

double cust(const RelevanceModel& model, const Eigen::VectorXd& x) {
    return model.coefficients_at(x).squaredNorm();
}

double rel(const RelevanceModel& model, const Eigen::VectorXd& x) {
    return 1.0 / (1.0 + cust(model, x));
}

double n_rel(const RelevanceModel& model, const Eigen::VectorXd& x, Eigen::Index n) {
    return static_cast<double>(n) * rel(model, x);
}

RelevanceBands bootstrap_relevance(const Dataset& data, const Eigen::VectorXd& x,
                                   int B, std::uint64_t seed,
                                   const FitOptions& opts, int grid_size) {
    if (B < 2) throw data_error("bootstrap_relevance: need B >= 2 replicates");
    const Eigen::Index n = data.n();

    RelevanceBands out;
    out.u_grid = linspace(0.5 / static_cast<double>(n), 1.0 - 0.5 / static_cast<double>(n),
                          grid_size);
    Eigen::MatrixXd curves(grid_size, B);
    int used = 0, skipped = 0;

    for (int b = 0; b < B; ++b) {
        RngStream rng(seed, "boot-rel", static_cast<std::uint64_t>(b));
        Dataset res;
        res.x.resize(n, data.p());
        res.z.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto idx = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::size_t>(n)));
            res.x.row(i) = data.x.row(idx);
            res.z[i] = data.z[idx];
        }
        res.covariate_names = data.covariate_names;
        try {
            const RelevanceModel m = RelevanceModel::fit(res, opts);
            curves.col(used) = relevance_density(m, x, out.u_grid);
            ++used;
        } catch (const data_error&) {
            ++skipped;  // degenerate resample (too few distinct values)
        }
    }
    if (used < 2) throw numeric_error("bootstrap_relevance: fewer than 2 usable replicates");

    const auto cview = curves.leftCols(used);
    out.mean = cview.rowwise().mean();
    out.sd.resize(grid_size);
    out.lo.resize(grid_size);
    out.hi.resize(grid_size);
    for (int g = 0; g < grid_size; ++g) {
        Eigen::VectorXd row = cview.row(g);
        out.sd[g] = sample_sd(row);
        std::sort(row.data(), row.data() + used);
        out.lo[g] = quantile_sorted(row, 0.025);
        out.hi[g] = quantile_sorted(row, 0.975);
    }
    out.replicates_used = used;
    out.replicates_skipped = skipped;
    return out;
}

}  // namespace lprel
