#include "lprel/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "lprel/error.hpp"
#include "lprel/numeric.hpp"
#include "lprel/parallel.hpp"

namespace lprel {

namespace {
constexpr double kFdrFloor = 1e-12;

double locfdr_threshold(double alpha) { return std::min(0.2, 2.0 * alpha); }
}  // namespace

double RegressionAdjustment::predict(const Eigen::VectorXd& x) const {
    if (method == AdjustMethod::ols) {
        double v = coef[0];
        for (Eigen::Index c = 0; c < x.size(); ++c) v += coef[c + 1] * x[c];
        return v;
    }
    if (method == AdjustMethod::smoother) {
        if (bandwidth <= 0.0) return coef[0];  // constant-x fallback: global mean
        double num = 0.0, den = 0.0;
        for (Eigen::Index i = 0; i < train_x.rows(); ++i) {
            const double t = (train_x(i, 0) - x[0]) / bandwidth;
            const double w = std::exp(-0.5 * t * t);
            num += w * train_z[i];
            den += w;
        }
        return den > 0.0 ? num / den : coef[0];
    }
    return 0.0;
}

RegressionAdjustment regression_adjust(const Dataset& data, AdjustMethod method) {
    data.validate();
    if (data.n() < 3) throw data_error("regression_adjust: need N >= 3");

    RegressionAdjustment adj;
    adj.method = method;
    const Eigen::Index n = data.n();

    if (method == AdjustMethod::none) {
        adj.coef = Eigen::VectorXd::Zero(data.p() + 1);
        adj.residuals = data.z;
        return adj;
    }

    if (method == AdjustMethod::smoother && data.p() == 1) {
        adj.train_x = data.x;
        adj.train_z = data.z;
        adj.coef = Eigen::VectorXd::Constant(1, data.z.mean());
        const double sd = sample_sd(data.x.col(0));
        // Silverman-style width on the covariate scale
        adj.bandwidth = sd > 0.0 ? 1.06 * sd * std::pow(static_cast<double>(n), -0.2) : 0.0;
        adj.residuals.resize(n);
        for (Eigen::Index i = 0; i < n; ++i)
            adj.residuals[i] = data.z[i] - adj.predict(data.x.row(i).transpose());
        return adj;
    }

    // Least squares of z on (1, x); also the p > 1 smoother fallback.
    adj.method = AdjustMethod::ols;
    Eigen::MatrixXd design(n, data.p() + 1);
    design.col(0).setOnes();
    design.rightCols(data.p()) = data.x;
    adj.coef = design.colPivHouseholderQr().solve(data.z);
    adj.residuals = data.z - design * adj.coef;
    return adj;
}

Dataset flattened(const Dataset& data, const RegressionAdjustment& adj) {
    Dataset out = data;
    out.z = adj.residuals;
    return out;
}

FdrFactors fdr_factors(double fdr_z, double pi0_x, double pi0, double f0_zx,
                       double f0_z, double d_value, double floor_value) {
    FdrFactors out;
    out.pi_ratio = pi0_x / pi0;
    out.null_ratio = f0_zx / f0_z;
    out.floored = d_value <= floor_value;
    out.inv_d = 1.0 / std::max(d_value, floor_value);
    out.product = fdr_z * out.pi_ratio * out.null_ratio * out.inv_d;
    return out;
}

RelevantNull relevant_null(const Dataset& data, const RelevanceModel& model,
                           const Eigen::VectorXd& x0, NullMethod method, RngStream rng) {
    RelevantNull out;
    out.x0 = x0;
    out.method = method;
    if (method == NullMethod::laser_locfdr) {
        const LaserSample laser = generate_laser(data, model, x0, data.n(), std::move(rng));
        const EmpiricalNull en = fit_empirical_null(laser.samples);
        out.mu0 = en.mu0;
        out.sigma0 = en.sigma0;
        out.pi0 = en.pi0;
    } else {
        out.mu0 = conditional_quantile(model, data, 0.5, x0);
        out.sigma0 = (conditional_quantile(model, data, 0.75, x0) -
                      conditional_quantile(model, data, 0.25, x0)) / 1.349;
        out.pi0 = fit_empirical_null(data.z).pi0;  // quantile route keeps the global pi0
    }
    if (!(out.sigma0 > 0.0)) throw numeric_error("relevant_null: non-positive sigma0");
    return out;
}

FdrFactors fdr_factorization(const FdrCurve& global_fdr, const RelevantNull& rnull,
                             const EmpiricalNull& global_null, const RelevanceModel& model,
                             const Eigen::VectorXd& x0, double z) {
    const Eigen::VectorXd lp = model.coefficients_at(x0);
    const double u = model.z_basis().cdf(z);
    const double d_raw = 1.0 + lp.dot(model.z_basis().evaluate_u(u));
    return fdr_factors(global_fdr(z), rnull.pi0, global_null.pi0,
                       normal_pdf(z, rnull.mu0, rnull.sigma0), global_null.pdf(z), d_raw,
                       model.density_floor());
}

double conditional_quantile(const RelevanceModel& model, const Dataset& data,
                            double u, const Eigen::VectorXd& x0) {
    if (!(u > 0.0 && u < 1.0)) throw data_error("conditional_quantile: u outside (0,1)");
    const int grid_n = 2001;
    const Eigen::VectorXd grid = linspace(0.0, 1.0, grid_n);
    const Eigen::VectorXd d = relevance_density(model, x0, grid);
    Eigen::VectorXd cdf = cumtrapz(grid, d);
    cdf /= cdf[grid_n - 1];

    // strictly increasing since d >= floor > 0
    const auto it = std::lower_bound(cdf.data(), cdf.data() + grid_n, u);
    Eigen::Index hi = std::clamp<Eigen::Index>(it - cdf.data(), 1, grid_n - 1);
    const double span = cdf[hi] - cdf[hi - 1];
    const double frac = span > 0.0 ? (u - cdf[hi - 1]) / span : 0.5;
    const double v = std::clamp(grid[hi - 1] + frac * (grid[hi] - grid[hi - 1]), 0.0, 1.0);

    Eigen::VectorXd s = data.z;
    std::sort(s.data(), s.data() + s.size());
    return quantile_sorted(s, v);
}

Eigen::VectorXd dps_scores(const Eigen::VectorXd& fdr) {
    Eigen::VectorXd out(fdr.size());
    for (Eigen::Index i = 0; i < fdr.size(); ++i) {
        if (!(fdr[i] >= 0.0 && fdr[i] <= 1.0))
            throw data_error("dps_scores: fdr value outside [0,1]");
        out[i] = -std::log10(std::max(fdr[i], kFdrFloor));
    }
    return out;
}

FdrCurve customized_fdr(const Dataset& data, const Eigen::VectorXd& x0,
                        std::uint64_t seed, const CustomizedFdrOptions& opts) {
    data.validate();
    if (!EngineRegistry::instance().contains(opts.engine))
        throw data_error("customized_fdr: engine '" + opts.engine + "' is not registered");

    double shift = 0.0;
    Dataset work = data;
    if (opts.adjust != AdjustMethod::none) {
        const RegressionAdjustment adj = regression_adjust(data, opts.adjust);
        work = flattened(data, adj);
        shift = adj.predict(x0);
    }

    const RelevanceModel model = RelevanceModel::fit(work, opts.fit);
    const int bags = std::max(1, opts.bags);

    std::vector<FdrCurve> curves(static_cast<std::size_t>(bags));
    RngStream rng(seed, "custom-fdr");
    for (int b = 0; b < bags; ++b) {
        const LaserSample laser =
            generate_laser(work, model, x0, work.n(), rng.substream("bag", static_cast<std::uint64_t>(b)));
        curves[static_cast<std::size_t>(b)] =
            EngineRegistry::instance().fit(opts.engine, laser.samples).curve;
        if (laser.flat && b == 0) {
            curves.resize(1);
            break;  // every bag would return the same sample
        }
    }

    FdrCurve out;
    if (curves.size() == 1) {
        out = std::move(curves[0]);
    } else {
        double lo = curves[0].grid.minCoeff(), hi = curves[0].grid.maxCoeff();
        for (const auto& c : curves) {
            lo = std::min(lo, c.grid.minCoeff());
            hi = std::max(hi, c.grid.maxCoeff());
        }
        out.grid = linspace(lo, hi, 256);
        const Eigen::Index g = out.grid.size();
        out.fdr = Eigen::VectorXd::Zero(g);
        out.f = Eigen::VectorXd::Zero(g);
        out.f0 = Eigen::VectorXd::Zero(g);
        double mu = 0.0, sg = 0.0, pi = 0.0;
        for (const auto& c : curves) {
            for (Eigen::Index i = 0; i < g; ++i) {
                out.fdr[i] += c(out.grid[i]);
                out.f[i] += c.marginal(out.grid[i]);
                out.f0[i] += c.null_fit.pdf(out.grid[i]);
            }
            mu += c.null_fit.mu0;
            sg += c.null_fit.sigma0;
            pi += c.null_fit.pi0;
        }
        const double inv = 1.0 / static_cast<double>(curves.size());
        out.fdr *= inv;
        out.f *= inv;
        out.f0 *= inv;
        out.null_fit = {mu * inv, sg * inv, pi * inv};
        out.from_components = false;
        out.engine = opts.engine + "-bagged";
    }

    if (shift != 0.0) {
        out.grid.array() += shift;
        out.null_fit.mu0 += shift;
        if (out.from_components) {
            // rebuild the marginal on the shifted grid so evaluation stays exact
            out.marginal.grid.array() += shift;
        }
    }
    return out;
}

namespace {

struct GroupTable {
    std::vector<Eigen::VectorXd> profiles;           // canonical (sorted) order
    std::vector<std::vector<Eigen::Index>> members;  // row ids per profile
};

GroupTable group_by_profile(const Dataset& data) {
    std::map<std::vector<double>, std::vector<Eigen::Index>> groups;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        std::vector<double> key(data.p());
        for (Eigen::Index c = 0; c < data.p(); ++c) key[static_cast<std::size_t>(c)] = data.x(i, c);
        groups[key].push_back(i);
    }
    GroupTable out;
    for (auto& [key, rows] : groups) {
        out.profiles.push_back(
            Eigen::Map<const Eigen::VectorXd>(key.data(), static_cast<Eigen::Index>(key.size())));
        out.members.push_back(rows);
    }
    return out;
}

}  // namespace

InferenceReport macro_inference(const Dataset& data, std::uint64_t seed,
                                const MacroOptions& opts) {
    data.validate();
    if (!EngineRegistry::instance().contains(opts.engine))
        throw data_error("macro_inference: engine '" + opts.engine + "' is not registered");
    if (!(opts.alpha > 0.0 && opts.alpha < 1.0))
        throw data_error("macro_inference: alpha outside (0,1)");

    const Eigen::Index n = data.n();
    Dataset work = data;
    if (opts.adjust != AdjustMethod::none)
        work = flattened(data, regression_adjust(data, opts.adjust));

    Eigen::VectorXd fdr(n), pval(n);
    int group_count = 1;

    if (!opts.customize) {
        const FittedEngine eng = EngineRegistry::instance().fit(opts.engine, work.z);
        for (Eigen::Index i = 0; i < n; ++i) {
            fdr[i] = eng.fdr(work.z[i]);
            pval[i] = eng.p_value(work.z[i]);
        }
    } else {
        const RelevanceModel model = RelevanceModel::fit(work, opts.fit);
        const GroupTable groups = group_by_profile(work);
        group_count = static_cast<int>(groups.profiles.size());
        RngStream rng(seed, "macro");

        if (model.flat()) {
            // one engine serves every group: the lasers are the full data
            const FittedEngine eng = EngineRegistry::instance().fit(opts.engine, work.z);
            for (Eigen::Index i = 0; i < n; ++i) {
                fdr[i] = eng.fdr(work.z[i]);
                pval[i] = eng.p_value(work.z[i]);
            }
        } else {
            parallel_for(groups.profiles.size(), [&](std::size_t g) {
                const LaserSample laser =
                    generate_laser(work, model, groups.profiles[g], n,
                                   rng.substream("group", static_cast<std::uint64_t>(g)));
                const FittedEngine eng =
                    EngineRegistry::instance().fit(opts.engine, laser.samples);
                for (Eigen::Index i : groups.members[g]) {
                    fdr[i] = eng.fdr(work.z[i]);
                    pval[i] = eng.p_value(work.z[i]);
                }
            });
        }
    }

    const Eigen::VectorXd dps = dps_scores(fdr);
    InferenceReport report;
    report.engine = opts.engine;
    report.seed = seed;
    report.group_count = group_count;
    report.cases.resize(static_cast<std::size_t>(n));

    std::vector<char> significant(static_cast<std::size_t>(n), 0);
    if (opts.engine == "bh") {
        const auto rejected = bh_procedure(pval, opts.alpha);
        double cutoff = 0.0;
        for (Eigen::Index idx : rejected) {
            significant[static_cast<std::size_t>(idx)] = 1;
            cutoff = std::max(cutoff, pval[idx]);
        }
        report.threshold = cutoff;
    } else {
        report.threshold = locfdr_threshold(opts.alpha);
        for (Eigen::Index i = 0; i < n; ++i)
            significant[static_cast<std::size_t>(i)] = fdr[i] <= report.threshold ? 1 : 0;
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        CaseResult& c = report.cases[static_cast<std::size_t>(i)];
        c.id = i;
        c.z = data.z[i];
        c.fdr = fdr[i];
        c.dps = dps[i];
        c.significant = significant[static_cast<std::size_t>(i)] != 0;
        if (c.significant) ++report.rejections;
    }

    if (data.truth) {
        int fr = 0, hits = 0, signals = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool is_signal = (*data.truth)[i] != 0.0;
            signals += is_signal ? 1 : 0;
            if (significant[static_cast<std::size_t>(i)]) {
                if (is_signal) ++hits;
                else ++fr;
            }
        }
        report.false_discoveries = fr;
        report.missed = signals - hits;
    }
    return report;
}

RebResult reb_inference(const Dataset& data, const Eigen::VectorXd& x0, double z0,
                        std::uint64_t seed, const RebOptions& opts) {
    data.validate();
    if (!std::isfinite(z0)) throw data_error("reb_inference: z0 must be finite");
    if (opts.bags < 1) throw data_error("reb_inference: bags must be >= 1");

    RebResult out;
    Dataset work = data;
    if (opts.adjust != AdjustMethod::none) {
        const RegressionAdjustment adj = regression_adjust(data, opts.adjust);
        work = flattened(data, adj);
        out.shift = adj.predict(x0);
    }
    out.y0 = z0 - out.shift;

    const double sigma_hint = std::isnan(opts.sigma)
                                  ? interquartile_range(work.z) / 1.3489
                                  : opts.sigma;
    if (!(sigma_hint > 0.0)) throw numeric_error("reb_inference: non-positive sigma");

    NpmleConfig npmle = opts.npmle;
    npmle.grid_lo = work.z.minCoeff() - sigma_hint;
    npmle.grid_hi = work.z.maxCoeff() + sigma_hint;

    int bags = opts.bags;
    RelevanceModel model;
    bool flat = true;
    if (opts.use_relevance) {
        model = RelevanceModel::fit(work, opts.fit);
        flat = model.flat();
    }
    if (flat) bags = 1;  // every bag would see the identical sample
    out.flat = flat;

    const Eigen::Index g = npmle.grid_size;
    Eigen::MatrixXd prior_w(g, bags), post_m(g, bags);
    Eigen::VectorXd sigmas(bags);
    Eigen::VectorXd theta;

    RngStream rng(seed, "reb");
    for (int b = 0; b < bags; ++b) {
        Eigen::VectorXd sample;
        if (flat) {
            sample = work.z;
        } else {
            sample = generate_laser(work, model, x0, work.n(),
                                    rng.substream("bag", static_cast<std::uint64_t>(b)))
                         .samples;
        }
        const double sigma_b = std::isnan(opts.sigma)
                                   ? interquartile_range(sample) / 1.3489
                                   : opts.sigma;
        if (!(sigma_b > 0.0)) throw numeric_error("reb_inference: degenerate laser IQR");
        const PriorEstimate prior = npmle_prior(sample, sigma_b, npmle);
        const Posterior post = posterior(prior, out.y0, sigma_b, opts.alpha);
        prior_w.col(b) = prior.weight;
        post_m.col(b) = post.mass;
        sigmas[b] = sigma_b;
        theta = prior.theta;
    }

    out.sigma = sigmas.mean();
    out.prior.theta = theta;
    out.prior.weight = prior_w.rowwise().mean();
    out.prior.sigma = out.sigma;
    out.post = posterior_from_mass(theta, post_m.rowwise().mean(), opts.alpha);
    out.mean_z = out.post.mean + out.shift;
    out.hpd_lo_z = out.post.hpd_lo + out.shift;
    out.hpd_hi_z = out.post.hpd_hi + out.shift;
    return out;
}

FiniteBayesResult finite_bayes_ci(const Dataset& data, const Eigen::VectorXd& x0,
                                  double y0, int B, double alpha, std::uint64_t seed,
                                  const RebOptions& opts) {
    data.validate();
    if (B < 2) throw data_error("finite_bayes_ci: need B >= 2 cycles");

    const Eigen::Index n = data.n();
    RngStream rng(seed, "finite-bayes");

    RelevanceModel model = RelevanceModel::fit(data, opts.fit);
    Eigen::VectorXd base_sample;
    if (model.flat()) {
        base_sample = data.z;
    } else {
        base_sample = generate_laser(data, model, x0, n, rng.substream("laser")).samples;
    }
    const double sigma = std::isnan(opts.sigma)
                             ? interquartile_range(base_sample) / 1.349
                             : opts.sigma;
    if (!(sigma > 0.0)) throw numeric_error("finite_bayes_ci: degenerate laser IQR");

    NpmleConfig npmle = opts.npmle;
    npmle.grid_lo = data.z.minCoeff() - 3.0 * sigma;
    npmle.grid_hi = data.z.maxCoeff() + 3.0 * sigma;
    const PriorEstimate prior = npmle_prior(base_sample, sigma, npmle);

    // cumulative weights for inverse-cdf sampling of theta
    Eigen::VectorXd cum(prior.weight.size());
    std::partial_sum(prior.weight.data(), prior.weight.data() + prior.weight.size(), cum.data());

    const Eigen::Index g = npmle.grid_size;
    Eigen::MatrixXd posts(g, B);
    std::vector<char> ok(static_cast<std::size_t>(B), 0);

    parallel_for(static_cast<std::size_t>(B), [&](std::size_t k) {
        RngStream cyc = rng.substream("cycle", static_cast<std::uint64_t>(k));
        try {
            Eigen::VectorXd ystar(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double u = cyc.uniform();
                const auto it = std::lower_bound(cum.data(), cum.data() + cum.size(), u);
                const Eigen::Index gi =
                    std::min<Eigen::Index>(it - cum.data(), prior.theta.size() - 1);
                ystar[i] = cyc.normal(prior.theta[gi], sigma);
            }
            const PriorEstimate pstar = npmle_prior(ystar, sigma, npmle);
            posts.col(static_cast<Eigen::Index>(k)) = posterior(pstar, y0, sigma, alpha).mass;
            ok[k] = 1;
        } catch (const std::exception&) {
            ok[k] = 0;
        }
    });

    int used = 0;
    Eigen::VectorXd avg = Eigen::VectorXd::Zero(g);
    for (int k = 0; k < B; ++k) {
        if (ok[static_cast<std::size_t>(k)]) {
            avg += posts.col(k);
            ++used;
        }
    }
    const int failed = B - used;
    if (failed * 10 > B)
        throw numeric_error("finite_bayes_ci: " + std::to_string(failed) + " of " +
                            std::to_string(B) + " cycles failed");

    FiniteBayesResult out;
    out.sigma = sigma;
    out.cycles_failed = failed;
    out.averaged = posterior_from_mass(prior.theta, avg / static_cast<double>(used), alpha);
    out.ci_lo = out.averaged.hpd_lo;
    out.ci_hi = out.averaged.hpd_hi;
    return out;
}

ReproducibilityReport reproducibility_report(const Dataset& data1, const Dataset& data2,
                                             std::uint64_t seed, const MacroOptions& opts) {
    data1.validate();
    data2.validate();
    if (data1.n() != data2.n() || data1.p() != data2.p() || data1.x != data2.x)
        throw data_error("reproducibility_report: covariate designs do not match");

    ReproducibilityReport out;
    out.first = macro_inference(data1, seed, opts);
    out.second = macro_inference(data2, seed + 0x9e3779b97f4a7c15ULL, opts);

    for (Eigen::Index i = 0; i < data1.n(); ++i) {
        if (out.first.cases[static_cast<std::size_t>(i)].significant &&
            out.second.cases[static_cast<std::size_t>(i)].significant)
            out.common.push_back(i);
    }
    if (data1.truth) {
        int t = 0;
        for (Eigen::Index i : out.common)
            if ((*data1.truth)[i] != 0.0) ++t;
        out.common_true = t;
        out.common_false = static_cast<int>(out.common.size()) - t;
    }
    return out;
}

}  // namespace lprel
