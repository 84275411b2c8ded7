#include "lprel/engines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lprel/error.hpp"
#include "lprel/numeric.hpp"

namespace lprel {

double EmpiricalNull::pdf(double z) const { return normal_pdf(z, mu0, sigma0); }

double EmpiricalNull::p_value(double z) const { return two_sided_p((z - mu0) / sigma0); }

double LindseyDensity::operator()(double z) const {
    return std::exp(interp_linear(grid, log_density, z));
}

LindseyDensity lindsey_density(const Eigen::VectorXd& z, int bins, int degree) {
    const Eigen::Index n = z.size();
    if (n < 50) throw data_error("lindsey_density: need at least 50 observations");
    if (bins < degree + 2) throw data_error("lindsey_density: too few bins for the degree");

    const double lo = z.minCoeff();
    const double hi = z.maxCoeff();
    if (!(hi > lo)) throw data_error("lindsey_density: degenerate sample range");
    const double width = (hi - lo) / bins;

    Eigen::VectorXd counts = Eigen::VectorXd::Zero(bins);
    for (Eigen::Index i = 0; i < n; ++i) {
        auto b = static_cast<Eigen::Index>((z[i] - lo) / width);
        b = std::clamp<Eigen::Index>(b, 0, bins - 1);
        counts[b] += 1.0;
    }

    LindseyDensity out;
    out.bins = bins;
    out.degree = degree;
    out.grid.resize(bins);
    for (int b = 0; b < bins; ++b) out.grid[b] = lo + (b + 0.5) * width;

    // Orthonormalized polynomial design of the standardized centers keeps
    // the IRLS steps well-conditioned up to degree ~10.
    const double gmean = out.grid.mean();
    const double gsd = std::sqrt((out.grid.array() - gmean).square().mean());
    Eigen::MatrixXd design(bins, degree + 1);
    design.col(0).setOnes();
    for (int d = 1; d <= degree; ++d)
        design.col(d) = design.col(d - 1).cwiseProduct((out.grid.array() - gmean).matrix() / gsd);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
    const Eigen::MatrixXd basis =
        qr.householderQ() * Eigen::MatrixXd::Identity(bins, degree + 1) * std::sqrt(double(bins));

    // Poisson IRLS: counts_k ~ Poisson(exp(eta_k)).
    Eigen::VectorXd eta(bins);
    const double base = std::max(counts.mean(), 0.5);
    for (int b = 0; b < bins; ++b) eta[b] = std::log(std::max(counts[b], 0.25 * base));
    Eigen::VectorXd beta =
        basis.householderQr().solve(eta);  // warm start from the log counts

    double dev_old = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        eta = basis * beta;
        Eigen::VectorXd mu = eta.array().min(300.0).exp();
        Eigen::VectorXd w = mu.array().max(1e-10);
        Eigen::VectorXd adj = eta + ((counts - mu).array() / w.array()).matrix();
        Eigen::VectorXd sw = w.array().sqrt();
        Eigen::MatrixXd wb = sw.asDiagonal() * basis;
        Eigen::VectorXd wy = sw.cwiseProduct(adj);
        beta = wb.householderQr().solve(wy);

        double dev = 0.0;
        for (int b = 0; b < bins; ++b) {
            if (counts[b] > 0.0) dev += counts[b] * std::log(counts[b] / mu[b]);
            dev -= counts[b] - mu[b];
        }
        dev *= 2.0;
        if (!std::isfinite(dev)) throw numeric_error("lindsey_density: diverging fit");
        if (std::abs(dev_old - dev) < 1e-10 * (1.0 + std::abs(dev))) {
            converged = true;
            break;
        }
        dev_old = dev;
    }
    if (!converged) throw numeric_error("lindsey_density: IRLS did not converge");

    eta = basis * beta;
    Eigen::VectorXd dens = (eta.array() - std::log(double(n) * width)).exp();
    const double integral = trapezoid(out.grid, dens);
    if (!(integral > 0.0)) throw numeric_error("lindsey_density: non-positive integral");
    out.density = dens / integral;
    out.log_density = out.density.array().log();
    return out;
}

EmpiricalNull fit_empirical_null(const Eigen::VectorXd& z) {
    const Eigen::Index n = z.size();
    if (n < 200) throw data_error("fit_empirical_null: need at least 200 observations");

    Eigen::VectorXd s = z;
    std::sort(s.data(), s.data() + n);
    const double a = quantile_sorted(s, 0.25);
    const double b = quantile_sorted(s, 0.75);
    if (!(b > a)) throw data_error("fit_empirical_null: central window has zero width");

    std::vector<double> inside;
    inside.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        if (s[i] >= a && s[i] <= b) inside.push_back(s[i]);
    const auto nw = static_cast<double>(inside.size());

    // Truncated-normal MLE on the central window.
    auto nll = [&](const Eigen::VectorXd& par) {
        const double mu = par[0];
        const double sigma = std::exp(par[1]);
        const double pab = normal_cdf(b, mu, sigma) - normal_cdf(a, mu, sigma);
        if (!(pab > 1e-300)) return 1e300;
        double acc = nw * (std::log(pab) + std::log(sigma));
        for (double v : inside) {
            const double t = (v - mu) / sigma;
            acc += 0.5 * t * t;
        }
        return acc;
    };
    Eigen::VectorXd start(2);
    start[0] = quantile_sorted(s, 0.5);
    start[1] = std::log(std::max((b - a) / 1.349, 1e-8));
    Eigen::VectorXd step(2);
    step[0] = 0.1 * (b - a);
    step[1] = 0.2;
    const Eigen::VectorXd opt = nelder_mead(nll, start, step, 400, 1e-12);

    EmpiricalNull out;
    out.mu0 = opt[0];
    out.sigma0 = std::exp(opt[1]);
    const double pab = normal_cdf(b, out.mu0, out.sigma0) - normal_cdf(a, out.mu0, out.sigma0);
    out.pi0 = std::min(1.0, (nw / static_cast<double>(n)) / std::max(pab, 1e-12));
    return out;
}

FdrCurve locfdr_curve(const Eigen::VectorXd& z, const LocfdrConfig& config) {
    FdrCurve out;
    out.marginal = lindsey_density(z, config.bins, config.degree);
    out.null_fit = fit_empirical_null(z);
    out.grid = out.marginal.grid;
    const Eigen::Index g = out.grid.size();
    out.f = out.marginal.density;
    out.f0.resize(g);
    out.fdr.resize(g);
    for (Eigen::Index i = 0; i < g; ++i) {
        out.f0[i] = out.null_fit.pdf(out.grid[i]);
        out.fdr[i] = std::min(1.0, out.null_fit.pi0 * out.f0[i] / out.f[i]);
    }
    if (config.monotone_tails) {
        Eigen::Index c = 0;
        (out.grid.array() - out.null_fit.mu0).abs().minCoeff(&c);
        for (Eigen::Index i = c; i + 1 < g; ++i)
            out.fdr[i + 1] = std::min(out.fdr[i + 1], out.fdr[i]);
        for (Eigen::Index i = c; i > 0; --i)
            out.fdr[i - 1] = std::min(out.fdr[i - 1], out.fdr[i]);
    }
    out.from_components = !config.monotone_tails;
    out.engine = "locfdr";
    return out;
}

double FdrCurve::operator()(double z) const {
    if (from_components)
        return std::min(1.0, null_fit.pi0 * null_fit.pdf(z) / std::max(marginal(z), 1e-300));
    return std::clamp(interp_linear(grid, fdr, z), 0.0, 1.0);
}

std::vector<Eigen::Index> bh_procedure(const Eigen::VectorXd& p, double alpha) {
    const Eigen::Index n = p.size();
    if (n == 0) return {};
    if (!(alpha > 0.0 && alpha < 1.0)) throw data_error("bh_procedure: alpha outside (0,1)");
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(p[i] >= 0.0 && p[i] <= 1.0))
            throw data_error("bh_procedure: p-value out of [0,1] at index " + std::to_string(i));

    Eigen::VectorXd s = p;
    std::sort(s.data(), s.data() + n);
    double threshold = -1.0;
    for (Eigen::Index i = n; i >= 1; --i) {
        if (s[i - 1] <= alpha * static_cast<double>(i) / static_cast<double>(n)) {
            threshold = s[i - 1];
            break;
        }
    }
    std::vector<Eigen::Index> rejected;
    if (threshold < 0.0) return rejected;
    for (Eigen::Index i = 0; i < n; ++i)
        if (p[i] <= threshold) rejected.push_back(i);
    return rejected;
}

PriorEstimate npmle_prior(const Eigen::VectorXd& z, double sigma, const NpmleConfig& config) {
    const Eigen::Index n = z.size();
    if (n < 20) throw data_error("npmle_prior: need at least 20 observations");
    if (!(sigma > 0.0)) throw data_error("npmle_prior: sigma must be positive");
    const int g = config.grid_size;
    if (g < 2) throw data_error("npmle_prior: grid_size must be >= 2");

    const double lo = std::isnan(config.grid_lo) ? z.minCoeff() - sigma : config.grid_lo;
    const double hi = std::isnan(config.grid_hi) ? z.maxCoeff() + sigma : config.grid_hi;
    if (!(hi > lo)) throw data_error("npmle_prior: empty theta grid");

    PriorEstimate out;
    out.theta = linspace(lo, hi, g);
    out.sigma = sigma;

    // Likelihood matrix L_ig = N(z_i; theta_g, sigma^2).
    Eigen::MatrixXd lik(n, g);
    const double norm = kInvSqrt2Pi / sigma;
    for (int c = 0; c < g; ++c)
        lik.col(c) = (-(0.5 / (sigma * sigma)) * (z.array() - out.theta[c]).square()).exp() * norm;

    Eigen::VectorXd w = Eigen::VectorXd::Constant(g, 1.0 / g);
    double ll_old = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < config.max_iter; ++it) {
        Eigen::VectorXd mix = lik * w;                       // marginal at each z_i
        mix = mix.array().max(1e-300);
        const double ll = mix.array().log().sum();
        if (!std::isfinite(ll)) throw numeric_error("npmle_prior: non-finite likelihood");
        out.log_likelihood.push_back(ll);
        if (ll - ll_old < config.tol * (1.0 + std::abs(ll)) && it > 0) break;
        ll_old = ll;
        w = w.array() * (lik.transpose() * mix.cwiseInverse()).array() / static_cast<double>(n);
        w /= w.sum();
    }
    out.weight = w;
    return out;
}

Posterior posterior_from_mass(Eigen::VectorXd theta, Eigen::VectorXd mass, double alpha) {
    Posterior out;
    out.theta = std::move(theta);
    out.mass = std::move(mass);
    const double total = out.mass.sum();
    if (!(total > 0.0) || !out.mass.allFinite())
        throw numeric_error("posterior: all masses vanish");
    out.mass /= total;
    out.mean = out.theta.dot(out.mass);
    out.level = 1.0 - alpha;

    // HPD by descending-mass accumulation (uniform grid, so mass order
    // equals density order). The set always contains the mode.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(out.theta.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return out.mass[a] > out.mass[b]; });
    double acc = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (Eigen::Index idx : order) {
        acc += out.mass[idx];
        lo = std::min(lo, out.theta[idx]);
        hi = std::max(hi, out.theta[idx]);
        if (acc >= out.level) break;
    }
    out.hpd_lo = lo;
    out.hpd_hi = hi;
    out.hpd_mass = acc;
    return out;
}

Posterior posterior(const PriorEstimate& prior, double z, double sigma, double alpha) {
    if (!(sigma > 0.0)) throw data_error("posterior: sigma must be positive");
    const Eigen::Index g = prior.theta.size();
    // Work in logs so a z far outside the grid still normalizes.
    Eigen::VectorXd logm(g);
    for (Eigen::Index i = 0; i < g; ++i) {
        const double t = (z - prior.theta[i]) / sigma;
        logm[i] = (prior.weight[i] > 0.0 ? std::log(prior.weight[i])
                                         : -std::numeric_limits<double>::infinity()) -
                  0.5 * t * t;
    }
    const double lse = log_sum_exp(logm);
    if (!std::isfinite(lse)) throw numeric_error("posterior: all masses vanish");
    return posterior_from_mass(prior.theta, (logm.array() - lse).exp(), alpha);
}

EngineRegistry& EngineRegistry::instance() {
    static EngineRegistry reg = [] {
        EngineRegistry r;
        r.register_engine("locfdr", [](const Eigen::VectorXd& sample) {
            FittedEngine e;
            e.curve = locfdr_curve(sample);
            e.name = "locfdr";
            return e;
        });
        r.register_engine("bh", [](const Eigen::VectorXd& sample) {
            FittedEngine e;
            e.curve = locfdr_curve(sample);
            e.name = "bh";
            return e;
        });
        return r;
    }();
    return reg;
}

void EngineRegistry::register_engine(const std::string& name, EngineFactory factory) {
    for (auto& [n, f] : factories_) {
        if (n == name) {
            f = std::move(factory);
            return;
        }
    }
    factories_.emplace_back(name, std::move(factory));
}

FittedEngine EngineRegistry::fit(const std::string& name, const Eigen::VectorXd& sample) const {
    for (const auto& [n, f] : factories_)
        if (n == name) return f(sample);
    throw data_error("engine '" + name + "' is not registered");
}

bool EngineRegistry::contains(const std::string& name) const {
    for (const auto& [n, f] : factories_)
        if (n == name) return true;
    return false;
}

}  // namespace lprel
