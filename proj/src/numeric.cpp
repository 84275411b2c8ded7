#include "lprel/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "lprel/error.hpp"

namespace lprel {

double normal_pdf(double x, double mu, double sigma) {
    const double t = (x - mu) / sigma;
    return kInvSqrt2Pi / sigma * std::exp(-0.5 * t * t);
}

double normal_cdf(double x, double mu, double sigma) {
    return 0.5 * std::erfc(-(x - mu) / (sigma * kSqrt2));
}

double two_sided_p(double t) {
    return std::erfc(std::abs(t) / kSqrt2);
}

// Wichura (1988), algorithm AS 241, routine PPND16.
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw numeric_error("normal_quantile: p outside [0,1]");
    }
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -val : val;
}

double quantile_sorted(const Eigen::VectorXd& sorted, double p) {
    const Eigen::Index n = sorted.size();
    if (n == 0) throw data_error("quantile: empty sample");
    if (n == 1) return sorted[0];
    const double h = (static_cast<double>(n) - 1.0) * std::clamp(p, 0.0, 1.0);
    const Eigen::Index i = std::min<Eigen::Index>(static_cast<Eigen::Index>(h), n - 2);
    const double frac = h - static_cast<double>(i);
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

double quantile(const Eigen::VectorXd& v, double p) {
    Eigen::VectorXd s = v;
    std::sort(s.data(), s.data() + s.size());
    return quantile_sorted(s, p);
}

double interquartile_range(const Eigen::VectorXd& v) {
    Eigen::VectorXd s = v;
    std::sort(s.data(), s.data() + s.size());
    return quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
}

double sample_sd(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    if (n < 2) return 0.0;
    const double m = v.mean();
    return std::sqrt((v.array() - m).square().sum() / static_cast<double>(n - 1));
}

double trapezoid(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
        acc += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
    }
    return acc;
}

Eigen::VectorXd cumtrapz(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    Eigen::VectorXd out(x.size());
    if (x.size() == 0) return out;
    out[0] = 0.0;
    for (Eigen::Index i = 1; i < x.size(); ++i) {
        out[i] = out[i - 1] + 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    }
    return out;
}

Eigen::VectorXd linspace(double lo, double hi, int n) {
    return Eigen::VectorXd::LinSpaced(n, lo, hi);
}

double log_sum_exp(const Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((v.array() - m).exp().sum());
}

double interp_linear(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double xq) {
    const Eigen::Index n = x.size();
    if (n == 1) return y[0];
    Eigen::Index hi = std::lower_bound(x.data(), x.data() + n, xq) - x.data();
    if (hi <= 0) hi = 1;
    if (hi >= n) hi = n - 1;
    const double t = (xq - x[hi - 1]) / (x[hi] - x[hi - 1]);
    return y[hi - 1] + t * (y[hi] - y[hi - 1]);
}

Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& fn,
                            const Eigen::VectorXd& start,
                            const Eigen::VectorXd& step,
                            int max_iter, double tol) {
    const int d = static_cast<int>(start.size());
    std::vector<Eigen::VectorXd> pts(d + 1, start);
    std::vector<double> fv(d + 1);
    for (int i = 0; i < d; ++i) pts[i + 1][i] += step[i];
    for (int i = 0; i <= d; ++i) fv[i] = fn(pts[i]);

    std::vector<int> order(d + 1);
    for (int it = 0; it < max_iter; ++it) {
        for (int i = 0; i <= d; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
        const int best = order[0], worst = order[d], second = order[d - 1];
        if (std::abs(fv[worst] - fv[best]) <= tol * (1.0 + std::abs(fv[best]))) break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
        for (int i = 0; i <= d; ++i)
            if (i != worst) centroid += pts[i];
        centroid /= static_cast<double>(d);

        Eigen::VectorXd refl = centroid + (centroid - pts[worst]);
        double f_refl = fn(refl);
        if (f_refl < fv[best]) {
            Eigen::VectorXd expand = centroid + 2.0 * (centroid - pts[worst]);
            double f_exp = fn(expand);
            if (f_exp < f_refl) { pts[worst] = expand; fv[worst] = f_exp; }
            else { pts[worst] = refl; fv[worst] = f_refl; }
        } else if (f_refl < fv[second]) {
            pts[worst] = refl; fv[worst] = f_refl;
        } else {
            Eigen::VectorXd contr = centroid + 0.5 * (pts[worst] - centroid);
            double f_con = fn(contr);
            if (f_con < fv[worst]) { pts[worst] = contr; fv[worst] = f_con; }
            else {
                for (int i = 0; i <= d; ++i) {
                    if (i == best) continue;
                    pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
                    fv[i] = fn(pts[i]);
                }
            }
        }
    }
    int best = 0;
    for (int i = 1; i <= d; ++i)
        if (fv[i] < fv[best]) best = i;
    return pts[best];
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec == std::errc()) return std::string(buf, res.ptr);
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

}  // namespace lprel
