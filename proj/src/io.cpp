#include "lprel/io.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>
#include <vector>

#include "lprel/error.hpp"
#include "lprel/numeric.hpp"
#include "lprel/parallel.hpp"

namespace lprel {

int worker_count() {
    if (const char* env = std::getenv("LASER_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

void write_curve_csv(const std::string& path, const FdrCurve& curve) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write '" + path + "'");
    out << "z,fdr,f,f0_component\n";
    for (Eigen::Index i = 0; i < curve.grid.size(); ++i)
        out << format_double(curve.grid[i]) << ',' << format_double(curve.fdr[i]) << ','
            << format_double(curve.f[i]) << ',' << format_double(curve.f0[i]) << '\n';
}

void write_prior_csv(const std::string& path, const Eigen::VectorXd& theta,
                     const Eigen::VectorXd& mass) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write '" + path + "'");
    out << "theta,mass\n";
    for (Eigen::Index i = 0; i < theta.size(); ++i)
        out << format_double(theta[i]) << ',' << format_double(mass[i]) << '\n';
}

void write_density_csv(const std::string& path, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& d, const Eigen::VectorXd* sd,
                       const Eigen::VectorXd* lo, const Eigen::VectorXd* hi) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write '" + path + "'");
    out << "u,d";
    if (sd) out << ",sd";
    if (lo && hi) out << ",lo,hi";
    out << '\n';
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        out << format_double(u[i]) << ',' << format_double(d[i]);
        if (sd) out << ',' << format_double((*sd)[i]);
        if (lo && hi) out << ',' << format_double((*lo)[i]) << ',' << format_double((*hi)[i]);
        out << '\n';
    }
}

void write_svg_curve(const std::string& path, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& y, const std::string& title) {
    if (x.size() < 2) throw data_error("svg: need at least 2 points");
    const double xmin = x.minCoeff(), xmax = x.maxCoeff();
    double ymin = y.minCoeff(), ymax = y.maxCoeff();
    if (ymax == ymin) ymax = ymin + 1.0;
    const int w = 640, h = 400, pad = 48;
    auto sx = [&](double v) { return pad + (v - xmin) / (xmax - xmin) * (w - 2 * pad); };
    auto sy = [&](double v) { return h - pad - (v - ymin) / (ymax - ymin) * (h - 2 * pad); };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write '" + path + "'");
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << w / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
        << "</text>\n";
    out << "<line x1='" << pad << "' y1='" << h - pad << "' x2='" << w - pad << "' y2='"
        << h - pad << "' stroke='black'/>\n";
    out << "<line x1='" << pad << "' y1='" << pad << "' x2='" << pad << "' y2='" << h - pad
        << "' stroke='black'/>\n";
    out << "<polyline fill='none' stroke='#c0392b' stroke-width='1.5' points='";
    for (Eigen::Index i = 0; i < x.size(); ++i) out << sx(x[i]) << ',' << sy(y[i]) << ' ';
    out << "'/>\n</svg>\n";
}

}  // namespace lprel
