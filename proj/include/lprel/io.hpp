#ifndef LPREL_IO_HPP
#define LPREL_IO_HPP

#include <Eigen/Dense>
#include <string>

#include "lprel/engines.hpp"

namespace lprel {

/// CSV export of an fdr curve: (z, fdr, f, f0_component).
void write_curve_csv(const std::string& path, const FdrCurve& curve);

/// CSV export of a discrete prior or posterior: (theta, mass).
void write_prior_csv(const std::string& path, const Eigen::VectorXd& theta,
                     const Eigen::VectorXd& mass);

/// CSV export of a relevance density on the rank scale, with optional
/// bootstrap columns.
void write_density_csv(const std::string& path, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& d, const Eigen::VectorXd* sd = nullptr,
                       const Eigen::VectorXd* lo = nullptr,
                       const Eigen::VectorXd* hi = nullptr);

/// Minimal single-polyline SVG plot.
void write_svg_curve(const std::string& path, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& y, const std::string& title);

}  // namespace lprel

#endif  // LPREL_IO_HPP
