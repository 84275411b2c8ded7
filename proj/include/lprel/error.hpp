#ifndef LPREL_ERROR_HPP
#define LPREL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace lprel {

// Invalid or inconsistent input data (CSV parse failures, bad shapes, ...).
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration values (bad simulator settings, bad flags, ...).
struct config_error : data_error {
    using data_error::data_error;
};

// Numerical failure (non-convergence, singular design, degenerate density).
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace lprel

#endif  // LPREL_ERROR_HPP
