#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace srsim::util {

inline constexpr double kPi = 3.14159265358979323846;

// dB helpers for power quantities. Variance is relative to shot noise = 1,
// so squeezing_db(1) = 0 and positive dB means noise below shot.
inline double to_db(double power_ratio) { return 10.0 * std::log10(power_ratio); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }
inline double variance_to_squeezing_db(double v) { return -10.0 * std::log10(v); }
inline double squeezing_db_to_variance(double db) { return std::pow(10.0, -db / 10.0); }

// Composite Simpson rule with n panels (n rounded up to even).
double simpson(const std::function<double(double)>& f, double a, double b, int n);

double mean(std::span<const double> x);
// Sample variance (N-1 denominator).
double variance(std::span<const double> x);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);
// Least squares with the slope pinned; only the intercept is free.
LineFit fit_line_fixed_slope(std::span<const double> x, std::span<const double> y,
                             double slope);

// Maximizes a unimodal function on [a, b] to the requested x tolerance.
double golden_section_max(const std::function<double(double)>& f, double a, double b,
                          double tol);

std::vector<double> linspace(double a, double b, int n);
std::vector<double> logspace(double a, double b, int n);  // geometric from a to b

}  // namespace srsim::util
