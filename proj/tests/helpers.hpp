#pragma once

#include <cmath>
#include <complex>

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }
inline bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}
inline bool close(std::complex<double> a, std::complex<double> b, double tol) { return std::abs(a - b) <= tol; }
