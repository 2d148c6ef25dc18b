#pragma once

// Truncated bivariate Taylor series. Coefficient (i, j) multiplies x^i y^j;
// arithmetic is exact truncation, i.e. coefficient (i, j) of any result
// depends only on coefficients (<= i, <= j) of the operands.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "twinbeam/errors.hpp"

namespace twinbeam {

template <typename Scalar>
class BivariateSeries {
 public:
  using Coefficients = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  BivariateSeries() : coeffs_(Coefficients::Zero(1, 1)) {}

  BivariateSeries(int order1, int order2) {
    if (order1 < 0 || order2 < 0) throw std::invalid_argument("series order must be non-negative");
    coeffs_ = Coefficients::Zero(order1 + 1, order2 + 1);
  }

  explicit BivariateSeries(Coefficients coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.rows() == 0 || coeffs_.cols() == 0)
      throw std::invalid_argument("series needs at least one coefficient");
  }

  static BivariateSeries constant(Scalar value, int order1, int order2) {
    BivariateSeries s(order1, order2);
    s.coeffs_(0, 0) = value;
    return s;
  }

  int order1() const { return static_cast<int>(coeffs_.rows()) - 1; }
  int order2() const { return static_cast<int>(coeffs_.cols()) - 1; }

  Scalar operator()(int i, int j) const { return coeffs_(i, j); }
  Scalar& operator()(int i, int j) { return coeffs_(i, j); }

  const Coefficients& coefficients() const { return coeffs_; }

  /// Same series with a different truncation (zero-padded when growing).
  BivariateSeries truncated(int order1, int order2) const {
    BivariateSeries out(order1, order2);
    const int r = std::min(order1, this->order1()) + 1;
    const int c = std::min(order2, this->order2()) + 1;
    out.coeffs_.topLeftCorner(r, c) = coeffs_.topLeftCorner(r, c);
    return out;
  }

  Scalar evaluate(Scalar x, Scalar y) const {
    Scalar acc = 0;
    for (int i = order1(); i >= 0; --i) {
      Scalar row = 0;
      for (int j = order2(); j >= 0; --j) row = row * y + coeffs_(i, j);
      acc = acc * x + row;
    }
    return acc;
  }

  /// Re-expands the (polynomial) series about (x0, y0). Exact for
  /// polynomials whose degree fits in the truncation.
  BivariateSeries shifted(Scalar x0, Scalar y0) const {
    const int n1 = order1(), n2 = order2();
    Coefficients binom = Coefficients::Zero(std::max(n1, n2) + 1, std::max(n1, n2) + 1);
    for (int n = 0; n < binom.rows(); ++n) {
      binom(n, 0) = 1;
      for (int k = 1; k <= n; ++k) binom(n, k) = binom(n - 1, k - 1) + (k < n ? binom(n - 1, k) : 0);
    }
    // Shift along x, then along y.
    Coefficients tmp = Coefficients::Zero(n1 + 1, n2 + 1);
    for (int i = 0; i <= n1; ++i)
      for (int a = 0; a <= i; ++a) {
        const Scalar w = binom(i, a) * std::pow(x0, i - a);
        tmp.row(a) += w * coeffs_.row(i);
      }
    Coefficients out = Coefficients::Zero(n1 + 1, n2 + 1);
    for (int j = 0; j <= n2; ++j)
      for (int b = 0; b <= j; ++b) {
        const Scalar w = binom(j, b) * std::pow(y0, j - b);
        out.col(b) += w * tmp.col(j);
      }
    return BivariateSeries(std::move(out));
  }

  /// Raises the series to a real power via the recurrence
  /// f * d(f^alpha) = alpha * f^alpha * df, applied along x (and along y on
  /// the x = 0 column). Only the non-zero support of f is visited, so a
  /// low-degree polynomial costs O(terms * order1 * order2).
  BivariateSeries pow(Scalar alpha) const {
    const Scalar f00 = coeffs_(0, 0);
    if (!(f00 > 0)) throw NumericalError("series power needs a positive constant term");
    const int n1 = order1(), n2 = order2();
    // Effective support of f.
    int d1 = 0, d2 = 0;
    for (int i = 0; i <= n1; ++i)
      for (int j = 0; j <= n2; ++j)
        if (coeffs_(i, j) != Scalar(0)) {
          d1 = std::max(d1, i);
          d2 = std::max(d2, j);
        }

    BivariateSeries r(n1, n2);
    r.coeffs_(0, 0) = std::pow(f00, alpha);
    const Scalar one_plus = 1 + alpha;
    for (int i = 0; i <= n1; ++i) {
      for (int j = 0; j <= n2; ++j) {
        if (i == 0 && j == 0) continue;
        Scalar acc = 0;
        const int amax = std::min(i, d1), bmax = std::min(j, d2);
        if (i > 0) {
          for (int a = 0; a <= amax; ++a)
            for (int b = 0; b <= bmax; ++b) {
              if (a == 0 && b == 0) continue;
              const Scalar f = coeffs_(a, b);
              if (f != Scalar(0)) acc += f * r.coeffs_(i - a, j - b) * (one_plus * a - i);
            }
          r.coeffs_(i, j) = acc / (f00 * i);
        } else {
          for (int b = 1; b <= bmax; ++b) {
            const Scalar f = coeffs_(0, b);
            if (f != Scalar(0)) acc += f * r.coeffs_(0, j - b) * (one_plus * b - j);
          }
          r.coeffs_(0, j) = acc / (f00 * j);
        }
      }
    }
    return r;
  }

  BivariateSeries rsqrt() const { return pow(Scalar(-0.5)); }

  BivariateSeries& operator+=(const BivariateSeries& o) {
    check_same_shape(o);
    coeffs_ += o.coeffs_;
    return *this;
  }
  BivariateSeries& operator-=(const BivariateSeries& o) {
    check_same_shape(o);
    coeffs_ -= o.coeffs_;
    return *this;
  }
  BivariateSeries& operator*=(Scalar k) {
    coeffs_ *= k;
    return *this;
  }

  friend BivariateSeries operator+(BivariateSeries a, const BivariateSeries& b) { return a += b; }
  friend BivariateSeries operator-(BivariateSeries a, const BivariateSeries& b) { return a -= b; }
  friend BivariateSeries operator*(BivariateSeries a, Scalar k) { return a *= k; }
  friend BivariateSeries operator*(Scalar k, BivariateSeries a) { return a *= k; }

  /// Truncated Cauchy product.
  friend BivariateSeries operator*(const BivariateSeries& a, const BivariateSeries& b) {
    a.check_same_shape(b);
    const int n1 = a.order1(), n2 = a.order2();
    BivariateSeries out(n1, n2);
    for (int i = 0; i <= n1; ++i)
      for (int j = 0; j <= n2; ++j) {
        Scalar acc = 0;
        for (int p = 0; p <= i; ++p)
          for (int q = 0; q <= j; ++q) acc += a.coeffs_(p, q) * b.coeffs_(i - p, j - q);
        out.coeffs_(i, j) = acc;
      }
    return out;
  }

 private:
  void check_same_shape(const BivariateSeries& o) const {
    if (o.order1() != order1() || o.order2() != order2())
      throw std::invalid_argument("series truncation orders differ");
  }

  Coefficients coeffs_;
};

}  // namespace twinbeam
