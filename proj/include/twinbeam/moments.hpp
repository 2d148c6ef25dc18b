#pragma once

// Intensity moments and photon-number statistics of two-mode Gaussian
// states, obtained by differentiating the normal generating function
// G(l1, l2) = Q(l1, l2)^(-1/2) with Q = lambda^T K lambda and
// lambda = (1, l1, l2, l1 l2).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "twinbeam/errors.hpp"
#include "twinbeam/series.hpp"
#include "twinbeam/state.hpp"

namespace twinbeam {

struct EngineConfig {
  int max_order = 12;
};

template <typename Scalar>
struct KMatrix {
  Scalar k12{0}, k13{0}, k14{0}, k22{0}, k24{0}, k33{0}, k34{0}, k44{0};

  /// Upper-triangular 4x4 form with k11 = 1.
  Matrix4<Scalar> matrix() const {
    Matrix4<Scalar> k = Matrix4<Scalar>::Zero();
    k(0, 0) = 1;
    k(0, 1) = k12;
    k(0, 2) = k13;
    k(0, 3) = k14;
    k(1, 1) = k22;
    k(1, 3) = k24;
    k(2, 2) = k33;
    k(2, 3) = k34;
    k(3, 3) = k44;
    return k;
  }

  /// Q(l1, l2) as a series with truncation (2, 2); exact.
  BivariateSeries<Scalar> polynomial() const {
    BivariateSeries<Scalar> q(2, 2);
    q(0, 0) = 1;
    q(1, 0) = k12;
    q(0, 1) = k13;
    q(1, 1) = k14;
    q(2, 0) = k22;
    q(2, 1) = k24;
    q(0, 2) = k33;
    q(1, 2) = k34;
    q(2, 2) = k44;
    return q;
  }

  Scalar evaluate(Scalar l1, Scalar l2) const {
    Eigen::Matrix<Scalar, 4, 1> lam(1, l1, l2, l1 * l2);
    return lam.dot(matrix() * lam);
  }
};

/// K-matrix entries. The l1^2 l2^2 coefficient equals det(M) of the moment
/// matrix; the printed expansion is accumulated in extended precision since
/// its terms grow like B^4 while the sum grows like B^2.
template <typename Scalar>
KMatrix<Scalar> build_k_matrix(const TwoModeGaussianState<Scalar>& s) {
  using W = detail::Wide<Scalar>;
  using WC = std::complex<W>;
  auto wc = [](std::complex<Scalar> z) { return WC(z.real(), z.imag()); };
  const W b1 = s.b1(), b2 = s.b2();
  const WC c1 = wc(s.c1()), c2 = wc(s.c2()), d = wc(s.d12()), db = wc(s.dbar12());
  const W c1a = std::norm(c1), c2a = std::norm(c2), da = std::norm(d), dba = std::norm(db);
  const W re1 = std::real(c1 * db * std::conj(d));
  const W re2 = std::real(c2 * std::conj(db) * std::conj(d));

  KMatrix<Scalar> k;
  k.k12 = static_cast<Scalar>(2 * b1);
  k.k13 = static_cast<Scalar>(2 * b2);
  k.k14 = static_cast<Scalar>(4 * b1 * b2 - 2 * da - 2 * dba);
  k.k22 = static_cast<Scalar>(b1 * b1 - c1a);
  k.k24 = static_cast<Scalar>(2 * b1 * b1 * b2 - 2 * b1 * (da + dba) - 2 * b2 * c1a - 4 * re1);
  k.k33 = static_cast<Scalar>(b2 * b2 - c2a);
  k.k34 = static_cast<Scalar>(2 * b1 * b2 * b2 - 2 * b2 * (da + dba) - 2 * b1 * c2a - 4 * re2);
  const W k44 = b1 * b1 * b2 * b2 + da * da + dba * dba + c1a * c2a - b1 * b1 * c2a -
                b2 * b2 * c1a - 2 * b1 * b2 * da - 2 * b1 * b2 * dba - 2 * da * dba -
                4 * b1 * re2 - 4 * b2 * re1 - 2 * std::real(c1 * c2 * std::conj(d) * std::conj(d)) -
                2 * std::real(c1 * std::conj(c2) * db * db);
  k.k44 = static_cast<Scalar>(k44);
  return k;
}

/// Taylor expansion of G about (x0, y0), truncated at (order1, order2).
template <typename Scalar>
BivariateSeries<Scalar> generating_series(const KMatrix<Scalar>& k, Scalar x0, Scalar y0, int order1,
                                          int order2) {
  const Scalar q0 = k.evaluate(x0, y0);
  if (!(q0 > 0)) throw NumericalError("generating polynomial is not positive at the expansion point");
  return k.polynomial().truncated(std::max(order1, 2), std::max(order2, 2))
      .shifted(x0, y0)
      .truncated(order1, order2)
      .rsqrt();
}

namespace detail {

template <typename Scalar>
Scalar factorial(int n) {
  Scalar f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

inline void check_order(int a, int b, const EngineConfig& cfg) {
  if (a < 0 || b < 0) throw std::invalid_argument("orders must be non-negative");
  if (a + b > cfg.max_order)
    throw OrderLimitError("order " + std::to_string(a + b) + " exceeds configured maximum " +
                          std::to_string(cfg.max_order));
}

template <typename Scalar>
Scalar sign_pow(int n) {
  return (n % 2 == 0) ? Scalar(1) : Scalar(-1);
}

inline constexpr double kNegativeProbabilityTolerance = 1e-10;

template <typename Scalar>
Scalar clamp_probability(Scalar p) {
  if (p < -Scalar(kNegativeProbabilityTolerance))
    throw NumericalError("negative probability from generating-function expansion");
  return std::clamp(p, Scalar(0), Scalar(1));
}

}  // namespace detail

/// <W1^k1 W2^k2>, i.e. the normally-ordered moment <a1^+k1 a1^k1 a2^+k2 a2^k2>.
template <typename Scalar>
Scalar intensity_moment(const TwoModeGaussianState<Scalar>& s, int k1, int k2,
                        const EngineConfig& cfg = {}) {
  detail::check_order(k1, k2, cfg);
  const auto g = generating_series(build_k_matrix(s), Scalar(0), Scalar(0), k1, k2);
  return detail::sign_pow<Scalar>(k1 + k2) * detail::factorial<Scalar>(k1) *
         detail::factorial<Scalar>(k2) * g(k1, k2);
}

template <typename Scalar>
Scalar pnd_element(const TwoModeGaussianState<Scalar>& s, int n1, int n2, const EngineConfig& cfg = {}) {
  detail::check_order(n1, n2, cfg);
  const auto g = generating_series(build_k_matrix(s), Scalar(1), Scalar(1), n1, n2);
  return detail::clamp_probability(detail::sign_pow<Scalar>(n1 + n2) * g(n1, n2));
}

/// n1! n2! p(n1, n2) / p(0, 0)
template <typename Scalar>
Scalar modified_pnd_element(const TwoModeGaussianState<Scalar>& s, int n1, int n2,
                            const EngineConfig& cfg = {}) {
  detail::check_order(n1, n2, cfg);
  const auto g = generating_series(build_k_matrix(s), Scalar(1), Scalar(1), n1, n2);
  if (!(g(0, 0) > 0)) throw NumericalError("p(0,0) vanishes");
  return detail::factorial<Scalar>(n1) * detail::factorial<Scalar>(n2) *
         detail::clamp_probability(detail::sign_pow<Scalar>(n1 + n2) * g(n1, n2)) / g(0, 0);
}

namespace detail {

// Univariate expansion of the marginal generating function of `mode`,
// about l_mode = at with the other variable set to 0.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> marginal_series(const KMatrix<Scalar>& k, int mode, Scalar at,
                                                        int order) {
  if (mode != 1 && mode != 2) throw std::invalid_argument("mode must be 1 or 2");
  if (mode == 1) return generating_series(k, at, Scalar(0), order, 0).coefficients().col(0);
  return generating_series(k, Scalar(0), at, 0, order).coefficients().row(0).transpose();
}

}  // namespace detail

/// n! p_j(n) / p_j(0) of the single-mode marginal distribution.
template <typename Scalar>
Scalar marginal_modified_pnd(const TwoModeGaussianState<Scalar>& s, int mode, int n,
                             const EngineConfig& cfg = {}) {
  detail::check_order(n, 0, cfg);
  const auto g = detail::marginal_series(build_k_matrix(s), mode, Scalar(1), n);
  if (!(g(0) > 0)) throw NumericalError("p_j(0) vanishes");
  return detail::factorial<Scalar>(n) *
         detail::clamp_probability(detail::sign_pow<Scalar>(n) * g(n)) / g(0);
}

template <typename Scalar>
Scalar marginal_pnd_element(const TwoModeGaussianState<Scalar>& s, int mode, int n,
                            const EngineConfig& cfg = {}) {
  detail::check_order(n, 0, cfg);
  const auto g = detail::marginal_series(build_k_matrix(s), mode, Scalar(1), n);
  return detail::clamp_probability(detail::sign_pow<Scalar>(n) * g(n));
}

/// Truncated joint photon-number distribution.
template <typename Scalar>
struct PhotonNumberDistribution {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Matrix p;              // p(n1, n2), 0 <= n1 <= n_max1, 0 <= n2 <= n_max2
  Scalar tail_mass{0};   // 1 - sum(p), clamped at 0

  int n_max1() const { return static_cast<int>(p.rows()) - 1; }
  int n_max2() const { return static_cast<int>(p.cols()) - 1; }
  Scalar operator()(int n1, int n2) const {
    return (n1 <= n_max1() && n2 <= n_max2()) ? p(n1, n2) : Scalar(0);
  }

  static PhotonNumberDistribution from_matrix(Matrix m) {
    PhotonNumberDistribution d;
    d.p = std::move(m);
    d.tail_mass = std::max(Scalar(0), Scalar(1) - d.p.sum());
    return d;
  }
};

struct PndOptions {
  double tail_tolerance = 1e-10;
  int initial_n_max = 16;
  int max_n_max = 4096;
};

/// Full distribution; the truncation box doubles until the tail mass drops
/// below tolerance.
template <typename Scalar>
PhotonNumberDistribution<Scalar> photon_number_distribution(const TwoModeGaussianState<Scalar>& s,
                                                            const PndOptions& opt = {}) {
  const auto k = build_k_matrix(s);
  for (int n = std::max(1, opt.initial_n_max);; n = std::min(2 * n, opt.max_n_max)) {
    const auto g = generating_series(k, Scalar(1), Scalar(1), n, n);
    typename PhotonNumberDistribution<Scalar>::Matrix m(n + 1, n + 1);
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j)
        m(i, j) = detail::clamp_probability(detail::sign_pow<Scalar>(i + j) * g(i, j));
    auto d = PhotonNumberDistribution<Scalar>::from_matrix(std::move(m));
    if (d.tail_mass < Scalar(opt.tail_tolerance)) return d;
    if (n >= opt.max_n_max)
      throw TruncationError("tail mass " + std::to_string(static_cast<double>(d.tail_mass)) +
                            " above tolerance at n_max = " + std::to_string(n));
  }
}

/// Fixed-box variant; never fails, the caller inspects tail_mass.
template <typename Scalar>
PhotonNumberDistribution<Scalar> photon_number_distribution(const TwoModeGaussianState<Scalar>& s,
                                                            int n_max) {
  if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");
  const auto g = generating_series(build_k_matrix(s), Scalar(1), Scalar(1), n_max, n_max);
  typename PhotonNumberDistribution<Scalar>::Matrix m(n_max + 1, n_max + 1);
  for (int i = 0; i <= n_max; ++i)
    for (int j = 0; j <= n_max; ++j)
      m(i, j) = detail::clamp_probability(detail::sign_pow<Scalar>(i + j) * g(i, j));
  return PhotonNumberDistribution<Scalar>::from_matrix(std::move(m));
}

/// Closed-form joint distribution of a noisy twin beam.
template <typename Scalar>
Scalar twin_beam_pnd_closed_form(const TwinBeamParams<Scalar>& params, int n1, int n2) {
  validate(params);
  if (n1 < 0 || n2 < 0) throw std::invalid_argument("photon numbers must be non-negative");
  const Scalar b1 = params.bp + params.bs + 1;
  const Scalar b2 = params.bp + params.bi + 1;
  const Scalar d2 = params.bp * (params.bp + 1);
  const Scalar kt = b1 * b2 - d2;
  const Scalar u1 = std::max(Scalar(0), 1 - b1 / kt);  // weight per unpaired mode-2 photon
  const Scalar u2 = std::max(Scalar(0), 1 - b2 / kt);  // weight per unpaired mode-1 photon
  const Scalar v = d2 / (kt * kt);
  const int mmax = std::min(n1, n2);

  auto ipow = [](Scalar base, int e) { return e == 0 ? Scalar(1) : std::pow(base, e); };

  if (n1 <= 50 && n2 <= 50) {
    Scalar acc = 0;
    Scalar binom1 = 1, binom2 = 1;  // C(n1, m), C(n2, m)
    for (int m = 0; m <= mmax; ++m) {
      if (m > 0) {
        binom1 = binom1 * (n1 - m + 1) / m;
        binom2 = binom2 * (n2 - m + 1) / m;
      }
      acc += binom1 * binom2 * ipow(u1, n2 - m) * ipow(u2, n1 - m) * ipow(v, m);
    }
    return acc / kt;
  }

  // Log domain; every term is non-negative.
  auto log_binom = [](int n, int k) {
    return std::lgamma(Scalar(n + 1)) - std::lgamma(Scalar(k + 1)) - std::lgamma(Scalar(n - k + 1));
  };
  auto log_pow = [](Scalar base, int e) -> Scalar {
    if (e == 0) return 0;
    if (base == 0) return -std::numeric_limits<Scalar>::infinity();
    return e * std::log(base);
  };
  Scalar lmax = -std::numeric_limits<Scalar>::infinity();
  std::vector<Scalar> logs;
  logs.reserve(mmax + 1);
  for (int m = 0; m <= mmax; ++m) {
    const Scalar l = log_binom(n1, m) + log_binom(n2, m) + log_pow(u1, n2 - m) +
                     log_pow(u2, n1 - m) + log_pow(v, m);
    logs.push_back(l);
    lmax = std::max(lmax, l);
  }
  if (!std::isfinite(lmax)) return 0;
  Scalar acc = 0;
  for (Scalar l : logs) acc += std::exp(l - lmax);
  return std::exp(lmax + std::log(acc)) / kt;
}

/// Moments and photon-number elements of one state up to a fixed total
/// order, computed once and shared by all criteria evaluated on that state.
template <typename Scalar>
class StatisticsTable {
 public:
  explicit StatisticsTable(const TwoModeGaussianState<Scalar>& s, const EngineConfig& cfg = {})
      : cfg_(cfg), k_(build_k_matrix(s)) {
    const int n = cfg.max_order;
    if (n < 0) throw std::invalid_argument("max_order must be non-negative");
    moments_ = generating_series(k_, Scalar(0), Scalar(0), n, n);
    pnd_ = generating_series(k_, Scalar(1), Scalar(1), n, n);
    marginal_[0] = detail::marginal_series(k_, 1, Scalar(1), n);
    marginal_[1] = detail::marginal_series(k_, 2, Scalar(1), n);
    factorials_.resize(n + 1);
    factorials_[0] = 1;
    for (int i = 1; i <= n; ++i) factorials_[i] = factorials_[i - 1] * i;
  }

  int max_order() const { return cfg_.max_order; }
  const KMatrix<Scalar>& k_matrix() const { return k_; }

  Scalar intensity_moment(int k1, int k2) const {
    detail::check_order(k1, k2, cfg_);
    return detail::sign_pow<Scalar>(k1 + k2) * factorials_[k1] * factorials_[k2] * moments_(k1, k2);
  }

  /// <W_j^k>
  Scalar marginal_moment(int mode, int k) const {
    return mode == 1 ? intensity_moment(k, 0) : intensity_moment(0, k);
  }

  Scalar pnd(int n1, int n2) const {
    detail::check_order(n1, n2, cfg_);
    return detail::clamp_probability(detail::sign_pow<Scalar>(n1 + n2) * pnd_(n1, n2));
  }

  Scalar modified_pnd(int n1, int n2) const {
    const Scalar p00 = pnd_(0, 0);
    if (!(p00 > 0)) throw NumericalError("p(0,0) vanishes");
    return factorials_[n1] * factorials_[n2] * pnd(n1, n2) / p00;
  }

  Scalar marginal_pnd(int mode, int n) const {
    detail::check_order(n, 0, cfg_);
    if (mode != 1 && mode != 2) throw std::invalid_argument("mode must be 1 or 2");
    return detail::clamp_probability(detail::sign_pow<Scalar>(n) * marginal_[mode - 1](n));
  }

  Scalar marginal_modified_pnd(int mode, int n) const {
    const Scalar p0 = marginal_pnd(mode, 0);
    if (!(p0 > 0)) throw NumericalError("p_j(0) vanishes");
    return factorials_[n] * marginal_pnd(mode, n) / p0;
  }

 private:
  EngineConfig cfg_;
  KMatrix<Scalar> k_;
  BivariateSeries<Scalar> moments_;
  BivariateSeries<Scalar> pnd_;
  std::array<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>, 2> marginal_;
  std::vector<Scalar> factorials_;
};

}  // namespace twinbeam
