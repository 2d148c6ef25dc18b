#pragma once

// Brute-force reference computations used to cross-check the generating
// function engine: factorial moments summed over a photon-number
// distribution, the Fock-space beam-splitter transform, and Bernoulli
// photodetection.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "twinbeam/errors.hpp"
#include "twinbeam/moments.hpp"
#include "twinbeam/state.hpp"

namespace twinbeam {

template <typename Scalar>
struct BoundedValue {
  Scalar value{0};
  Scalar error_bound{0};
};

/// <W1^k1 W2^k2> = sum p(n1,n2) n1!/(n1-k1)! n2!/(n2-k2)!. The bound
/// models the missing tail as geometric in n1 + n2 with the decay ratio
/// read off the last complete anti-diagonals.
template <typename Scalar>
BoundedValue<Scalar> factorial_moment_from_pnd(const PhotonNumberDistribution<Scalar>& pnd, int k1,
                                               int k2) {
  if (k1 < 0 || k2 < 0) throw std::invalid_argument("orders must be non-negative");
  auto falling = [](int n, int k) {
    Scalar f = 1;
    for (int i = 0; i < k; ++i) f *= Scalar(n - i);
    return f;
  };
  BoundedValue<Scalar> out;
  for (int n1 = k1; n1 <= pnd.n_max1(); ++n1)
    for (int n2 = k2; n2 <= pnd.n_max2(); ++n2) out.value += pnd.p(n1, n2) * falling(n1, k1) * falling(n2, k2);

  const Scalar tail = pnd.tail_mass;
  if (tail <= 0) return out;
  const int k = k1 + k2;
  const int n = std::min(pnd.n_max1(), pnd.n_max2());
  std::vector<Scalar> diag(n + 1, Scalar(0));
  for (int s = 0; s <= n; ++s)
    for (int a = 0; a <= s; ++a) diag[s] += pnd.p(a, s - a);
  Scalar q = 0;
  for (int s = std::max(1, n - 3); s <= n; ++s)
    if (diag[s - 1] > 0) q = std::max(q, diag[s] / diag[s - 1]);
  if (!(q < 1)) {
    out.error_bound = std::numeric_limits<Scalar>::infinity();
    return out;
  }
  // On the anti-diagonal n1 + n2 = s, n1^k1 n2^k2 <= c s^k.
  auto pw = [](Scalar x, int e) { return e == 0 ? Scalar(1) : std::pow(x, e); };
  const Scalar c = k == 0 ? Scalar(1) : pw(Scalar(k1), k1) * pw(Scalar(k2), k2) / pw(Scalar(k), k);
  // tail * (1-q) * sum_{s>n} q^(s-n-1) c s^k, summed until terms are negligible.
  Scalar acc = 0, weight = (1 - q) * c;
  for (int s = n + 1; s < n + 100000; ++s) {
    const Scalar term = weight * std::pow(Scalar(s), k);
    acc += term;
    if (term < acc * std::numeric_limits<Scalar>::epsilon()) break;
    weight *= q;
  }
  out.error_bound = 2 * tail * acc;
  return out;
}

/// Fock-space beam-splitter amplitudes <n1', n2'| U |n1, n2> for every
/// input with n1 + n2 <= cutoff. Photon number is conserved, so the entry
/// for total n is an (n+1) x (n+1) matrix indexed by (n1, n1').
/// Built once; read-only afterwards.
template <typename Scalar>
class BsCoefficientTable {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  BsCoefficientTable(Scalar t, int cutoff) : t_(t), cutoff_(cutoff) {
    if (!(t >= 0 && t <= 1)) throw std::invalid_argument("transmissivity must lie in [0, 1]");
    if (cutoff < 0) throw std::invalid_argument("cutoff must be non-negative");
    using W = detail::Wide<Scalar>;
    const W wt = t, wr = 1 - W(t);
    std::vector<W> lf(cutoff + 1);
    for (int i = 0; i <= cutoff; ++i) lf[i] = std::lgamma(W(i + 1));
    // log of sqrt(x)^e; -inf marks a vanishing factor.
    auto log_root_pow = [](W x, int e) -> W {
      if (e == 0) return 0;
      if (x <= 0) return -std::numeric_limits<W>::infinity();
      return W(0.5) * e * std::log(x);
    };
    tables_.resize(cutoff + 1);
    for (int n = 0; n <= cutoff; ++n) {
      Matrix m = Matrix::Zero(n + 1, n + 1);
      for (int n1 = 0; n1 <= n; ++n1) {
        const int n2 = n - n1;
        for (int o1 = 0; o1 <= n; ++o1) {
          const int o2 = n - o1;
          const W lnorm = W(0.5) * (lf[n1] + lf[n2] + lf[o1] + lf[o2]);
          W acc = 0;
          // k1 photons of mode 1 and k2 of mode 2 are transmitted.
          for (int k1 = 0; k1 <= n1; ++k1) {
            const int k2 = n2 + k1 - o1;
            if (k2 < 0 || k2 > n2) continue;
            const W l = lnorm - lf[k1] - lf[n1 - k1] - lf[k2] - lf[n2 - k2] +
                        log_root_pow(wr, n - k1 - k2) + log_root_pow(wt, k1 + k2);
            if (!std::isfinite(l)) continue;
            const W sign = ((n1 - k1) % 2 == 0) ? W(1) : W(-1);
            acc += sign * std::exp(l);
          }
          m(n1, o1) = static_cast<Scalar>(acc);
        }
      }
      tables_[n] = std::move(m);
    }
  }

  Scalar transmissivity() const { return t_; }
  int cutoff() const { return cutoff_; }

  /// Amplitude from (n1, n2) to (o1, o2); zero unless photon number is conserved.
  Scalar amplitude(int n1, int n2, int o1, int o2) const {
    const int n = n1 + n2;
    if (n1 < 0 || n2 < 0 || o1 < 0 || o2 < 0 || o1 + o2 != n) return 0;
    if (n > cutoff_) throw std::out_of_range("photon number beyond table cutoff");
    return tables_[n](n1, o1);
  }

  /// Transition probability |amplitude|^2.
  Scalar probability(int n1, int n2, int o1, int o2) const {
    const Scalar a = amplitude(n1, n2, o1, o2);
    return a * a;
  }

  const Matrix& block(int n) const { return tables_.at(n); }

 private:
  Scalar t_;
  int cutoff_;
  std::vector<Matrix> tables_;
};

inline constexpr int kDefaultOracleCutoff = 32;

/// Output distribution of a beam splitter fed with `pnd`. Output elements
/// with n1' + n2' <= N are exact when the input is complete on n1 + n2 <= N,
/// so the result is the triangle N = min(n_max1, n_max2); mass outside it
/// becomes tail and must stay below `tail_tolerance`.
template <typename Scalar>
PhotonNumberDistribution<Scalar> bs_transform_pnd(const PhotonNumberDistribution<Scalar>& pnd,
                                                  const BsCoefficientTable<Scalar>& table,
                                                  Scalar tail_tolerance = Scalar(1e-10)) {
  const int n = std::min({pnd.n_max1(), pnd.n_max2(), table.cutoff()});
  typename PhotonNumberDistribution<Scalar>::Matrix out =
      PhotonNumberDistribution<Scalar>::Matrix::Zero(n + 1, n + 1);
  for (int s = 0; s <= n; ++s) {
    const auto& b = table.block(s);
    for (int n1 = 0; n1 <= s; ++n1) {
      const Scalar p = pnd.p(n1, s - n1);
      if (p == 0) continue;
      for (int o1 = 0; o1 <= s; ++o1) out(o1, s - o1) += b(n1, o1) * b(n1, o1) * p;
    }
  }
  auto d = PhotonNumberDistribution<Scalar>::from_matrix(std::move(out));
  if (d.tail_mass > tail_tolerance)
    throw TruncationError("beam-splitter transform tail mass " + std::to_string(double(d.tail_mass)) +
                          " exceeds tolerance");
  return d;
}

template <typename Scalar>
PhotonNumberDistribution<Scalar> bs_transform_pnd(const PhotonNumberDistribution<Scalar>& pnd, Scalar t,
                                                  Scalar tail_tolerance = Scalar(1e-10),
                                                  int cutoff = kDefaultOracleCutoff) {
  const int n = std::min({pnd.n_max1(), pnd.n_max2(), cutoff});
  return bs_transform_pnd(pnd, BsCoefficientTable<Scalar>(t, n), tail_tolerance);
}

/// Each photon of mode j is kept with probability eta_j.
template <typename Scalar>
PhotonNumberDistribution<Scalar> bernoulli_downsample(const PhotonNumberDistribution<Scalar>& pnd,
                                                      Scalar eta1, Scalar eta2) {
  detail::require(eta1 >= 0 && eta1 <= 1 && eta2 >= 0 && eta2 <= 1, "efficiencies must lie in [0, 1]");
  using Matrix = typename PhotonNumberDistribution<Scalar>::Matrix;
  // kernel(n, m) = C(n, m) eta^m (1-eta)^(n-m)
  auto kernel = [](int nmax, Scalar eta) {
    Matrix k = Matrix::Zero(nmax + 1, nmax + 1);
    k(0, 0) = 1;
    for (int n = 1; n <= nmax; ++n)
      for (int m = 0; m <= n; ++m)
        k(n, m) = (m < n ? (1 - eta) * k(n - 1, m) : Scalar(0)) + (m > 0 ? eta * k(n - 1, m - 1) : Scalar(0));
    return k;
  };
  const Matrix k1 = kernel(pnd.n_max1(), eta1);
  const Matrix k2 = kernel(pnd.n_max2(), eta2);
  PhotonNumberDistribution<Scalar> d;
  d.p = k1.transpose() * pnd.p * k2;
  d.tail_mass = pnd.tail_mass;
  return d;
}

/// det(I + M diag(l1, l1, l2, l2)) with M the normally-ordered moment
/// matrix; equals the K-matrix quadratic form.
template <typename Scalar>
Scalar generating_polynomial_det(const TwoModeGaussianState<Scalar>& s, Scalar l1, Scalar l2) {
  using W = detail::Wide<Scalar>;
  using WC = std::complex<W>;
  auto wc = [](std::complex<Scalar> z) { return WC(z.real(), z.imag()); };
  ComplexMatrix4<W> m = moment_matrix<W>(s.b1(), s.b2(), wc(s.c1()), wc(s.c2()), wc(s.d12()), wc(s.dbar12()));
  const Eigen::Matrix<WC, 4, 1> l{WC(W(l1)), WC(W(l1)), WC(W(l2)), WC(W(l2))};
  const ComplexMatrix4<W> a = ComplexMatrix4<W>::Identity() + m * l.asDiagonal();
  return static_cast<Scalar>(a.determinant().real());
}

}  // namespace twinbeam
