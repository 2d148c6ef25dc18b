#pragma once

// Two-mode Gaussian states in the normally-ordered parametrisation
// (B1, B2, C1, C2, D12, Dbar12) and the transformations acting on them.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace twinbeam {

namespace detail {

// Extended precision used for a handful of cancellation-prone reductions.
template <typename Scalar>
using Wide = std::conditional_t<(sizeof(Scalar) < sizeof(long double)), long double, Scalar>;

template <typename Scalar>
inline bool finite(const std::complex<Scalar>& z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace detail

template <typename Scalar>
using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;
template <typename Scalar>
using ComplexMatrix4 = Eigen::Matrix<std::complex<Scalar>, 4, 4>;

/// Normally-ordered moment matrix M_ij = <v_i v_j^*> of the P-function
/// variables v = (a1, a1*, a2, a2*).
template <typename Scalar>
ComplexMatrix4<Scalar> moment_matrix(Scalar b1, Scalar b2, std::complex<Scalar> c1,
                                     std::complex<Scalar> c2, std::complex<Scalar> d12,
                                     std::complex<Scalar> dbar12) {
  using std::conj;
  ComplexMatrix4<Scalar> m;
  m << b1, c1, -conj(dbar12), d12,
       conj(c1), b1, conj(d12), -dbar12,
       -dbar12, d12, b2, c2,
       conj(d12), -conj(dbar12), conj(c2), b2;
  return m;
}

/// Symmetrically-ordered quadrature covariance matrix, ordering (q1, p1, q2, p2),
/// vacuum variance 1/2.
template <typename Scalar>
Matrix4<Scalar> symmetric_covariance_from_moments(const ComplexMatrix4<Scalar>& moments) {
  using Complex = std::complex<Scalar>;
  const Scalar h = Scalar(1) / std::sqrt(Scalar(2));
  ComplexMatrix4<Scalar> omega = ComplexMatrix4<Scalar>::Zero();
  for (int j = 0; j < 2; ++j) {
    omega(2 * j, 2 * j) = Complex(h, 0);
    omega(2 * j, 2 * j + 1) = Complex(h, 0);
    omega(2 * j + 1, 2 * j) = Complex(0, -h);
    omega(2 * j + 1, 2 * j + 1) = Complex(0, h);
  }
  const ComplexMatrix4<Scalar> sym =
      moments + ComplexMatrix4<Scalar>::Identity() * Complex(Scalar(0.5), 0);
  Matrix4<Scalar> sigma = (omega * sym * omega.adjoint()).real();
  return (sigma + sigma.transpose()) * Scalar(0.5);
}

/// Symplectic eigenvalues (ascending) of a positive-definite 4x4 covariance.
/// Computed as the moduli of the eigenvalues of the Hermitian matrix
/// sigma^{1/2} (i J) sigma^{1/2}, which keeps small eigenvalues accurate for
/// strongly squeezed states.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> symplectic_eigenvalues(const Matrix4<Scalar>& sigma) {
  using W = detail::Wide<Scalar>;
  using WC = std::complex<W>;
  const Matrix4<W> s = sigma.template cast<W>();
  Eigen::SelfAdjointEigenSolver<Matrix4<W>> es(s);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= W(0))
    throw std::invalid_argument("covariance matrix is not positive definite");
  const Matrix4<W> root = es.operatorSqrt();
  ComplexMatrix4<W> ij = ComplexMatrix4<W>::Zero();
  for (int j = 0; j < 2; ++j) {
    ij(2 * j, 2 * j + 1) = WC(0, 1);
    ij(2 * j + 1, 2 * j) = WC(0, -1);
  }
  const ComplexMatrix4<W> rc = root.template cast<WC>();
  const ComplexMatrix4<W> h = rc * ij * rc;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix4<W>> hs(h, Eigen::EigenvaluesOnly);
  // Spectrum is {-nu+, -nu-, nu-, nu+}.
  const auto ev = hs.eigenvalues();
  Eigen::Matrix<Scalar, 2, 1> nu;
  nu(0) = static_cast<Scalar>((ev(2) - ev(1)) / W(2));
  nu(1) = static_cast<Scalar>((ev(3) - ev(0)) / W(2));
  return nu;
}

inline constexpr double kPhysicalityTolerance = 1e-9;

template <typename Scalar>
bool is_physical(Scalar b1, Scalar b2, std::complex<Scalar> c1, std::complex<Scalar> c2,
                 std::complex<Scalar> d12, std::complex<Scalar> dbar12) {
  if (!std::isfinite(b1) || !std::isfinite(b2) || !detail::finite(c1) || !detail::finite(c2) ||
      !detail::finite(d12) || !detail::finite(dbar12))
    return false;
  if (b1 < 0 || b2 < 0) return false;
  using W = detail::Wide<Scalar>;
  using WC = std::complex<W>;
  auto wc = [](std::complex<Scalar> z) { return WC(z.real(), z.imag()); };
  const Matrix4<W> sigma = symmetric_covariance_from_moments<W>(
      moment_matrix<W>(b1, b2, wc(c1), wc(c2), wc(d12), wc(dbar12)));
  // One-ulp changes of the stored parameters move nu- by about eps * scale^2.
  const W scale = W(1) + W(b1) + W(b2);
  const W slack = W(kPhysicalityTolerance) + W(64) * W(std::numeric_limits<Scalar>::epsilon()) * scale * scale;
  try {
    const auto nu = symplectic_eigenvalues<W>(sigma);
    return nu(0) >= W(0.5) - slack;
  } catch (const std::invalid_argument&) {
    // sigma singular at working precision; only undecidable states pass.
    if (slack < W(0.5)) return false;
    Eigen::SelfAdjointEigenSolver<Matrix4<W>> es(sigma, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0) >= -W(64) * std::numeric_limits<W>::epsilon() * es.eigenvalues()(3);
  }
}

/// Zero-mean two-mode Gaussian state. Immutable; construction rejects
/// parameter sets violating the uncertainty relation.
template <typename Scalar>
class TwoModeGaussianState {
 public:
  using Complex = std::complex<Scalar>;

  TwoModeGaussianState() = default;

  TwoModeGaussianState(Scalar b1, Scalar b2, Complex c1, Complex c2, Complex d12, Complex dbar12)
      : b1_(b1), b2_(b2), c1_(c1), c2_(c2), d12_(d12), dbar12_(dbar12) {
    detail::require(b1 >= 0 && b2 >= 0, "mean photon numbers must be non-negative");
    detail::require(is_physical(b1, b2, c1, c2, d12, dbar12),
                    "parameters do not describe a physical Gaussian state");
  }

  static TwoModeGaussianState vacuum() { return {}; }

  Scalar b1() const { return b1_; }
  Scalar b2() const { return b2_; }
  Complex c1() const { return c1_; }
  Complex c2() const { return c2_; }
  Complex d12() const { return d12_; }
  Complex dbar12() const { return dbar12_; }

  Scalar b(int mode) const { return mode == 1 ? b1_ : b2_; }
  Complex c(int mode) const { return mode == 1 ? c1_ : c2_; }

  ComplexMatrix4<Scalar> moments() const { return moment_matrix(b1_, b2_, c1_, c2_, d12_, dbar12_); }

  Matrix4<Scalar> symmetric_covariance() const {
    return symmetric_covariance_from_moments<Scalar>(moments());
  }

  /// Same covariance assembled in extended precision.
  Matrix4<detail::Wide<Scalar>> symmetric_covariance_wide() const {
    using W = detail::Wide<Scalar>;
    using WC = std::complex<W>;
    auto wc = [](Complex z) { return WC(z.real(), z.imag()); };
    return symmetric_covariance_from_moments<W>(
        moment_matrix<W>(b1_, b2_, wc(c1_), wc(c2_), wc(d12_), wc(dbar12_)));
  }

  template <typename Other>
  TwoModeGaussianState<Other> cast() const {
    using OC = std::complex<Other>;
    auto cc = [](Complex z) { return OC(static_cast<Other>(z.real()), static_cast<Other>(z.imag())); };
    return {static_cast<Other>(b1_), static_cast<Other>(b2_), cc(c1_), cc(c2_), cc(d12_), cc(dbar12_)};
  }

 private:
  Scalar b1_{0};
  Scalar b2_{0};
  Complex c1_{0};
  Complex c2_{0};
  Complex d12_{0};
  Complex dbar12_{0};
};

using State = TwoModeGaussianState<double>;

template <typename Scalar>
struct TwinBeamParams {
  Scalar bp{0};  // mean photon-pair number
  Scalar bs{0};  // signal noise
  Scalar bi{0};  // idler noise
};

template <typename Scalar>
struct BeamSplitterParams {
  Scalar t{1};
  Scalar phi{0};

  Scalar reflectance() const { return Scalar(1) - t; }
  BeamSplitterParams inverse() const { return {t, phi + std::numbers::pi_v<Scalar>}; }
};

template <typename Scalar>
void validate(const TwinBeamParams<Scalar>& p) {
  detail::require(std::isfinite(p.bp) && std::isfinite(p.bs) && std::isfinite(p.bi),
                  "twin-beam parameters must be finite");
  detail::require(p.bp >= 0 && p.bs >= 0 && p.bi >= 0, "twin-beam parameters must be non-negative");
}

template <typename Scalar>
void validate(const BeamSplitterParams<Scalar>& p) {
  detail::require(std::isfinite(p.t) && p.t >= 0 && p.t <= 1, "transmissivity must lie in [0, 1]");
  detail::require(std::isfinite(p.phi), "beam-splitter phase must be finite");
}

template <typename Scalar>
TwoModeGaussianState<Scalar> twin_beam(const TwinBeamParams<Scalar>& p) {
  validate(p);
  using Complex = std::complex<Scalar>;
  const Scalar pair = std::sqrt(p.bp * (p.bp + 1));
  return {p.bp + p.bs, p.bp + p.bi, Complex(0), Complex(0), Complex(0, pair), Complex(0)};
}

/// Normally-ordered covariance A_N in the ordering (beta1, beta1*, beta2, beta2*).
template <typename Scalar>
ComplexMatrix4<Scalar> covariance_n(const TwoModeGaussianState<Scalar>& s) {
  using std::conj;
  ComplexMatrix4<Scalar> a;
  a << -s.b1(), s.c1(), conj(s.dbar12()), s.d12(),
       conj(s.c1()), -s.b1(), conj(s.d12()), s.dbar12(),
       s.dbar12(), s.d12(), -s.b2(), s.c2(),
       conj(s.d12()), conj(s.dbar12()), conj(s.c2()), -s.b2();
  return a;
}

/// Inverse of covariance_n; rejects matrices that break the block pattern.
template <typename Scalar>
TwoModeGaussianState<Scalar> state_from_covariance_n(const ComplexMatrix4<Scalar>& a,
                                                     Scalar tol = Scalar(1e-12)) {
  const Scalar b1 = -a(0, 0).real();
  const Scalar b2 = -a(2, 2).real();
  const auto c1 = a(0, 1), c2 = a(2, 3), d12 = a(0, 3), dbar12 = a(2, 0);
  TwoModeGaussianState<Scalar> s(b1, b2, c1, c2, d12, dbar12);
  const Scalar scale = std::max<Scalar>(Scalar(1), a.cwiseAbs().maxCoeff());
  detail::require((covariance_n(s) - a).cwiseAbs().maxCoeff() <= tol * scale,
                  "matrix does not have the normally-ordered covariance pattern");
  return s;
}

/// Unitary acting on (beta1, beta1*, beta2, beta2*).
template <typename Scalar>
ComplexMatrix4<Scalar> beam_splitter_matrix(const BeamSplitterParams<Scalar>& p) {
  using Complex = std::complex<Scalar>;
  const Scalar st = std::sqrt(p.t);
  const Scalar sr = std::sqrt(p.reflectance());
  const Complex e = std::polar(Scalar(1), p.phi);
  ComplexMatrix4<Scalar> u = ComplexMatrix4<Scalar>::Zero();
  u(0, 0) = st;
  u(0, 2) = -sr * e;
  u(1, 1) = st;
  u(1, 3) = -sr * std::conj(e);
  u(2, 0) = sr * std::conj(e);
  u(2, 2) = st;
  u(3, 1) = sr * e;
  u(3, 3) = st;
  return u;
}

template <typename Scalar>
TwoModeGaussianState<Scalar> beam_splitter(const TwoModeGaussianState<Scalar>& s,
                                           const BeamSplitterParams<Scalar>& p) {
  validate(p);
  const ComplexMatrix4<Scalar> u = beam_splitter_matrix(p);
  const ComplexMatrix4<Scalar> out = u.adjoint() * covariance_n(s) * u;
  using Complex = std::complex<Scalar>;
  // Diagonal entries are real by construction; drop rounding residue.
  return {std::max(Scalar(0), -out(0, 0).real()), std::max(Scalar(0), -out(2, 2).real()),
          out(0, 1), out(2, 3), out(0, 3), Complex(out(2, 0))};
}

/// Closed-form output of a noisy twin beam behind a phase-free beam splitter.
template <typename Scalar>
TwoModeGaussianState<Scalar> beam_splitter_twin_beam(const TwinBeamParams<Scalar>& p, Scalar t) {
  validate(p);
  validate(BeamSplitterParams<Scalar>{t, 0});
  using Complex = std::complex<Scalar>;
  const Scalar r = 1 - t;
  const Scalar pair = std::sqrt(p.bp * (p.bp + 1));
  const Scalar mix = std::sqrt(t * r);
  return {t * p.bs + p.bp + r * p.bi,
          t * p.bi + p.bp + r * p.bs,
          Complex(0, 2 * mix * pair),
          Complex(0, -2 * mix * pair),
          Complex(0, (2 * t - 1) * pair),
          Complex(mix * (p.bs - p.bi))};
}

/// Loss channel with per-mode efficiencies (Bernoulli photodetection).
template <typename Scalar>
TwoModeGaussianState<Scalar> attenuate(const TwoModeGaussianState<Scalar>& s, Scalar eta1,
                                       Scalar eta2) {
  detail::require(std::isfinite(eta1) && std::isfinite(eta2) && eta1 >= 0 && eta1 <= 1 &&
                      eta2 >= 0 && eta2 <= 1,
                  "efficiencies must lie in [0, 1]");
  const Scalar cross = std::sqrt(eta1 * eta2);
  return {eta1 * s.b1(), eta2 * s.b2(), eta1 * s.c1(), eta2 * s.c2(), cross * s.d12(),
          cross * s.dbar12()};
}

template <typename Scalar>
TwoModeGaussianState<Scalar> attenuate(const TwoModeGaussianState<Scalar>& s, Scalar eta) {
  return attenuate(s, eta, eta);
}

}  // namespace twinbeam
