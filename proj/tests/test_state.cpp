#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "twinbeam/quantifiers.hpp"
#include "twinbeam/state.hpp"

using namespace twinbeam;
using C = std::complex<double>;
using TB = TwinBeamParams<double>;
using BS = BeamSplitterParams<double>;

namespace {

void check_same(const State& a, const State& b, double tol) {
  CHECK(close(a.b1(), b.b1(), tol));
  CHECK(close(a.b2(), b.b2(), tol));
  CHECK(close(a.c1(), b.c1(), tol));
  CHECK(close(a.c2(), b.c2(), tol));
  CHECK(close(a.d12(), b.d12(), tol));
  CHECK(close(a.dbar12(), b.dbar12(), tol));
}

}  // namespace

TEST_SUITE("state") {

TEST_CASE("twin beam parameters") {
  const State vac = twin_beam(TB{0, 0, 0});
  CHECK(vac.b1() == 0);
  CHECK(vac.b2() == 0);
  CHECK(vac.d12() == C(0));

  const State s = twin_beam(TB{1, 0, 0});
  CHECK(s.b1() == 1);
  CHECK(s.b2() == 1);
  CHECK(close(s.d12(), C(0, std::sqrt(2.0)), 1e-15));
  CHECK(s.c1() == C(0));
  CHECK(s.c2() == C(0));
  CHECK(s.dbar12() == C(0));

  const State n = twin_beam(TB{0.5, 0.2, 0.1});
  CHECK(close(n.b1(), 0.7, 1e-15));
  CHECK(close(n.b2(), 0.6, 1e-15));
  CHECK(close(std::norm(n.d12()), 0.75, 1e-15));
}

TEST_CASE("twin beam rejects bad input") {
  CHECK_THROWS_AS(twin_beam(TB{-1, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(twin_beam(TB{1, -0.1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(twin_beam(TB{std::nan(""), 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(twin_beam(TB{HUGE_VAL, 0, 0}), std::invalid_argument);
}

TEST_CASE("physicality") {
  CHECK(is_physical(0.0, 0.0, C(0), C(0), C(0), C(0)));
  // |D|^2 = B(B+1) is the pure twin beam; anything larger breaks the uncertainty relation.
  CHECK(is_physical(1.0, 1.0, C(0), C(0), C(0, std::sqrt(2.0)), C(0)));
  CHECK_FALSE(is_physical(1.0, 1.0, C(0), C(0), C(0, 1.5), C(0)));
  // Single-mode squeezing needs |C|^2 <= B(B+1).
  CHECK(is_physical(1.0, 0.0, C(std::sqrt(2.0)), C(0), C(0), C(0)));
  CHECK_FALSE(is_physical(1.0, 0.0, C(1.5), C(0), C(0), C(0)));
  CHECK_FALSE(is_physical(-1.0, 0.0, C(0), C(0), C(0), C(0)));
  CHECK_THROWS_AS(State(1, 1, C(0), C(0), C(0, 1.5), C(0)), std::invalid_argument);
  CHECK_THROWS_AS(State(1, 1, C(0), C(0), C(std::nan("")), C(0)), std::invalid_argument);
}

TEST_CASE("symplectic eigenvalues") {
  const auto vac = symplectic_eigenvalues(State::vacuum().symmetric_covariance());
  CHECK(close(vac(0), 0.5, 1e-15));
  CHECK(close(vac(1), 0.5, 1e-15));
  // Pure states stay at 1/2, thermal ones sit at B + 1/2.
  for (double bp : {1e-3, 1.0, 1e3}) {
    const auto nu = symplectic_eigenvalues(twin_beam(TB{bp, 0, 0}).symmetric_covariance());
    CHECK(close(nu(0), 0.5, 1e-9 * (1 + bp)));
    CHECK(close(nu(1), 0.5, 1e-9 * (1 + bp)));
  }
  const auto th = symplectic_eigenvalues(twin_beam(TB{0, 2, 3}).symmetric_covariance());
  CHECK(close(th(0), 2.5, 1e-12));
  CHECK(close(th(1), 3.5, 1e-12));
  CHECK_THROWS_AS(symplectic_eigenvalues(Matrix4<double>(-Matrix4<double>::Identity())), std::invalid_argument);
}

TEST_CASE("normally-ordered covariance layout") {
  CHECK(covariance_n(State::vacuum()).isZero());
  const auto a = covariance_n(twin_beam(TB{1, 0, 0}));
  for (int i = 0; i < 4; ++i) CHECK(a(i, i) == C(-1));
  const C d(0, std::sqrt(2.0));
  CHECK(close(a(0, 3), d, 1e-15));
  CHECK(close(a(1, 2), std::conj(d), 1e-15));
  CHECK(close(a(2, 1), d, 1e-15));
  CHECK(close(a(3, 0), std::conj(d), 1e-15));

  const State s(0.9, 0.7, C(0.2, 0.1), C(-0.1, 0.05), C(0.3, 0.4), C(0.1, -0.2));
  const auto m = covariance_n(s);
  CHECK(m(0, 1) == s.c1());
  CHECK(m(1, 0) == std::conj(s.c1()));
  CHECK(m(0, 2) == std::conj(s.dbar12()));
  CHECK(m(2, 0) == s.dbar12());
  check_same(state_from_covariance_n(m), s, 0);
  auto broken = m;
  broken(1, 0) += C(0.5);
  CHECK_THROWS_AS(state_from_covariance_n(broken), std::invalid_argument);
}

TEST_CASE("beam splitter on twin beams") {
  const State in = twin_beam(TB{1, 0, 0});
  check_same(beam_splitter(in, BS{1}), in, 1e-15);

  const State half = beam_splitter(in, BS{0.5});
  CHECK(close(half.d12(), C(0), 1e-15));
  CHECK(close(half.c1(), C(0, std::sqrt(2.0)), 1e-15));
  CHECK(close(half.c2(), C(0, -std::sqrt(2.0)), 1e-15));

  const State noisy = beam_splitter(twin_beam(TB{0.5, 0.3, 0.1}), BS{0.7});
  CHECK(close(noisy.dbar12(), C(std::sqrt(0.21) * 0.2), 1e-15));
  CHECK(close(noisy.dbar12().real(), 0.0916515, 1e-7));

  // Congruence and closed form agree.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 50; ++i) {
    const TB p{3 * u(rng), u(rng), u(rng)};
    const double t = u(rng);
    check_same(beam_splitter(twin_beam(p), BS{t}), beam_splitter_twin_beam(p, t), 1e-12 * (1 + p.bp));
  }
  CHECK_THROWS_AS(beam_splitter(in, BS{1.5}), std::invalid_argument);
  CHECK_THROWS_AS(beam_splitter(in, BS{-0.1}), std::invalid_argument);
  CHECK_THROWS_AS(beam_splitter_twin_beam(TB{1, 0, 0}, 2.0), std::invalid_argument);
}

TEST_CASE("beam splitter is invertible") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 50; ++i) {
    const State s = beam_splitter(twin_beam(TB{2 * u(rng), u(rng), u(rng)}), BS{u(rng), 6 * u(rng)});
    const BS p{u(rng), 6 * u(rng)};
    check_same(beam_splitter(beam_splitter(s, p), p.inverse()), s, 1e-12);
  }
}

TEST_CASE("two balanced splitters swap the modes") {
  const State s = twin_beam(TB{0.8, 0.4, 0.1});
  const State w = beam_splitter(beam_splitter(s, BS{0.5}), BS{0.5});
  CHECK(close(w.b1(), s.b2(), 1e-12));
  CHECK(close(w.b2(), s.b1(), 1e-12));
  CHECK(close(std::abs(w.d12()), std::abs(s.d12()), 1e-12));
  CHECK(close(std::abs(w.c1()), std::abs(s.c2()), 1e-12));
}

TEST_CASE("balanced splitter maximises single-mode squeezing") {
  for (double bp : {0.1, 1.0, 10.0}) {
    const double at_half = local_quantifier(beam_splitter_twin_beam(TB{bp, 0, 0}, 0.5), 1);
    for (int k = 0; k <= 10; ++k)
      CHECK(local_quantifier(beam_splitter_twin_beam(TB{bp, 0, 0}, k / 10.0), 1) <= at_half + 1e-12);
  }
}

TEST_CASE("attenuation") {
  const State s = beam_splitter_twin_beam(TB{0.9, 0.2, 0.3}, 0.35);
  check_same(attenuate(s, 1.0), s, 0);
  const State h = attenuate(twin_beam(TB{1, 0, 0}), 0.5);
  CHECK(close(h.b1(), 0.5, 1e-15));
  CHECK(close(h.b2(), 0.5, 1e-15));
  CHECK(close(std::norm(h.d12()), 0.5, 1e-15));
  const State z = attenuate(s, 0.0);
  CHECK(z.b1() == 0);
  CHECK(std::abs(z.d12()) == 0);
  for (double e1 : {0.1, 0.5, 0.9})
    for (double e2 : {0.2, 0.7, 1.0}) check_same(attenuate(attenuate(s, e1), e2), attenuate(s, e1 * e2), 1e-12);
  check_same(attenuate(attenuate(s, 0.3, 0.6), 0.5, 0.2), attenuate(s, 0.15, 0.12), 1e-12);
  CHECK_THROWS_AS(attenuate(s, 1.1), std::invalid_argument);
  CHECK_THROWS_AS(attenuate(s, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(attenuate(s, 0.5, std::nan("")), std::invalid_argument);
}

TEST_CASE("extended-precision instantiation") {
  using L = long double;
  const auto s = twin_beam(TwinBeamParams<L>{1, 0, 0});
  CHECK(std::abs(std::abs(s.d12()) - std::sqrt(2.0L)) < 1e-18L);
  const auto d = s.cast<double>();
  CHECK(close(std::abs(d.d12()), std::sqrt(2.0), 1e-15));
}

}
