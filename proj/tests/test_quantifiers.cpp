#include <doctest.h>

#include <cmath>
#include <functional>

#include "helpers.hpp"
#include "twinbeam/quantifiers.hpp"

using namespace twinbeam;
using TB = TwinBeamParams<double>;

namespace {

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12) {
  const bool pos_lo = f(lo) > 0;
  REQUIRE(pos_lo != (f(hi) > 0));
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    ((f(mid) > 0) == pos_lo ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("quantifiers") {

TEST_CASE("local quantifier") {
  CHECK(close(local_quantifier(twin_beam(TB{1, 0, 0}), 1), -1, 1e-15));
  CHECK(close(local_quantifier(beam_splitter_twin_beam(TB{1, 0, 0}, 0.5), 1), 1, 1e-14));
  CHECK(local_quantifier(State::vacuum(), 2) == 0);
  CHECK_THROWS_AS(local_quantifier(State::vacuum(), 0), std::invalid_argument);
  for (int k = 0; k <= 20; ++k) {
    const State s = beam_splitter_twin_beam(TB{0.7, 0, 0}, k / 20.0);
    CHECK(close(local_quantifier(s, 1), local_quantifier(s, 2), 1e-14));
  }
}

TEST_CASE("negativity") {
  CHECK(close(negativity(twin_beam(TB{1, 0, 0})), std::sqrt(2.0) + 1, 1e-12));
  CHECK(std::abs(negativity(twin_beam(TB{1, std::sqrt(2.0) - 1, std::sqrt(2.0) - 1}))) < 1e-12);
  CHECK(negativity(twin_beam(TB{0, 0, 0})) == 0);
  CHECK(negativity(twin_beam(TB{0, 0.5, 0.2})) == 0);
  CHECK(signed_negativity(twin_beam(TB{0, 0.5, 0.2})) < 0);
  for (int i = 0; i < 40; ++i) {
    const double bp = std::pow(10.0, -3 + 6.0 * i / 39);
    const double expected = std::sqrt(bp * (bp + 1)) + bp;
    // Rounding of the stored |D12| limits double precision near 1e-9.
    CHECK(close_rel(negativity(twin_beam(TB{bp, 0, 0})), expected, 1e-9));
    const long double lbp = bp;
    const long double lexp = std::sqrt(lbp * (lbp + 1)) + lbp;
    CHECK(std::abs(negativity(twin_beam(TwinBeamParams<long double>{lbp, 0, 0})) - lexp) / lexp < 1e-10L);
    CHECK(close_rel(log_negativity(twin_beam(TB{bp, 0, 0})), std::log1p(2 * expected), 1e-9));
  }
}

TEST_CASE("entanglement boundaries by bisection") {
  for (double bp : {0.1, 1.0, 10.0}) {
    const double balanced = bisect([bp](double x) { return signed_negativity(twin_beam(TB{bp, x, x})); }, 0, 1);
    CHECK(close(balanced, std::sqrt(bp * (bp + 1)) - bp, 1e-8));
    const double unbalanced = bisect([bp](double x) { return signed_negativity(twin_beam(TB{bp, x, 0})); }, 0, 3);
    CHECK(close(unbalanced, 1, 1e-8));
  }
}

TEST_CASE("balanced splitter output is separable") {
  for (double bp : {0.1, 1.0, 10.0}) {
    CHECK(negativity(beam_splitter_twin_beam(TB{bp, 0, 0}, 0.5)) < 1e-12);
    for (double dt : {1.5e-3, 0.01, 0.1, 0.3, 0.5}) {
      CHECK(negativity(beam_splitter_twin_beam(TB{bp, 0, 0}, 0.5 + dt)) > 0);
      CHECK(negativity(beam_splitter_twin_beam(TB{bp, 0, 0}, 0.5 - dt)) > 0);
    }
  }
}

TEST_CASE("classification") {
  const auto tw = classify(twin_beam(TB{1, 0, 0}));
  CHECK(tw.entangled);
  CHECK_FALSE(tw.locally_nonclassical_1);
  CHECK_FALSE(tw.locally_nonclassical_2);
  const auto half = classify(beam_splitter_twin_beam(TB{1, 0, 0}, 0.5));
  CHECK_FALSE(half.entangled);
  CHECK(half.locally_nonclassical_1);
  CHECK(half.locally_nonclassical_2);
  const auto vac = classify(State::vacuum());
  CHECK_FALSE(vac.entangled);
  CHECK_FALSE(vac.locally_nonclassical_1);
  CHECK_FALSE(vac.locally_nonclassical_2);
  CHECK(vac.negativity == 0);
}

}
