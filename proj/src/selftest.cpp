#include "twinbeam/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <utility>

#include "twinbeam/criteria.hpp"
#include "twinbeam/oracle.hpp"
#include "twinbeam/quantifiers.hpp"

namespace twinbeam {

namespace {

std::string describe(const char* what, double worst, double limit) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s %.3g (limit %.3g)", what, worst, limit);
  return buf;
}

double rel_err(double v, double ref) { return std::abs(v - ref) / std::max(std::abs(ref), 1e-300); }

CheckResult noiseless_closed_forms() {
  const CriterionId ids[] = {{Family::EW, 0, 0}, {Family::EW, 1, 1}, {Family::EW, 2, 2}, {Family::EW, 0, 1},
                             {Family::EW, 0, 2}, {Family::MW},       {Family::Ep, 0, 0}, {Family::Ep, 1, 1},
                             {Family::Ep, 2, 2}, {Family::Ep, 0, 2}, {Family::Mp}};
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    const double bp = std::pow(10.0, -3 + 6.0 * i / 19);
    const StatisticsTable<double> t(twin_beam(TwinBeamParams<double>{bp, 0, 0}), EngineConfig{6});
    for (const auto& id : ids) worst = std::max(worst, rel_err(evaluate(t, id).value, closed_form_noiseless(id, bp)));
  }
  return {"closed forms, noiseless twin beam", worst < 1e-8, describe("max rel err", worst, 1e-8)};
}

CheckResult splitter_closed_forms() {
  const CriterionId ids[] = {{Family::Ep, 0, 0}, {Family::Ep, 1, 1}, {Family::Ep, 2, 2}, {Family::Ep, 0, 2},
                             {Family::Mp}};
  double worst = 0;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      const double bp = std::pow(10.0, -2 + 3.0 * i / 9), t = j / 9.0;
      const StatisticsTable<double> tab(beam_splitter_twin_beam(TwinBeamParams<double>{bp, 0, 0}, t),
                                        EngineConfig{6});
      for (const auto& id : ids) {
        const double ref = closed_form_bs_output(id, bp, t);
        // Closed forms with a vanishing TR factor are compared absolutely.
        const double err = std::abs(ref) < 1e-12 ? std::abs(evaluate(tab, id).value) : rel_err(evaluate(tab, id).value, ref);
        worst = std::max(worst, err);
      }
    }
  return {"closed forms, beam-splitter output", worst < 1e-8, describe("max rel err", worst, 1e-8)};
}

// Box of the closed-form twin-beam distribution large enough for the
// transform's triangle to miss less than 1e-12 of the mass.
PhotonNumberDistribution<double> closed_form_box(const TwinBeamParams<double>& p) {
  for (int n = 16;; n += 16) {
    typename PhotonNumberDistribution<double>::Matrix m(n + 1, n + 1);
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) m(i, j) = twin_beam_pnd_closed_form(p, i, j);
    double triangle = 0;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; i + j <= n; ++j) triangle += m(i, j);
    if (1 - triangle < 1e-12 || n >= 160) return PhotonNumberDistribution<double>::from_matrix(std::move(m));
  }
}

CheckResult oracle_pnd() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int draw = 0; draw < 5; ++draw) {
    const TwinBeamParams<double> p{0.05 + 0.95 * u(rng), 0.5 * u(rng), 0.5 * u(rng)};
    const double t = u(rng);
    const auto box = closed_form_box(p);
    const auto out = bs_transform_pnd(box, t, 1e-10, box.n_max1());
    const auto engine = photon_number_distribution(beam_splitter_twin_beam(p, t), 8);
    for (int i = 0; i <= 8; ++i)
      for (int j = 0; j <= 8; ++j) worst = std::max(worst, std::abs(out(i, j) - engine(i, j)));
  }
  return {"Fock beam-splitter transform vs engine", worst < 1e-8, describe("max abs err", worst, 1e-8)};
}

CheckResult oracle_moments() {
  const State s = beam_splitter_twin_beam(TwinBeamParams<double>{0.7, 0.2, 0.1}, 0.3);
  const auto pnd = photon_number_distribution(s, PndOptions{1e-13, 32, 4096});
  double worst = 0;
  bool ok = true;
  for (int k1 = 0; k1 <= 6; ++k1)
    for (int k2 = 0; k1 + k2 <= 6; ++k2) {
      const auto f = factorial_moment_from_pnd(pnd, k1, k2);
      const double m = intensity_moment(s, k1, k2);
      const double err = std::abs(f.value - m);
      ok = ok && err <= f.error_bound + 1e-10 * std::abs(m);
      worst = std::max(worst, rel_err(f.value, m));
    }
  return {"factorial moments vs intensity moments", ok, describe("max rel err", worst, 1e-7)};
}

CheckResult detection_equivalence() {
  const State s = twin_beam(TwinBeamParams<double>{1, 0, 0});
  const auto before = photon_number_distribution(s, 80);
  const auto down = bernoulli_downsample(before, 0.5, 0.5);
  const auto direct = photon_number_distribution(attenuate(s, 0.5), 80);
  const double worst = (down.p - direct.p).cwiseAbs().maxCoeff();
  return {"Bernoulli detection vs attenuation", worst < 1e-9, describe("max abs err", worst, 1e-9)};
}

CheckResult negativity_formula() {
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    const long double bp = std::pow(10.0L, -3 + 6.0L * i / 19);
    const long double n = negativity(twin_beam(TwinBeamParams<long double>{bp, 0, 0}));
    worst = std::max(worst, double(std::abs(n - (std::sqrt(bp * (bp + 1)) + bp)) / n));
  }
  return {"negativity of noiseless twin beams", worst < 1e-10, describe("max rel err", worst, 1e-10)};
}

}  // namespace

std::vector<CheckResult> run_selftest() {
  using Check = CheckResult (*)();
  const std::pair<const char*, Check> checks[] = {
      {"closed forms, noiseless twin beam", noiseless_closed_forms},
      {"closed forms, beam-splitter output", splitter_closed_forms},
      {"Fock beam-splitter transform vs engine", oracle_pnd},
      {"factorial moments vs intensity moments", oracle_moments},
      {"Bernoulli detection vs attenuation", detection_equivalence},
      {"negativity of noiseless twin beams", negativity_formula}};
  std::vector<CheckResult> out;
  for (const auto& [name, check] : checks) {
    try {
      out.push_back(check());
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("threw: ") + e.what()});
    }
  }
  return out;
}

}  // namespace twinbeam
