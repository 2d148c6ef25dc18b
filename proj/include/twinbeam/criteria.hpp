#pragma once

// Global (two-mode) and local (single-mode) non-classicality criteria in
// intensity-moment and photon-number form. A negative value certifies
// non-classicality.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "twinbeam/moments.hpp"
#include "twinbeam/state.hpp"

namespace twinbeam {

enum class Family { EW, Ep, MW, Mp, RW, Rp };

/// E-family: (k1, k2). R-family: (k, l) in (k1, k2), plus the mode.
struct CriterionId {
  Family family{Family::EW};
  int k1{0};
  int k2{0};
  int mode{1};

  friend bool operator==(const CriterionId&, const CriterionId&) = default;
};

inline bool uses_moments(Family f) { return f == Family::EW || f == Family::MW || f == Family::RW; }
inline bool is_local(Family f) { return f == Family::RW || f == Family::Rp; }

inline void validate(const CriterionId& id) {
  if (id.k1 < 0 || id.k2 < 0) throw std::invalid_argument("criterion indices must be non-negative");
  if (is_local(id.family)) {
    if (id.k2 < 1) throw std::invalid_argument("R criteria require l >= 1");
    if (id.mode != 1 && id.mode != 2) throw std::invalid_argument("mode must be 1 or 2");
  }
}

inline std::string family_name(Family f) {
  switch (f) {
    case Family::EW: return "E_W";
    case Family::Ep: return "E_p";
    case Family::MW: return "M_W";
    case Family::Mp: return "M_p";
    case Family::RW: return "R_W";
    case Family::Rp: return "R_p";
  }
  return "?";
}

inline Family parse_family(std::string_view s) {
  for (Family f : {Family::EW, Family::Ep, Family::MW, Family::Mp, Family::RW, Family::Rp})
    if (family_name(f) == s) return f;
  throw std::invalid_argument("unknown criterion family '" + std::string(s) + "'");
}

/// E_W_0_2, M_p, R_p1_2_2 ...
inline std::string to_string(const CriterionId& id) {
  switch (id.family) {
    case Family::MW:
    case Family::Mp: return family_name(id.family);
    case Family::EW:
    case Family::Ep:
      return family_name(id.family) + "_" + std::to_string(id.k1) + "_" + std::to_string(id.k2);
    case Family::RW:
    case Family::Rp:
      return family_name(id.family) + std::to_string(id.mode) + "_" + std::to_string(id.k1) + "_" +
             std::to_string(id.k2);
  }
  return "?";
}

inline CriterionId parse_criterion(std::string_view text) {
  auto fail = [&] { throw std::invalid_argument("cannot parse criterion '" + std::string(text) + "'"); };
  if (text.size() < 3) fail();
  CriterionId id;
  id.family = parse_family(text.substr(0, 3));
  std::string_view rest = text.substr(3);
  auto take_int = [&](std::string_view& s) {
    std::size_t n = 0;
    while (n < s.size() && std::isdigit(static_cast<unsigned char>(s[n]))) ++n;
    if (n == 0) fail();
    const int v = std::stoi(std::string(s.substr(0, n)));
    s.remove_prefix(n);
    return v;
  };
  auto take_sep = [&](std::string_view& s) {
    if (s.empty() || s.front() != '_') fail();
    s.remove_prefix(1);
  };
  if (id.family == Family::MW || id.family == Family::Mp) {
    if (!rest.empty()) fail();
  } else {
    if (is_local(id.family)) id.mode = take_int(rest);
    take_sep(rest);
    id.k1 = take_int(rest);
    take_sep(rest);
    id.k2 = take_int(rest);
    if (!rest.empty()) fail();
  }
  validate(id);
  return id;
}

/// Highest total derivative order touched by the criterion.
inline int required_order(const CriterionId& id) {
  switch (id.family) {
    case Family::EW:
    case Family::Ep: return id.k1 + id.k2 + 2;
    case Family::MW:
    case Family::Mp: return 2;
    case Family::RW:
    case Family::Rp: return std::max(id.k1 + 1, id.k2);
  }
  return 0;
}

inline constexpr double kVerdictRelativeTolerance = 1e-12;

template <typename Scalar>
struct CriterionResult {
  CriterionId id;
  Scalar value{0};
  bool nonclassical{false};
  Scalar tol{0};
  int max_order_used{0};
};

namespace detail {

template <typename Scalar>
CriterionResult<Scalar> make_result(const CriterionId& id, std::initializer_list<Scalar> terms) {
  Scalar value = 0, scale = 0;
  for (Scalar t : terms) {
    value += t;
    scale = std::max(scale, std::abs(t));
  }
  CriterionResult<Scalar> r;
  r.id = id;
  r.value = value;
  r.tol = Scalar(kVerdictRelativeTolerance) * scale;
  r.nonclassical = value < -r.tol;
  r.max_order_used = required_order(id);
  return r;
}

}  // namespace detail

/// Evaluates any criterion from precomputed statistics.
template <typename Scalar>
CriterionResult<Scalar> evaluate(const StatisticsTable<Scalar>& t, const CriterionId& id) {
  validate(id);
  if (required_order(id) > t.max_order())
    throw OrderLimitError(to_string(id) + " needs order " + std::to_string(required_order(id)) +
                          " > " + std::to_string(t.max_order()));
  const int a = id.k1, b = id.k2;
  switch (id.family) {
    case Family::EW:
      return detail::make_result<Scalar>(
          id, {t.intensity_moment(a + 2, b), t.intensity_moment(a, b + 2),
               -2 * t.intensity_moment(a + 1, b + 1)});
    case Family::Ep:
      return detail::make_result<Scalar>(
          id, {t.modified_pnd(a + 2, b), t.modified_pnd(a, b + 2), -2 * t.modified_pnd(a + 1, b + 1)});
    case Family::MW: {
      const Scalar w11 = t.intensity_moment(1, 1);
      return detail::make_result<Scalar>(
          id, {t.intensity_moment(2, 0) * t.intensity_moment(0, 2), -w11 * w11});
    }
    case Family::Mp: {
      const Scalar p11 = t.modified_pnd(1, 1);
      return detail::make_result<Scalar>(id, {t.modified_pnd(2, 0) * t.modified_pnd(0, 2), -p11 * p11});
    }
    case Family::RW: {
      auto w = [&](int k) { return t.marginal_moment(id.mode, k); };
      return detail::make_result<Scalar>(id, {w(a + 1) * w(b - 1), -w(a) * w(b)});
    }
    case Family::Rp: {
      auto p = [&](int k) { return t.marginal_modified_pnd(id.mode, k); };
      return detail::make_result<Scalar>(id, {p(a + 1) * p(b - 1), -p(a) * p(b)});
    }
  }
  throw std::logic_error("unhandled criterion family");
}

template <typename Scalar>
CriterionResult<Scalar> evaluate(const TwoModeGaussianState<Scalar>& s, const CriterionId& id,
                                 const EngineConfig& cfg = {}) {
  validate(id);
  EngineConfig local = cfg;
  if (required_order(id) > cfg.max_order)
    throw OrderLimitError(to_string(id) + " exceeds the configured order limit");
  local.max_order = required_order(id);
  return evaluate(StatisticsTable<Scalar>(s, local), id);
}

template <typename Scalar>
CriterionResult<Scalar> eval_E_W(const TwoModeGaussianState<Scalar>& s, int k1, int k2,
                                 const EngineConfig& cfg = {}) {
  return evaluate(s, CriterionId{Family::EW, k1, k2}, cfg);
}
template <typename Scalar>
CriterionResult<Scalar> eval_E_p(const TwoModeGaussianState<Scalar>& s, int k1, int k2,
                                 const EngineConfig& cfg = {}) {
  return evaluate(s, CriterionId{Family::Ep, k1, k2}, cfg);
}
template <typename Scalar>
CriterionResult<Scalar> eval_M_W(const TwoModeGaussianState<Scalar>& s, const EngineConfig& cfg = {}) {
  return evaluate(s, CriterionId{Family::MW}, cfg);
}
template <typename Scalar>
CriterionResult<Scalar> eval_M_p(const TwoModeGaussianState<Scalar>& s, const EngineConfig& cfg = {}) {
  return evaluate(s, CriterionId{Family::Mp}, cfg);
}
template <typename Scalar>
CriterionResult<Scalar> eval_R_W(const TwoModeGaussianState<Scalar>& s, int mode, int k, int l,
                                 const EngineConfig& cfg = {}) {
  return evaluate(s, CriterionId{Family::RW, k, l, mode}, cfg);
}
template <typename Scalar>
CriterionResult<Scalar> eval_R_p(const TwoModeGaussianState<Scalar>& s, int mode, int k, int l,
                                 const EngineConfig& cfg = {}) {
  return evaluate(s, CriterionId{Family::Rp, k, l, mode}, cfg);
}

/// Closed forms for noiseless twin beams. Supported: E_W and E_p with
/// (0,0), (1,1), (2,2), (0,1), (0,2), plus M_W and M_p.
template <typename Scalar>
Scalar closed_form_noiseless(const CriterionId& id, Scalar bp) {
  const Scalar r = bp / (bp + 1);
  auto unsupported = [&]() -> Scalar {
    throw std::invalid_argument("no closed form for " + to_string(id) + " on noiseless twin beams");
  };
  const auto idx = std::pair{id.k1, id.k2};
  using P = std::pair<int, int>;
  switch (id.family) {
    case Family::EW:
      if (idx == P{0, 0}) return -2 * bp;
      if (idx == P{1, 1}) return -12 * bp * bp * bp - 8 * bp * bp;
      if (idx == P{2, 2}) return -240 * std::pow(bp, 5) - 288 * std::pow(bp, 4) - 72 * std::pow(bp, 3);
      if (idx == P{0, 1}) return -4 * bp * bp;
      if (idx == P{0, 2}) return -12 * bp * bp * bp + 4 * bp * bp;
      return unsupported();
    case Family::MW: return -4 * bp * bp * bp - bp * bp;
    case Family::Ep:
      if (idx == P{0, 0}) return -2 * r;
      if (idx == P{1, 1}) return -8 * r * r;
      if (idx == P{2, 2}) return -72 * r * r * r;
      if (idx == P{0, 1}) return 0;
      if (idx == P{0, 2}) return 4 * r * r;
      return unsupported();
    case Family::Mp: return -r * r;
    default: return unsupported();
  }
}

/// Closed forms for noiseless twin beams behind a beam splitter; each
/// factorises into a polynomial in TR times a function of B_p. Supported:
/// E_p (0,0), (1,1), (2,2), (0,2) and M_p.
template <typename Scalar>
Scalar closed_form_bs_output(const CriterionId& id, Scalar bp, Scalar t) {
  if (!(t >= 0 && t <= 1)) throw std::invalid_argument("transmissivity must lie in [0, 1]");
  const Scalar r = bp / (bp + 1);
  const Scalar x = t * (1 - t);
  const auto idx = std::pair{id.k1, id.k2};
  using P = std::pair<int, int>;
  if (id.family == Family::Ep) {
    if (idx == P{0, 0}) return -(1 - 8 * x) * 2 * r;
    if (idx == P{1, 1}) return -(72 * x * x - 21 * x + 1) * 8 * r * r;
    if (idx == P{2, 2}) return -(1 - 40 * x + 340 * x * x - 800 * x * x * x) * 72 * r * r * r;
    if (idx == P{0, 2}) return (144 * x * x - 30 * x + 1) * 4 * r * r;
  }
  if (id.family == Family::Mp) return -(1 - 8 * x) * r * r;
  throw std::invalid_argument("no closed form for " + to_string(id) + " behind a beam splitter");
}

/// Largest B_p for which R^p_{2,2} still reveals local non-classicality of a
/// noiseless twin beam behind a beam splitter of transmissivity t. nullopt
/// means the criterion is negative for every B_p (balanced splitter).
template <typename Scalar>
std::optional<Scalar> boundary_R22p(Scalar t) {
  if (!(t >= 0 && t <= 1)) throw std::invalid_argument("transmissivity must lie in [0, 1]");
  const Scalar x = 4 * t * (1 - t);
  const Scalar radicand = x * (x - (7 - std::sqrt(Scalar(33)))) + 1;
  const Scalar denom = 2 * (2 * t - 1) * (2 * t - 1);
  if (radicand < 0 || denom == 0) return std::nullopt;
  return (x - 1 + std::sqrt(radicand)) / denom;
}

/// Balanced-noise threshold B_s = B_i below which R^p_{2,2} reveals local
/// non-classicality behind the splitter. Negative values mean no such
/// noise level exists.
template <typename Scalar>
Scalar boundary_noise_balanced_R22p(Scalar bp, Scalar t) {
  if (!(t >= 0 && t <= 1)) throw std::invalid_argument("transmissivity must lie in [0, 1]");
  if (bp < 0) throw std::invalid_argument("bp must be non-negative");
  const Scalar y = t * (1 - t) * bp * (bp + 1);
  const Scalar inner = std::sqrt(std::sqrt(Scalar(33)) - 5);
  return (std::sqrt(16 * y + 4 * inner * std::sqrt(y) + 1) - 2 * bp - 1) / 2;
}

/// Noise level below which a noisy twin beam is entangled: balanced noise
/// (B_s = B_i) or signal-only noise (B_i = 0).
template <typename Scalar>
Scalar entanglement_boundary_twin_beam(Scalar bp, bool balanced) {
  if (bp < 0) throw std::invalid_argument("bp must be non-negative");
  if (!balanced) return 1;
  if (bp == 0) return 0;
  // sqrt(bp(bp+1)) - bp, written without cancellation.
  return bp / (std::sqrt(bp * (bp + 1)) + bp);
}

}  // namespace twinbeam
