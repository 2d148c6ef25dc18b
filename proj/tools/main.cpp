// twinbeam: evaluate non-classicality criteria of twin beams and scan
// phase diagrams.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "twinbeam/criteria.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/quantifiers.hpp"
#include "twinbeam/scan.hpp"
#include "twinbeam/selftest.hpp"

using namespace twinbeam;
using nlohmann::json;

namespace {

constexpr int kUsage = 1;
constexpr int kNumerical = 2;

int report(const char* kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
  return code;
}

struct StateFlags {
  double bp = 0, bs = 0, bi = 0, t = 1, eta = 1;

  void add(CLI::App* app) {
    app->add_option("--bp", bp, "mean photon-pair number")->capture_default_str();
    app->add_option("--bs", bs, "signal noise photons")->capture_default_str();
    app->add_option("--bi", bi, "idler noise photons")->capture_default_str();
    app->add_option("--t", t, "beam-splitter transmissivity")->capture_default_str();
    app->add_option("--eta", eta, "detection efficiency")->capture_default_str();
  }
  CellParams params() const { return {bp, bs, bi, t, eta}; }
};

struct TargetFlags {
  std::string family, target;
  int k1 = 0, k2 = 0, mode = 1;

  void add(CLI::App* app) {
    app->add_option("--family", family, "E_W, E_p, M_W, M_p, R_W or R_p");
    app->add_option("--k1", k1, "first index (k for R criteria)")->capture_default_str();
    app->add_option("--k2", k2, "second index (l for R criteria)")->capture_default_str();
    app->add_option("--mode", mode, "mode of a local criterion")->capture_default_str();
  }
  Target get() const {
    if (!target.empty()) {
      if (!family.empty()) throw std::invalid_argument("give either --family or --target");
      return parse_target(target);
    }
    if (family.empty()) throw std::invalid_argument("--family is required");
    Target t;
    t.criterion = CriterionId{parse_family(family), k1, k2, mode};
    validate(t.criterion);
    return t;
  }
};

json complex_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

int cmd_state(const StateFlags& f) {
  const State s = make_cell_state(f.params());
  const auto sigma = s.symmetric_covariance();
  json cov = json::array();
  for (int i = 0; i < 4; ++i) {
    json row = json::array();
    for (int j = 0; j < 4; ++j) row.push_back(sigma(i, j));
    cov.push_back(row);
  }
  const auto nu = symplectic_eigenvalues(sigma);
  const auto q = classify(s);
  json out = {{"bp", f.bp}, {"bs", f.bs}, {"bi", f.bi}, {"t", f.t}, {"eta", f.eta},
              {"B1", s.b1()}, {"B2", s.b2()}, {"C1", complex_json(s.c1())}, {"C2", complex_json(s.c2())},
              {"D12", complex_json(s.d12())}, {"Dbar12", complex_json(s.dbar12())},
              {"covariance", cov}, {"symplectic_eigenvalues", {nu(0), nu(1)}},
              {"i_ncl_1", q.i_ncl_1}, {"i_ncl_2", q.i_ncl_2}, {"negativity", q.negativity},
              {"entangled", q.entangled},
              {"locally_nonclassical", {q.locally_nonclassical_1, q.locally_nonclassical_2}}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_crit(const StateFlags& f, const TargetFlags& tf, int max_order) {
  const Target target = tf.get();
  const TargetValue v = evaluate_target(f.params(), target, max_order);
  json out = {{"target", target.name()}, {"value", v.value}, {"nonclassical", v.nonclassical}, {"tol", v.tol}};
  if (target.kind == Target::Kind::criterion) out["max_order_used"] = target.required_order();
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_pnd(const StateFlags& f, int nmax) {
  const auto d = photon_number_distribution(make_cell_state(f.params()), nmax);
  std::cout << "n1,n2,p\n";
  char buf[64];
  for (int i = 0; i <= d.n_max1(); ++i)
    for (int j = 0; j <= d.n_max2(); ++j) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", i, j, d.p(i, j));
      std::cout << buf;
    }
  return 0;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::invalid_argument("cannot write " + path);
  return os;
}

struct ScanFlags {
  std::string config, csv, json_path, svg, noise;
  std::vector<std::string> axes, targets;
  std::optional<double> bp, bs, bi, t, eta, tol;
  std::optional<int> max_order, max_iter;
  unsigned threads = 0;

  void add(CLI::App* app) {
    app->add_option("--config", config, "key = value scan description");
    app->add_option("--axis", axes, "'<name> <min> <max> <count> [linear|log]', repeatable");
    app->add_option("--target", targets, "criterion name, negativity, incl1 or incl2; repeatable");
    app->add_option("--noise", noise, "balanced, unbalanced or independent");
    app->add_option("--bp", bp);
    app->add_option("--bs", bs);
    app->add_option("--bi", bi);
    app->add_option("--t", t);
    app->add_option("--eta", eta);
    app->add_option("--max-order", max_order);
    app->add_option("--tol", tol, "boundary bisection tolerance");
    app->add_option("--max-iter", max_iter);
    app->add_option("--csv", csv, "grid output (default stdout)");
    app->add_option("--json", json_path, "boundary output");
    app->add_option("--svg", svg, "heatmap output; one file per target, suffixed when several");
    app->add_option("--threads", threads, "worker threads (default TWINBEAM_THREADS or all cores)");
  }
};

int cmd_scan(ScanFlags f) {
  ScanSpec spec;
  if (!f.config.empty()) {
    std::ifstream is(f.config);
    if (!is) throw std::invalid_argument("cannot read " + f.config);
    const ScanConfig cfg = parse_scan_config(is);
    spec = cfg.spec;
    for (const auto& [k, v] : cfg.extra) {
      if (k == "csv" && f.csv.empty()) f.csv = v;
      else if (k == "json" && f.json_path.empty()) f.json_path = v;
      else if (k == "svg" && f.svg.empty()) f.svg = v;
      else if (k != "csv" && k != "json" && k != "svg") throw std::invalid_argument("unknown config key '" + k + "'");
    }
  }
  if (!f.axes.empty()) {
    spec.axes.clear();
    for (const auto& a : f.axes) spec.axes.push_back(parse_axis_spec(a));
  }
  if (!f.targets.empty()) {
    spec.targets.clear();
    for (const auto& list : f.targets) {
      std::istringstream ts(list);
      for (std::string item; std::getline(ts, item, ',');)
        if (!item.empty()) spec.targets.push_back(parse_target(item));
    }
  }
  if (!f.noise.empty()) spec.noise_mode = parse_noise_mode(f.noise);
  if (f.bp) spec.fixed.bp = *f.bp;
  if (f.bs) spec.fixed.bs = *f.bs;
  if (f.bi) spec.fixed.bi = *f.bi;
  if (f.t) spec.fixed.t = *f.t;
  if (f.eta) spec.fixed.eta = *f.eta;
  if (f.max_order) spec.max_order = *f.max_order;
  if (f.tol) spec.boundary_tol = *f.tol;
  if (f.max_iter) spec.max_iter = *f.max_iter;
  spec.validate();
  if (!f.svg.empty() && spec.axes.size() > 2) throw std::invalid_argument("--svg needs a 1-D or 2-D scan");

  const ScanResult r = run_scan(spec, f.threads);
  if (f.csv.empty() || f.csv == "-") {
    write_csv(std::cout, r);
  } else {
    auto os = open_out(f.csv);
    write_csv(os, r);
  }
  if (!f.json_path.empty()) {
    auto os = open_out(f.json_path);
    write_boundaries_json(os, r);
  }
  if (!f.svg.empty()) {
    for (std::size_t k = 0; k < spec.targets.size(); ++k) {
      std::string path = f.svg;
      if (spec.targets.size() > 1) {
        const auto dot = path.rfind('.');
        const std::string stem = dot == std::string::npos ? path : path.substr(0, dot);
        const std::string ext = dot == std::string::npos ? ".svg" : path.substr(dot);
        path = stem + "_" + spec.targets[k].name() + ext;
      }
      auto os = open_out(path);
      write_svg(os, r, static_cast<int>(k));
    }
  }
  return 0;
}

struct BoundaryFlags {
  std::string axis = "bp", spacing = "linear", noise = "independent";
  std::optional<double> lo, hi;
  int samples = 200;
  double tol = 1e-8;
  int max_iter = 200;
  int max_order = 12;

  void add(CLI::App* app) {
    app->add_option("--axis", axis, "bp, bs, bi, t or eta")->capture_default_str();
    app->add_option("--lo", lo, "interval start (default depends on the axis)");
    app->add_option("--hi", hi, "interval end");
    app->add_option("--samples", samples, "bracketing samples")->capture_default_str();
    app->add_option("--spacing", spacing, "linear or log")->capture_default_str();
    app->add_option("--noise", noise, "balanced, unbalanced or independent")->capture_default_str();
    app->add_option("--tol", tol, "bisection tolerance")->capture_default_str();
    app->add_option("--max-iter", max_iter, "bisection iteration cap")->capture_default_str();
    app->add_option("--max-order", max_order)->capture_default_str();
  }
};

int cmd_boundary(const StateFlags& sf, const TargetFlags& tf, const BoundaryFlags& bf) {
  const Target target = tf.get();
  const Axis axis = parse_axis(bf.axis);
  double lo = 0, hi = 1;
  switch (axis) {
    case Axis::bp: lo = 1e-3, hi = 10; break;
    case Axis::bs:
    case Axis::bi: lo = 0, hi = 5; break;
    case Axis::t: lo = 0, hi = 1; break;
    case Axis::eta: lo = 1e-3, hi = 1; break;
  }
  if (bf.lo) lo = *bf.lo;
  if (bf.hi) hi = *bf.hi;
  if (bf.spacing != "linear" && bf.spacing != "log") throw std::invalid_argument("unknown spacing " + bf.spacing);
  const Spacing spacing = bf.spacing == "log" ? Spacing::log : Spacing::linear;

  ScanSpec spec;
  spec.fixed = sf.params();
  spec.noise_mode = parse_noise_mode(bf.noise);
  spec.targets = {target};
  spec.max_order = bf.max_order;
  spec.boundary_tol = bf.tol;
  spec.max_iter = bf.max_iter;
  spec.axes = {AxisSpec{axis, lo, hi, bf.samples, spacing}};
  spec.validate();

  const auto crossings = find_crossings(spec, spec.fixed, axis, spacing, lo, hi, bf.samples, target);
  json list = json::array();
  for (const Crossing& c : crossings)
    list.push_back({{"coord", c.coord}, {"witness", c.value}, {"bracket", c.bracket}, {"iterations", c.iterations}});
  std::cout << json{{"target", target.name()}, {"axis", bf.axis}, {"lo", lo}, {"hi", hi}, {"crossings", list}}.dump(2)
            << '\n';
  return 0;
}

int cmd_selftest() {
  bool all = true;
  for (const CheckResult& c : run_selftest()) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    all = all && c.pass;
  }
  return all ? 0 : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-classicality criteria for twin beams and beam-splitter outputs"};
  app.require_subcommand(1);

  StateFlags state_flags, crit_state, pnd_state, bnd_state;
  TargetFlags crit_target, bnd_target;
  int crit_order = 12, nmax = 16;
  ScanFlags scan_flags;
  BoundaryFlags bnd_flags;

  auto* state = app.add_subcommand("state", "print Gaussian parameters and covariance matrix");
  state_flags.add(state);

  auto* crit = app.add_subcommand("crit", "evaluate one criterion or quantifier");
  crit_state.add(crit);
  crit_target.add(crit);
  crit->add_option("--target", crit_target.target, "name such as E_p_0_0, negativity, incl1");
  crit->add_option("--max-order", crit_order)->capture_default_str();

  auto* pnd = app.add_subcommand("pnd", "photon-number distribution as CSV");
  pnd_state.add(pnd);
  pnd->add_option("--nmax", nmax, "largest photon number per mode")->capture_default_str();

  auto* scan = app.add_subcommand("scan", "grid scan with boundary extraction");
  scan_flags.add(scan);

  auto* boundary = app.add_subcommand("boundary", "bisect sign changes along one axis");
  bnd_state.add(boundary);
  bnd_target.add(boundary);
  boundary->add_option("--target", bnd_target.target, "name such as E_p_0_0, negativity, incl1");
  bnd_flags.add(boundary);

  auto* selftest = app.add_subcommand("selftest", "closed-form and oracle equivalence checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", e.what(), kUsage);
  }

  try {
    if (*state) return cmd_state(state_flags);
    if (*crit) return cmd_crit(crit_state, crit_target, crit_order);
    if (*pnd) {
      if (nmax < 0) throw std::invalid_argument("--nmax must be non-negative");
      return cmd_pnd(pnd_state, nmax);
    }
    if (*scan) return cmd_scan(scan_flags);
    if (*boundary) return cmd_boundary(bnd_state, bnd_target, bnd_flags);
    if (*selftest) return cmd_selftest();
  } catch (const NumericalError& e) {
    return report("numerical", e.what(), kNumerical);
  } catch (const std::invalid_argument& e) {
    return report("usage", e.what(), kUsage);
  } catch (const std::exception& e) {
    return report("numerical", e.what(), kNumerical);
  }
  return kUsage;
}
