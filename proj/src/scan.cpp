#include "twinbeam/scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "twinbeam/errors.hpp"
#include "twinbeam/quantifiers.hpp"

namespace twinbeam {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_coord(double x, Spacing sp) { return sp == Spacing::log ? std::log(x) : x; }
double from_coord(double u, Spacing sp) { return sp == Spacing::log ? std::exp(u) : u; }

bool nc_side(const TargetValue& v) { return v.witness <= v.tol; }

template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const unsigned used = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  pool.reserve(used);
  for (unsigned w = 0; w < used; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  for (auto& th : pool) th.join();
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string axis_name(Axis a) {
  switch (a) {
    case Axis::bp: return "bp";
    case Axis::bs: return "bs";
    case Axis::bi: return "bi";
    case Axis::t: return "t";
    case Axis::eta: return "eta";
  }
  return "?";
}

Axis parse_axis(const std::string& s) {
  for (Axis a : {Axis::bp, Axis::bs, Axis::bi, Axis::t, Axis::eta})
    if (axis_name(a) == s) return a;
  throw std::invalid_argument("unknown axis '" + s + "'");
}

std::string noise_mode_name(NoiseMode m) {
  switch (m) {
    case NoiseMode::balanced: return "balanced";
    case NoiseMode::unbalanced: return "unbalanced";
    case NoiseMode::independent: return "independent";
  }
  return "?";
}

NoiseMode parse_noise_mode(const std::string& s) {
  for (NoiseMode m : {NoiseMode::balanced, NoiseMode::unbalanced, NoiseMode::independent})
    if (noise_mode_name(m) == s) return m;
  throw std::invalid_argument("unknown noise mode '" + s + "'");
}

double AxisSpec::value(int i) const {
  if (count == 1 || i == 0) return min;
  if (i == count - 1) return max;
  const double f = double(i) / (count - 1);
  if (spacing == Spacing::log) return std::exp(std::log(min) + f * (std::log(max) - std::log(min)));
  return min + f * (max - min);
}

std::vector<double> AxisSpec::values() const {
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) v[i] = value(i);
  return v;
}

double CellParams::get(Axis a) const {
  switch (a) {
    case Axis::bp: return bp;
    case Axis::bs: return bs;
    case Axis::bi: return bi;
    case Axis::t: return t;
    case Axis::eta: return eta;
  }
  return kNaN;
}

void CellParams::set(Axis a, double v) {
  switch (a) {
    case Axis::bp: bp = v; break;
    case Axis::bs: bs = v; break;
    case Axis::bi: bi = v; break;
    case Axis::t: t = v; break;
    case Axis::eta: eta = v; break;
  }
}

State make_cell_state(const CellParams& p) {
  const State s = beam_splitter_twin_beam(TwinBeamParams<double>{p.bp, p.bs, p.bi}, p.t);
  return attenuate(s, p.eta);
}

std::string Target::name() const {
  switch (kind) {
    case Kind::negativity: return "negativity";
    case Kind::local_quantifier: return "incl" + std::to_string(mode);
    case Kind::criterion: return to_string(criterion);
  }
  return "?";
}

int Target::required_order() const {
  return kind == Kind::criterion ? twinbeam::required_order(criterion) : 0;
}

Target parse_target(const std::string& raw) {
  const std::string s = trim(raw);
  Target t;
  if (s == "negativity") {
    t.kind = Target::Kind::negativity;
  } else if (s == "incl1" || s == "incl2") {
    t.kind = Target::Kind::local_quantifier;
    t.mode = s.back() - '0';
  } else {
    t.kind = Target::Kind::criterion;
    t.criterion = parse_criterion(s);
  }
  return t;
}

namespace {

TargetValue checked(TargetValue v) {
  if (!std::isfinite(v.value) || !std::isfinite(v.witness)) throw NumericalError("non-finite result");
  return v;
}

TargetValue from_criterion(const CriterionResult<double>& r) {
  return checked({r.value, r.value, r.tol, r.nonclassical});
}

TargetValue evaluate_quantifier(const State& s, const Target& target) {
  const double tol = kQuantifierTolerance;
  if (target.kind == Target::Kind::negativity) {
    const double ns = signed_negativity(s);
    return checked({std::max(0.0, ns), -ns, tol, ns > tol});
  }
  const double q = local_quantifier(s, target.mode);
  return checked({q, -q, tol, q > tol});
}

}  // namespace

TargetValue evaluate_target(const State& s, const Target& target, int max_order) {
  if (target.kind != Target::Kind::criterion) return evaluate_quantifier(s, target);
  return from_criterion(evaluate(s, target.criterion, EngineConfig{max_order}));
}

TargetValue evaluate_target(const CellParams& p, const Target& target, int max_order) {
  return evaluate_target(make_cell_state(p), target, max_order);
}

void ScanSpec::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (axes.empty() || axes.size() > 3) fail("a scan needs 1 to 3 axes");
  if (targets.empty()) fail("a scan needs at least one target");
  if (max_order < 0) fail("max_order must be non-negative");
  if (!(boundary_tol > 0)) fail("boundary tolerance must be positive");
  if (max_iter < 1) fail("max_iter must be positive");
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const AxisSpec& a = axes[i];
    const std::string n = axis_name(a.axis);
    for (std::size_t j = 0; j < i; ++j)
      if (axes[j].axis == a.axis) fail("axis " + n + " given twice");
    if (a.count < 1) fail("axis " + n + ": count must be at least 1");
    if (!std::isfinite(a.min) || !std::isfinite(a.max) || a.min > a.max) fail("axis " + n + ": invalid range");
    if (a.min < 0) fail("axis " + n + ": values must be non-negative");
    if ((a.axis == Axis::t || a.axis == Axis::eta) && a.max > 1) fail("axis " + n + ": values must lie in [0, 1]");
    if (a.spacing == Spacing::log && !(a.min > 0)) fail("axis " + n + ": log spacing needs a positive minimum");
    if (noise_mode == NoiseMode::balanced && a.axis == Axis::bi)
      fail("balanced noise takes its level from the bs axis");
    if (noise_mode == NoiseMode::unbalanced && a.axis == Axis::bi) fail("unbalanced noise fixes bi = 0");
  }
  for (const Target& t : targets)
    if (t.required_order() > max_order)
      fail(t.name() + " needs order " + std::to_string(t.required_order()) + " > max_order");
  const CellParams p = resolve(fixed);
  twinbeam::validate(TwinBeamParams<double>{p.bp, p.bs, p.bi});
  twinbeam::validate(BeamSplitterParams<double>{p.t, 0});
  if (!(p.eta >= 0 && p.eta <= 1)) fail("eta must lie in [0, 1]");
}

CellParams ScanSpec::resolve(CellParams p) const {
  if (noise_mode == NoiseMode::balanced) p.bi = p.bs;
  if (noise_mode == NoiseMode::unbalanced) p.bi = 0;
  return p;
}

std::size_t ScanResult::index(const std::vector<int>& idx) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < coords.size(); ++a) flat = flat * coords[a].size() + idx[a];
  return flat;
}

std::vector<int> ScanResult::unravel(std::size_t flat) const {
  std::vector<int> idx(coords.size());
  for (std::size_t a = coords.size(); a-- > 0;) {
    idx[a] = static_cast<int>(flat % coords[a].size());
    flat /= coords[a].size();
  }
  return idx;
}

CellParams ScanResult::params(std::size_t flat) const {
  const auto idx = unravel(flat);
  CellParams p = spec.fixed;
  for (std::size_t a = 0; a < coords.size(); ++a) p.set(spec.axes[a].axis, coords[a][idx[a]]);
  return spec.resolve(p);
}

unsigned scan_threads() {
  if (const char* env = std::getenv("TWINBEAM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::optional<Crossing> refine_crossing(const ScanSpec& spec, CellParams base, Axis axis, Spacing spacing,
                                        double lo, double hi, const Target& target) {
  auto eval = [&](double x) {
    base.set(axis, x);
    return evaluate_target(spec.resolve(base), target, spec.max_order);
  };
  try {
    const bool side_lo = nc_side(eval(lo));
    if (side_lo == nc_side(eval(hi))) return std::nullopt;
    double u0 = to_coord(lo, spacing), u1 = to_coord(hi, spacing);
    Crossing c;
    while (std::abs(u1 - u0) > spec.boundary_tol && c.iterations < spec.max_iter) {
      const double um = 0.5 * (u0 + u1);
      (nc_side(eval(from_coord(um, spacing))) == side_lo ? u0 : u1) = um;
      ++c.iterations;
    }
    c.coord = from_coord(0.5 * (u0 + u1), spacing);
    c.value = eval(c.coord).witness;
    c.bracket = std::abs(u1 - u0);
    return c;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::vector<Crossing> find_crossings(const ScanSpec& spec, const CellParams& base, Axis axis,
                                     Spacing spacing, double lo, double hi, int samples,
                                     const Target& target) {
  if (samples < 2) throw std::invalid_argument("need at least two samples");
  if (!(lo < hi)) throw std::invalid_argument("empty search interval");
  if (spacing == Spacing::log && !(lo > 0)) throw std::invalid_argument("log spacing needs lo > 0");
  const AxisSpec grid{axis, lo, hi, samples, spacing};
  std::vector<Crossing> out;
  for (int i = 0; i + 1 < samples; ++i)
    if (auto c = refine_crossing(spec, base, axis, spacing, grid.value(i), grid.value(i + 1), target))
      out.push_back(*c);
  return out;
}

ScanResult run_scan(const ScanSpec& spec, unsigned threads) {
  spec.validate();
  if (threads == 0) threads = scan_threads();
  ScanResult r;
  r.spec = spec;
  std::size_t total = 1;
  for (const AxisSpec& a : spec.axes) {
    r.coords.push_back(a.values());
    total *= a.count;
  }
  const std::size_t nt = spec.targets.size();
  int order = 0;
  for (const Target& t : spec.targets) order = std::max(order, t.required_order());

  r.cells.resize(total);
  parallel_for(total, threads, [&](std::size_t i) {
    CellResult& c = r.cells[i];
    c.values.assign(nt, kNaN);
    c.witness.assign(nt, kNaN);
    c.tol.assign(nt, kNaN);
    c.nonclassical.assign(nt, 0);
    try {
      const State s = make_cell_state(r.params(i));
      std::optional<StatisticsTable<double>> table;
      for (std::size_t k = 0; k < nt; ++k) {
        const Target& t = spec.targets[k];
        try {
          TargetValue v;
          if (t.kind == Target::Kind::criterion) {
            if (!table) table.emplace(s, EngineConfig{order});
            v = from_criterion(evaluate(*table, t.criterion));
          } else {
            v = evaluate_quantifier(s, t);
          }
          c.values[k] = v.value;
          c.witness[k] = v.witness;
          c.tol[k] = v.tol;
          c.nonclassical[k] = v.nonclassical;
        } catch (const std::exception& e) {
          if (c.status == "ok") c.status = t.name() + ": " + e.what();
        }
      }
    } catch (const std::exception& e) {
      c.status = e.what();
    }
  });

  // Edges whose end nodes sit on different sides.
  struct Task {
    int target, axis;
    std::size_t cell;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < total; ++i) {
    const auto idx = r.unravel(i);
    for (std::size_t a = 0; a < spec.axes.size(); ++a) {
      if (idx[a] + 1 >= spec.axes[a].count) continue;
      auto up = idx;
      ++up[a];
      const std::size_t j = r.index(up);
      for (std::size_t k = 0; k < nt; ++k) {
        const double w0 = r.cells[i].witness[k], w1 = r.cells[j].witness[k];
        if (std::isnan(w0) || std::isnan(w1)) continue;
        if ((w0 <= r.cells[i].tol[k]) != (w1 <= r.cells[j].tol[k]))
          tasks.push_back({static_cast<int>(k), static_cast<int>(a), i});
      }
    }
  }
  std::vector<std::optional<BoundaryPoint>> found(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t n) {
    const Task& task = tasks[n];
    const AxisSpec& ax = spec.axes[task.axis];
    const auto idx = r.unravel(task.cell);
    const CellParams base = r.params(task.cell);
    const double lo = r.coords[task.axis][idx[task.axis]];
    const double hi = r.coords[task.axis][idx[task.axis] + 1];
    auto c = refine_crossing(spec, base, ax.axis, ax.spacing, lo, hi, spec.targets[task.target]);
    if (!c) return;
    BoundaryPoint b;
    b.target = task.target;
    b.axis = task.axis;
    b.cell = task.cell;
    for (std::size_t a = 0; a < spec.axes.size(); ++a)
      b.coords.push_back(static_cast<int>(a) == task.axis ? c->coord : r.coords[a][idx[a]]);
    b.value = c->value;
    b.bracket = c->bracket;
    b.iterations = c->iterations;
    found[n] = std::move(b);
  });
  for (auto& b : found)
    if (b) r.boundary.push_back(std::move(*b));
  std::stable_sort(r.boundary.begin(), r.boundary.end(), [](const BoundaryPoint& x, const BoundaryPoint& y) {
    return std::tie(x.target, x.axis, x.cell) < std::tie(y.target, y.axis, y.cell);
  });

  // Marching squares: join the crossings found on the edges of each square.
  if (spec.axes.size() == 2) {
    std::map<std::tuple<int, int, std::size_t>, std::size_t> lookup;
    for (std::size_t n = 0; n < r.boundary.size(); ++n)
      lookup[{r.boundary[n].target, r.boundary[n].axis, r.boundary[n].cell}] = n;
    const int n0 = spec.axes[0].count, n1 = spec.axes[1].count;
    for (std::size_t k = 0; k < nt; ++k)
      for (int i = 0; i + 1 < n0; ++i)
        for (int j = 0; j + 1 < n1; ++j) {
          const std::tuple<int, int, std::size_t> edges[4] = {
              {int(k), 1, r.index({i, j})},       // along axis 1 at i
              {int(k), 0, r.index({i, j + 1})},   // along axis 0 at j+1
              {int(k), 1, r.index({i + 1, j})},   // along axis 1 at i+1
              {int(k), 0, r.index({i, j})}};      // along axis 0 at j
          std::vector<std::size_t> hits;
          for (const auto& e : edges)
            if (auto it = lookup.find(e); it != lookup.end()) hits.push_back(it->second);
          for (std::size_t h = 0; h + 1 < hits.size(); h += 2)
            r.segments.push_back({int(k), r.boundary[hits[h]].coords, r.boundary[hits[h + 1]].coords});
        }
  }
  return r;
}

void write_csv(std::ostream& os, const ScanResult& r) {
  for (const AxisSpec& a : r.spec.axes) os << axis_name(a.axis) << ',';
  for (const Target& t : r.spec.targets) os << t.name() << ',' << t.name() << "_nc,";
  os << "status\n";
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    const auto idx = r.unravel(i);
    for (std::size_t a = 0; a < r.coords.size(); ++a) os << fmt(r.coords[a][idx[a]]) << ',';
    const CellResult& c = r.cells[i];
    for (std::size_t k = 0; k < c.values.size(); ++k)
      os << fmt(c.values[k]) << ',' << (std::isnan(c.values[k]) ? "nan" : c.nonclassical[k] ? "1" : "0") << ',';
    std::string status = c.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    os << status << '\n';
  }
}

}  // namespace twinbeam
