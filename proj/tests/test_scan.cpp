#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "twinbeam/scan.hpp"

using namespace twinbeam;

namespace {

std::string csv(const ScanResult& r) {
  std::ostringstream os;
  write_csv(os, r);
  return os.str();
}

std::string boundaries(const ScanResult& r) {
  std::ostringstream os;
  write_boundaries_json(os, r);
  return os.str();
}

ScanSpec spec_of(std::vector<AxisSpec> axes, std::vector<std::string> targets) {
  ScanSpec s;
  s.axes = std::move(axes);
  for (const auto& t : targets) s.targets.push_back(parse_target(t));
  return s;
}

}  // namespace

TEST_SUITE("scan") {

TEST_CASE("axis and target parsing") {
  const AxisSpec a = parse_axis_spec("bp 0.01 10 50 log");
  CHECK(a.axis == Axis::bp);
  CHECK(a.count == 50);
  CHECK(a.spacing == Spacing::log);
  CHECK(a.value(0) == 0.01);
  CHECK(a.value(49) == 10);
  CHECK(close(a.value(1) / a.value(0), a.value(2) / a.value(1), 1e-12));
  CHECK(parse_axis_spec("t,0.5,1,11").spacing == Spacing::linear);
  CHECK(parse_axis_spec("t 0.5 1 11").value(5) == doctest::Approx(0.75));
  for (const char* bad : {"bp 0 1", "q 0 1 3", "bp 0 1 x", "bp 0 1 3 cubic", "bp 0 1 2.5"})
    CHECK_THROWS_AS(parse_axis_spec(bad), std::invalid_argument);
  CHECK(parse_target("negativity").kind == Target::Kind::negativity);
  CHECK(parse_target("incl2").mode == 2);
  CHECK(parse_target(" E_p_1_1 ").name() == "E_p_1_1");
  CHECK_THROWS_AS(parse_target("entropy"), std::invalid_argument);
}

TEST_CASE("config file") {
  std::istringstream is(R"(# phase diagram
[scan]
axis = bs 0 1 11
axis = bp 0.01 5 21   # pair number
target = negativity, E_W_0_0
target = R_p1_2_2
noise = balanced
t = 0.9
eta = 0.5
max_order = 8
tol = 1e-9
max_iter = 50
csv = "out.csv"
)");
  const ScanConfig c = parse_scan_config(is);
  CHECK(c.spec.axes.size() == 2);
  CHECK(c.spec.axes[1].count == 21);
  CHECK(c.spec.targets.size() == 3);
  CHECK(c.spec.noise_mode == NoiseMode::balanced);
  CHECK(c.spec.fixed.t == 0.9);
  CHECK(c.spec.fixed.eta == 0.5);
  CHECK(c.spec.max_order == 8);
  CHECK(c.spec.boundary_tol == 1e-9);
  CHECK(c.spec.max_iter == 50);
  REQUIRE(c.extra.size() == 1);
  CHECK(c.extra[0].second == "out.csv");
  std::istringstream bad("axis bp 0 1 3\n");
  CHECK_THROWS_AS(parse_scan_config(bad), std::invalid_argument);
  std::istringstream bad_value("t = half\n");
  CHECK_THROWS_AS(parse_scan_config(bad_value), std::invalid_argument);
}

TEST_CASE("scan description validation") {
  auto ok = spec_of({parse_axis_spec("bp 0 1 3")}, {"E_W_0_0"});
  CHECK_NOTHROW(ok.validate());
  auto empty = spec_of({parse_axis_spec("bp 0 1 3")}, {});
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
  CHECK_THROWS_AS(run_scan(empty), std::invalid_argument);
  CHECK_THROWS_AS(spec_of({}, {"E_W_0_0"}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(spec_of({parse_axis_spec("t 0 2 3")}, {"E_W_0_0"}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(spec_of({parse_axis_spec("bp 1 0 3")}, {"E_W_0_0"}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(spec_of({parse_axis_spec("bp 0 1 3 log")}, {"E_W_0_0"}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(spec_of({parse_axis_spec("bp 0 1 0")}, {"E_W_0_0"}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(spec_of({parse_axis_spec("bp 0 1 3"), parse_axis_spec("bp 0 1 3")}, {"M_p"}).validate(),
                  std::invalid_argument);
  auto balanced = spec_of({parse_axis_spec("bi 0 1 3")}, {"negativity"});
  balanced.noise_mode = NoiseMode::balanced;
  CHECK_THROWS_AS(balanced.validate(), std::invalid_argument);
  auto deep = spec_of({parse_axis_spec("bp 0 1 3")}, {"E_W_6_6"});
  CHECK_THROWS_AS(deep.validate(), std::invalid_argument);
  CellParams p{1, 0.3, 0.7, 1, 1};
  balanced.noise_mode = NoiseMode::balanced;
  CHECK(balanced.resolve(p).bi == 0.3);
  balanced.noise_mode = NoiseMode::unbalanced;
  CHECK(balanced.resolve(p).bi == 0);
}

TEST_CASE("cell pipeline") {
  const State s = make_cell_state(CellParams{1, 0.2, 0.1, 0.7, 0.5});
  const State ref = attenuate(beam_splitter(twin_beam(TwinBeamParams<double>{1, 0.2, 0.1}), BeamSplitterParams<double>{0.7}), 0.5);
  CHECK(close(s.b1(), ref.b1(), 1e-14));
  CHECK(close(s.d12(), ref.d12(), 1e-14));
  CHECK(close(s.dbar12(), ref.dbar12(), 1e-14));
  const TargetValue v = evaluate_target(CellParams{1, 0, 0, 1, 1}, parse_target("E_p_0_0"));
  CHECK(close(v.value, -1, 1e-13));
  CHECK(v.nonclassical);
  const TargetValue n = evaluate_target(CellParams{1, 0, 0, 1, 1}, parse_target("negativity"));
  CHECK(close(n.value, std::sqrt(2.0) + 1, 1e-12));
  CHECK(n.witness < 0);
}

TEST_CASE("entanglement phase diagram") {
  ScanSpec s = spec_of({parse_axis_spec("bs 0 1 21"), parse_axis_spec("bp 0 5 21")}, {"negativity"});
  s.noise_mode = NoiseMode::balanced;
  const ScanResult r = run_scan(s, 2);
  CHECK(r.cells.size() == 441);
  REQUIRE(!r.boundary.empty());
  for (const auto& b : r.boundary) {
    const double bs = b.coords[0], bp = b.coords[1];
    CHECK(close(bs, std::sqrt(bp * (bp + 1)) - bp, 1e-4));
    CHECK(b.bracket <= s.boundary_tol);
  }
  CHECK(!r.segments.empty());
  // The vacuum corner sits exactly on the boundary and counts as nonclassical,
  // so the bp = 0 row crosses right next to bs = 0.
  for (const auto& b : r.boundary)
    if (b.coords[1] == 0) CHECK(b.coords[0] < 1e-7);
}

TEST_CASE("transmissivity windows") {
  ScanSpec s = spec_of({parse_axis_spec("t 0.5 1 101")}, {"E_p_0_0", "E_p_1_1", "E_p_2_2", "E_p_0_2"});
  s.fixed.bp = 1;
  const ScanResult r = run_scan(s, 3);
  std::multiset<std::pair<std::string, long>> found;
  for (const auto& b : r.boundary) found.insert({s.targets[b.target].name(), std::lround(b.coords[0] * 1000)});
  auto near = [&](const std::string& name, double t) {
    for (const auto& b : r.boundary)
      if (s.targets[b.target].name() == name && std::abs(b.coords[0] - t) < 1e-3) return true;
    return false;
  };
  CHECK(near("E_p_0_0", (1 + 1 / std::sqrt(2.0)) / 2));
  CHECK(near("E_p_1_1", (1 + std::sqrt(15 - 3 * std::sqrt(17.0)) / 6) / 2));
  CHECK(near("E_p_1_1", (1 + std::sqrt(15 + 3 * std::sqrt(17.0)) / 6) / 2));
  CHECK(near("E_p_2_2", 0.624));
  CHECK(near("E_p_2_2", 0.806));
  CHECK(near("E_p_2_2", 0.965));
  CHECK(near("E_p_0_2", (1 + 1 / std::sqrt(3.0)) / 2));
  CHECK(near("E_p_0_2", (1 + std::sqrt(30.0) / 6) / 2));
  CHECK(r.boundary.size() == 8);
}

TEST_CASE("boundary points bracket a sign change") {
  ScanSpec s = spec_of({parse_axis_spec("t 0 1 15"), parse_axis_spec("bp 0.01 3 15 log")}, {"R_p1_2_2", "M_p"});
  const ScanResult r = run_scan(s, 4);
  REQUIRE(!r.boundary.empty());
  for (const auto& b : r.boundary) {
    const AxisSpec& ax = s.axes[b.axis];
    CellParams p = r.params(b.cell);
    const double u = ax.spacing == Spacing::log ? std::log(b.coords[b.axis]) : b.coords[b.axis];
    auto at = [&](double uu) {
      p.set(ax.axis, ax.spacing == Spacing::log ? std::exp(uu) : uu);
      const TargetValue v = evaluate_target(p, s.targets[b.target]);
      return v.witness <= v.tol;
    };
    CHECK(b.bracket <= s.boundary_tol);
    CHECK(at(u - b.bracket / 2) != at(u + b.bracket / 2));
  }
}

TEST_CASE("degenerate axis") {
  ScanSpec s = spec_of({parse_axis_spec("bp 1 1 1")}, {"E_p_0_0", "negativity"});
  const ScanResult r = run_scan(s);
  REQUIRE(r.cells.size() == 1);
  CHECK(close(r.cells[0].values[0], -1, 1e-13));
  CHECK(r.boundary.empty());
}

TEST_CASE("failed cells are reported") {
  ScanSpec s = spec_of({parse_axis_spec("bp 1 1e40 5 log")}, {"E_W_5_5"});
  const ScanResult r = run_scan(s);
  CHECK(r.cells[0].status == "ok");
  CHECK(r.cells[1].status == "E_W_5_5: generating polynomial is not positive at the expansion point");
  CHECK(r.cells[4].status == "E_W_5_5: non-finite result");
  CHECK(std::isnan(r.cells[4].values[0]));
  const std::string out = csv(r);
  CHECK(out.find(",nan,nan,E_W_5_5: non-finite result\n") != std::string::npos);
  CHECK(boundaries(r).find("failed_cells") != std::string::npos);
}

TEST_CASE("scan output is deterministic") {
  ScanSpec s = spec_of({parse_axis_spec("t 0.4 1 17"), parse_axis_spec("bp 0.05 4 13 log")},
                       {"E_p_0_0", "E_p_2_2", "M_p", "R_p1_2_2", "negativity", "incl1"});
  const ScanResult a = run_scan(s, 1), b = run_scan(s, 4), c = run_scan(s, 7);
  CHECK(csv(a) == csv(b));
  CHECK(csv(a) == csv(c));
  CHECK(boundaries(a) == boundaries(b));
  CHECK(boundaries(a) == boundaries(c));
  const std::string head = csv(a).substr(0, csv(a).find('\n'));
  CHECK(head ==
        "t,bp,E_p_0_0,E_p_0_0_nc,E_p_2_2,E_p_2_2_nc,M_p,M_p_nc,R_p1_2_2,R_p1_2_2_nc,negativity,negativity_nc,incl1,"
        "incl1_nc,status");
}

TEST_CASE("svg heatmap") {
  ScanSpec s = spec_of({parse_axis_spec("bs 0 1 6"), parse_axis_spec("bp 0 2 5")}, {"negativity"});
  s.noise_mode = NoiseMode::balanced;
  const ScanResult r = run_scan(s);
  std::ostringstream os;
  write_svg(os, r, 0);
  const std::string svg = os.str();
  CHECK(svg.rfind("<svg", 0) == 0);
  std::size_t rects = 0;
  for (std::size_t pos = 0; (pos = svg.find("<rect", pos)) != std::string::npos; ++pos) ++rects;
  CHECK(rects == 31);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK_THROWS_AS(write_svg(os, r, 1), std::invalid_argument);
  ScanSpec three = spec_of({parse_axis_spec("bp 0 1 2"), parse_axis_spec("t 0 1 2"), parse_axis_spec("eta 0.5 1 2")}, {"M_p"});
  CHECK_THROWS_AS(write_svg(os, run_scan(three), 0), std::invalid_argument);
}

TEST_CASE("one-dimensional crossings") {
  ScanSpec s = spec_of({parse_axis_spec("bp 0.001 10 2")}, {"E_W_0_2"});
  const auto c = find_crossings(s, s.fixed, Axis::bp, Spacing::linear, 1e-3, 10, 50, s.targets[0]);
  REQUIRE(c.size() == 1);
  CHECK(close(c[0].coord, 1.0 / 3, 1e-6));
  CHECK_FALSE(refine_crossing(s, s.fixed, Axis::bp, Spacing::linear, 0.5, 2, s.targets[0]).has_value());
  CHECK_THROWS_AS(find_crossings(s, s.fixed, Axis::bp, Spacing::linear, 1, 0.5, 10, s.targets[0]), std::invalid_argument);
}

TEST_CASE("thread count override") {
  setenv("TWINBEAM_THREADS", "3", 1);
  CHECK(scan_threads() == 3);
  setenv("TWINBEAM_THREADS", "zero", 1);
  CHECK(scan_threads() >= 1);
  unsetenv("TWINBEAM_THREADS");
}

}
