#pragma once

// Parameter-grid scans over the twin-beam -> beam splitter -> detector
// pipeline, with sign-change boundaries refined by bisection.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "twinbeam/criteria.hpp"
#include "twinbeam/state.hpp"

namespace twinbeam {

enum class Axis { bp, bs, bi, t, eta };
enum class Spacing { linear, log };
enum class NoiseMode { balanced, unbalanced, independent };

std::string axis_name(Axis a);
Axis parse_axis(const std::string& s);
std::string noise_mode_name(NoiseMode m);
NoiseMode parse_noise_mode(const std::string& s);

struct AxisSpec {
  Axis axis{Axis::bp};
  double min{0};
  double max{1};
  int count{2};
  Spacing spacing{Spacing::linear};

  double value(int i) const;
  std::vector<double> values() const;
};

/// Parameters of one grid point. t = 1 leaves the twin beam untouched.
struct CellParams {
  double bp{0};
  double bs{0};
  double bi{0};
  double t{1};
  double eta{1};

  double get(Axis a) const;
  void set(Axis a, double v);
};

State make_cell_state(const CellParams& p);

/// A criterion, the negativity, or a local quantifier.
struct Target {
  enum class Kind { criterion, negativity, local_quantifier };
  Kind kind{Kind::criterion};
  CriterionId criterion{};
  int mode{1};

  std::string name() const;
  int required_order() const;
};

/// "negativity", "incl1", "incl2", or any criterion name such as E_p_0_0.
Target parse_target(const std::string& s);

struct TargetValue {
  double value{0};    // criterion value, negativity or I_ncl
  double witness{0};  // negative <=> nonclassical
  double tol{0};      // tie tolerance on the witness
  bool nonclassical{false};
};

TargetValue evaluate_target(const State& s, const Target& target, int max_order = 12);
TargetValue evaluate_target(const CellParams& p, const Target& target, int max_order = 12);

struct ScanSpec {
  std::vector<AxisSpec> axes;
  CellParams fixed;
  std::vector<Target> targets;
  NoiseMode noise_mode{NoiseMode::independent};
  int max_order{12};
  double boundary_tol{1e-8};
  int max_iter{200};

  /// Throws std::invalid_argument.
  void validate() const;
  /// Applies the noise mode to a raw point.
  CellParams resolve(CellParams p) const;
};

struct CellResult {
  std::vector<double> values;
  std::vector<double> witness;
  std::vector<double> tol;
  std::vector<char> nonclassical;
  std::string status{"ok"};
};

struct BoundaryPoint {
  int target{0};
  int axis{0};              // index into ScanSpec::axes along which the edge runs
  std::size_t cell{0};      // lower grid node of the edge
  std::vector<double> coords;
  double value{0};          // witness at the refined point
  double bracket{0};        // final bracket width in axis coordinates
  int iterations{0};
};

struct Segment {
  int target{0};
  std::vector<double> a, b;
};

struct ScanResult {
  ScanSpec spec;
  std::vector<std::vector<double>> coords;  // per axis
  std::vector<CellResult> cells;            // row-major, last axis fastest
  std::vector<BoundaryPoint> boundary;
  std::vector<Segment> segments;            // 2-D scans only

  std::size_t index(const std::vector<int>& idx) const;
  std::vector<int> unravel(std::size_t flat) const;
  CellParams params(std::size_t flat) const;
};

/// Thread count from TWINBEAM_THREADS, else hardware concurrency.
unsigned scan_threads();

ScanResult run_scan(const ScanSpec& spec, unsigned threads = 0);

struct Crossing {
  double coord{0};
  double value{0};
  double bracket{0};
  int iterations{0};
};

/// Bisects the witness of `target` along `axis` between two points of
/// opposite sign. Zero witnesses count as nonclassical.
std::optional<Crossing> refine_crossing(const ScanSpec& spec, CellParams base, Axis axis, Spacing spacing,
                                        double lo, double hi, const Target& target);

/// Samples [lo, hi] and refines every sign change.
std::vector<Crossing> find_crossings(const ScanSpec& spec, const CellParams& base, Axis axis,
                                     Spacing spacing, double lo, double hi, int samples,
                                     const Target& target);

// Output.
void write_csv(std::ostream& os, const ScanResult& r);
void write_boundaries_json(std::ostream& os, const ScanResult& r);
/// Heatmap of one target; 1-D and 2-D scans only.
void write_svg(std::ostream& os, const ScanResult& r, int target);

/// key = value lines; '#' comments and [section] headers are ignored.
/// Keys: axis (repeatable: "<name> <min> <max> <count> [linear|log]"),
/// target (repeatable, comma-separated), noise, bp, bs, bi, t, eta,
/// max_order, tol, max_iter. Unknown keys land in `extra`.
struct ScanConfig {
  ScanSpec spec;
  std::vector<std::pair<std::string, std::string>> extra;
};
ScanConfig parse_scan_config(std::istream& is);
AxisSpec parse_axis_spec(const std::string& text);

}  // namespace twinbeam
