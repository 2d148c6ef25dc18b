#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "twinbeam/scan.hpp"

namespace twinbeam {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(v.substr(used)) != "")
    throw std::invalid_argument(key + ": expected a number, got '" + v + "'");
  return x;
}

int parse_int(const std::string& key, const std::string& v) {
  const double x = parse_double(key, v);
  if (x != std::floor(x) || std::abs(x) > 1e9) throw std::invalid_argument(key + ": expected an integer");
  return static_cast<int>(x);
}

double plot_coord(double x, Spacing sp) { return sp == Spacing::log ? std::log10(x) : x; }

}  // namespace

AxisSpec parse_axis_spec(const std::string& text) {
  std::string t = text;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::replace(t.begin(), t.end(), ':', ' ');
  std::istringstream is(t);
  std::vector<std::string> parts;
  for (std::string w; is >> w;) parts.push_back(w);
  if (parts.size() < 4 || parts.size() > 5)
    throw std::invalid_argument("axis needs '<name> <min> <max> <count> [linear|log]', got '" + text + "'");
  AxisSpec a;
  a.axis = parse_axis(parts[0]);
  a.min = parse_double("axis min", parts[1]);
  a.max = parse_double("axis max", parts[2]);
  a.count = parse_int("axis count", parts[3]);
  if (parts.size() == 5) {
    if (parts[4] == "log") a.spacing = Spacing::log;
    else if (parts[4] != "linear") throw std::invalid_argument("unknown spacing '" + parts[4] + "'");
  }
  return a;
}

ScanConfig parse_scan_config(std::istream& is) {
  ScanConfig cfg;
  ScanSpec& s = cfg.spec;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key == "axis") {
      s.axes.push_back(parse_axis_spec(value));
    } else if (key == "target" || key == "targets") {
      std::istringstream ts(value);
      for (std::string item; std::getline(ts, item, ',');)
        if (!trim(item).empty()) s.targets.push_back(parse_target(item));
    } else if (key == "noise" || key == "noise_mode") {
      s.noise_mode = parse_noise_mode(value);
    } else if (key == "bp" || key == "bs" || key == "bi" || key == "t" || key == "eta") {
      s.fixed.set(parse_axis(key), parse_double(key, value));
    } else if (key == "max_order") {
      s.max_order = parse_int(key, value);
    } else if (key == "tol") {
      s.boundary_tol = parse_double(key, value);
    } else if (key == "max_iter") {
      s.max_iter = parse_int(key, value);
    } else {
      cfg.extra.emplace_back(key, value);
    }
  }
  return cfg;
}

void write_boundaries_json(std::ostream& os, const ScanResult& r) {
  using nlohmann::json;
  json j;
  j["noise_mode"] = noise_mode_name(r.spec.noise_mode);
  j["axes"] = json::array();
  for (const AxisSpec& a : r.spec.axes)
    j["axes"].push_back({{"name", axis_name(a.axis)},
                         {"min", a.min},
                         {"max", a.max},
                         {"count", a.count},
                         {"spacing", a.spacing == Spacing::log ? "log" : "linear"}});
  j["targets"] = json::array();
  for (const Target& t : r.spec.targets) j["targets"].push_back(t.name());
  j["tol"] = r.spec.boundary_tol;

  auto coords = [&](const std::vector<double>& c) {
    json o = json::object();
    for (std::size_t a = 0; a < c.size(); ++a) o[axis_name(r.spec.axes[a].axis)] = c[a];
    return o;
  };
  j["boundary"] = json::array();
  for (const BoundaryPoint& b : r.boundary)
    j["boundary"].push_back({{"target", r.spec.targets[b.target].name()},
                             {"axis", axis_name(r.spec.axes[b.axis].axis)},
                             {"coords", coords(b.coords)},
                             {"witness", b.value},
                             {"bracket", b.bracket},
                             {"iterations", b.iterations}});
  j["segments"] = json::array();
  for (const Segment& s : r.segments)
    j["segments"].push_back({{"target", r.spec.targets[s.target].name()}, {"from", coords(s.a)}, {"to", coords(s.b)}});
  j["failed_cells"] = json::array();
  for (std::size_t i = 0; i < r.cells.size(); ++i)
    if (r.cells[i].status != "ok") {
      const auto idx = r.unravel(i);
      std::vector<double> c;
      for (std::size_t a = 0; a < idx.size(); ++a) c.push_back(r.coords[a][idx[a]]);
      j["failed_cells"].push_back({{"coords", coords(c)}, {"reason", r.cells[i].status}});
    }
  os << j.dump(2) << '\n';
}

void write_svg(std::ostream& os, const ScanResult& r, int target) {
  const std::size_t dims = r.spec.axes.size();
  if (dims > 2) throw std::invalid_argument("SVG heatmaps support 1-D and 2-D scans only");
  if (target < 0 || target >= static_cast<int>(r.spec.targets.size()))
    throw std::invalid_argument("no such target");
  const double W = 600, H = dims == 2 ? 480 : 60, left = 70, top = 40;
  const AxisSpec& ax = r.spec.axes[0];
  const AxisSpec* ay = dims == 2 ? &r.spec.axes[1] : nullptr;

  // Node i covers [i - 1/2, i + 1/2] in index space.
  auto span = [](const AxisSpec& a) {
    const double lo = plot_coord(a.min, a.spacing), hi = plot_coord(a.max, a.spacing);
    const double half = a.count > 1 ? 0.5 * (hi - lo) / (a.count - 1) : 0.5;
    return std::pair{lo - half, hi + half};
  };
  const auto [x0, x1] = span(ax);
  auto px = [&, x0 = x0, x1 = x1](double v) { return left + (plot_coord(v, ax.spacing) - x0) / (x1 - x0) * W; };
  double y0 = 0, y1 = 1;
  if (ay) std::tie(y0, y1) = span(*ay);
  auto py = [&](double v) { return top + H - (plot_coord(v, ay->spacing) - y0) / (y1 - y0) * H; };
  const double cw = W / ax.count, ch = ay ? H / ay->count : H;

  char buf[256];
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + W + 20 << "\" height=\"" << top + H + 50
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<text x=\"" << left << "\" y=\"20\">" << r.spec.targets[target].name()
     << " (red: nonclassical, blue: classical, grey: failed)</text>\n";
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    const auto idx = r.unravel(i);
    const CellResult& c = r.cells[i];
    const char* colour = std::isnan(c.values[target]) ? "#bbbbbb" : c.nonclassical[target] ? "#d6604d" : "#4393c3";
    const double cx = px(r.coords[0][idx[0]]) - cw / 2;
    const double cy = ay ? py(r.coords[1][idx[1]]) - ch / 2 : top;
    std::snprintf(buf, sizeof buf, "<rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" fill=\"%s\"/>\n", cx,
                  cy, cw + 0.05, ch + 0.05, colour);
    os << buf;
  }
  if (ay) {
    for (const Segment& s : r.segments) {
      if (s.target != target) continue;
      std::snprintf(buf, sizeof buf,
                    "<polyline points=\"%.3f,%.3f %.3f,%.3f\" stroke=\"black\" stroke-width=\"1.5\" fill=\"none\"/>\n",
                    px(s.a[0]), py(s.a[1]), px(s.b[0]), py(s.b[1]));
      os << buf;
    }
  } else {
    for (const BoundaryPoint& b : r.boundary) {
      if (b.target != target) continue;
      std::snprintf(buf, sizeof buf, "<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" stroke=\"black\"/>\n",
                    px(b.coords[0]), top, px(b.coords[0]), top + H);
      os << buf;
    }
  }
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W << "\" height=\"" << H
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto label = [&](const AxisSpec& a) {
    return axis_name(a.axis) + (a.spacing == Spacing::log ? " (log)" : "");
  };
  std::snprintf(buf, sizeof buf, "%g", ax.min);
  os << "<text x=\"" << left << "\" y=\"" << top + H + 16 << "\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, "%g", ax.max);
  os << "<text x=\"" << left + W << "\" y=\"" << top + H + 16 << "\" text-anchor=\"end\">" << buf << "</text>\n";
  os << "<text x=\"" << left + W / 2 << "\" y=\"" << top + H + 36 << "\" text-anchor=\"middle\">" << label(ax)
     << "</text>\n";
  if (ay) {
    std::snprintf(buf, sizeof buf, "%g", ay->min);
    os << "<text x=\"" << left - 6 << "\" y=\"" << top + H << "\" text-anchor=\"end\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "%g", ay->max);
    os << "<text x=\"" << left - 6 << "\" y=\"" << top + 10 << "\" text-anchor=\"end\">" << buf << "</text>\n";
    os << "<text x=\"" << left - 40 << "\" y=\"" << top + H / 2 << "\" text-anchor=\"middle\">" << label(*ay)
       << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace twinbeam
