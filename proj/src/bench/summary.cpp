#include "sdmdp/bench/experiment.hpp"

#include "sdmdp/core/errors.hpp"

#include <glob.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace sdmdp {

namespace fs = std::filesystem;

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

double loglog_slope(const std::vector<double>& cumulative) {
  const std::size_t K = cumulative.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t k = (K + 1) / 2; k <= K; ++k) {
    if (k == 0 || !(cumulative[k - 1] > 0.0)) continue;
    const double x = std::log(static_cast<double>(k));
    const double y = std::log(cumulative[k - 1]);
    sx += x, sy += y, sxx += x * x, sxy += x * y, n += 1;
  }
  const double den = n * sxx - sx * sx;
  if (n < 2 || den <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / den;
}

std::vector<fs::path> expand_glob(const std::string& pattern) {
  glob_t g{};
  std::vector<fs::path> out;
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  }
  globfree(&g);
  std::sort(out.begin(), out.end());
  return out;
}

SummaryReport summarize(std::vector<fs::path> files) {
  std::sort(files.begin(), files.end());
  struct Group {
    std::vector<std::uint64_t> seeds;
    std::vector<std::vector<TraceRow>> traces;
  };
  std::map<std::string, Group> groups;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw ValidationError("cannot open " + f.string());
    auto rows = RegretTrace::read_csv(in, f.string());
    if (rows.empty()) throw ValidationError(f.string() + ": no data rows");
    const std::string stem = f.stem().string();
    const auto cut = stem.rfind("__seed");
    const std::string cell = cut == std::string::npos ? stem : stem.substr(0, cut);
    auto& g = groups[cell];
    g.seeds.push_back(rows.front().seed);
    g.traces.push_back(std::move(rows));
  }

  SummaryReport report;
  for (auto& [cell, g] : groups) {
    CellSummary s;
    s.cell = cell;
    s.seeds = g.seeds;
    std::size_t K = std::numeric_limits<std::size_t>::max();
    std::vector<double> finals;
    for (const auto& t : g.traces) {
      K = std::min(K, t.size());
      finals.push_back(t.back().cumulative_regret);
    }
    s.episodes = static_cast<int>(K);
    s.median_final = quantile(finals, 0.5);
    s.q1_final = quantile(finals, 0.25);
    s.q3_final = quantile(finals, 0.75);
    std::vector<double> curve(K);
    std::vector<double> at(g.traces.size());
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t i = 0; i < g.traces.size(); ++i) at[i] = g.traces[i][k].cumulative_regret;
      curve[k] = quantile(at, 0.5);
    }
    s.slope = loglog_slope(curve);
    report.cells.push_back(std::move(s));
  }

  std::map<std::pair<std::string, std::string>, std::vector<std::pair<double, double>>> axes;
  for (const auto& c : report.cells) {
    const auto dot = c.cell.rfind('.');
    if (dot == std::string::npos) continue;
    const std::string last = c.cell.substr(dot + 1);
    const auto eq = last.find('=');
    if (eq == std::string::npos) continue;
    char* end = nullptr;
    const std::string num = last.substr(eq + 1);
    const double v = std::strtod(num.c_str(), &end);
    if (num.empty() || *end != '\0') continue;
    axes[{c.cell.substr(0, dot), last.substr(0, eq)}].emplace_back(v, c.median_final);
  }
  for (auto& [key, pts] : axes) {
    if (pts.size() < 2) continue;
    std::sort(pts.begin(), pts.end());
    ScalingVerdict v{key.first, key.second, pts, true};
    for (std::size_t i = 1; i < pts.size(); ++i) v.strictly_increasing &= pts[i].second > pts[i - 1].second;
    report.scaling.push_back(std::move(v));
  }
  return report;
}

nlohmann::json to_json(const SummaryReport& r) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"cell", c.cell},
                     {"seeds", c.seeds},
                     {"episodes", c.episodes},
                     {"median_final_regret", num(c.median_final)},
                     {"q1_final_regret", num(c.q1_final)},
                     {"q3_final_regret", num(c.q3_final)},
                     {"second_half_slope", num(c.slope)}});
  }
  nlohmann::json scaling = nlohmann::json::array();
  for (const auto& v : r.scaling) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& [x, m] : v.medians) pts.push_back({{"value", x}, {"median_final_regret", num(m)}});
    scaling.push_back({{"base", v.base}, {"axis", v.key}, {"points", pts}, {"strictly_increasing", v.strictly_increasing}});
  }
  return {{"cells", cells}, {"scaling", scaling}};
}

std::string format_summary(const SummaryReport& r) {
  std::ostringstream out;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-48s %5s %8s %14s %14s %14s %8s\n", "cell", "seeds", "K", "median", "q1", "q3",
                "slope");
  out << buf;
  for (const auto& c : r.cells) {
    std::snprintf(buf, sizeof buf, "%-48s %5zu %8d %14.4f %14.4f %14.4f %8.4f\n", c.cell.c_str(), c.seeds.size(),
                  c.episodes, c.median_final, c.q1_final, c.q3_final, c.slope);
    out << buf;
  }
  for (const auto& v : r.scaling) {
    out << "scaling " << v.base << " over " << v.key << ":";
    for (const auto& [x, m] : v.medians) {
      std::snprintf(buf, sizeof buf, " %g->%.4f", x, m);
      out << buf;
    }
    out << (v.strictly_increasing ? "  strictly increasing\n" : "  not strictly increasing\n");
  }
  return out.str();
}

}  // namespace sdmdp
