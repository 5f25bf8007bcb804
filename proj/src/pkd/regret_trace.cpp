#include "sdmdp/pkd/regret_trace.hpp"

#include "sdmdp/core/errors.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace sdmdp {

ReplanSchedule replan_from_string(const std::string& s) {
  if (s == "every_episode") return ReplanSchedule::kEveryEpisode;
  if (s == "doubling") return ReplanSchedule::kDoubling;
  throw ValidationError("unknown replan schedule \"" + s + "\" (every_episode|doubling)");
}

std::string to_string(ReplanSchedule s) {
  return s == ReplanSchedule::kDoubling ? "doubling" : "every_episode";
}

void RegretTrace::add(int episode, double value_estimate, double realized, std::optional<double> exact,
                      std::uint64_t seed) {
  if (exact) last_exact_ = exact;
  if (last_exact_) cumulative_ += optimal_ - *last_exact_;
  rows_.push_back(TraceRow{episode, value_estimate, realized, exact, cumulative_, seed});
}

namespace {

// Shortest representation that round-trips, independent of locale.
std::string fmt(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& source, int line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ValidationError(source + ":" + std::to_string(line) + ": bad number \"" + s + "\"");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& s, const std::string& source, int line) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ValidationError(source + ":" + std::to_string(line) + ": bad integer \"" + s + "\"");
  }
  return v;
}

}  // namespace

void RegretTrace::write_csv(std::ostream& out) const {
  out << kTraceHeader << '\n';
  for (const auto& r : rows_) {
    out << r.episode << ',' << fmt(r.value_estimate) << ',' << fmt(r.realized_return) << ','
        << (r.exact_policy_value ? fmt(*r.exact_policy_value) : std::string()) << ','
        << fmt(r.cumulative_regret) << ',' << r.seed << '\n';
  }
}

std::vector<TraceRow> RegretTrace::read_csv(std::istream& in, const std::string& source) {
  std::vector<TraceRow> rows;
  std::string line;
  int lineno = 1;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw ValidationError(source + ":1: missing or unexpected CSV header");
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 6) {
      throw ValidationError(source + ":" + std::to_string(lineno) + ": expected 6 columns, got " +
                            std::to_string(cells.size()));
    }
    TraceRow r;
    r.episode = static_cast<int>(parse_uint(cells[0], source, lineno));
    r.value_estimate = parse_double(cells[1], source, lineno);
    r.realized_return = parse_double(cells[2], source, lineno);
    if (!cells[3].empty()) r.exact_policy_value = parse_double(cells[3], source, lineno);
    r.cumulative_regret = parse_double(cells[4], source, lineno);
    r.seed = parse_uint(cells[5], source, lineno);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace sdmdp
