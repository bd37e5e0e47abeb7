#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mqed/detail/text.hpp"
#include "mqed/error.hpp"

namespace mqed {

/// Uniform time grid t_n = n dt, n = 0..round(t_max / dt), in fs.
struct TimeGrid {
  double t_max = 200.0;
  double dt = 0.05;

  std::size_t steps() const {
    if (!(dt > 0.0) || !(t_max > 0.0) || !std::isfinite(t_max / dt))
      throw Error(ErrorCode::InvalidGrid, "time grid needs dt > 0 and t_max > 0");
    return static_cast<std::size_t>(std::llround(t_max / dt));
  }
  double time(std::size_t n) const { return static_cast<double>(n) * dt; }
};

/// Populations sampled on a time grid. Columns: P_E1..P_EN, P_ph1..P_phM,
/// P_ground.
struct PopulationTrace {
  std::string method;
  std::uint64_t scenario_hash = 0;
  Eigen::Index n_emitters = 0;
  Eigen::Index n_modes = 0;
  std::vector<double> times;
  Eigen::MatrixXd values;  // rows = times, cols = n_emitters + n_modes + 1

  double emitter(std::size_t t, Eigen::Index a) const { return values(static_cast<Eigen::Index>(t), a); }
  double photon(std::size_t t, Eigen::Index j) const { return values(static_cast<Eigen::Index>(t), n_emitters + j); }
  double ground(std::size_t t) const { return values(static_cast<Eigen::Index>(t), n_emitters + n_modes); }
  Eigen::VectorXd emitter_column(Eigen::Index a) const { return values.col(a); }

  std::string csv_header() const {
    std::string h = "t_fs";
    for (Eigen::Index a = 0; a < n_emitters; ++a) h += ",P_E" + std::to_string(a + 1);
    for (Eigen::Index j = 0; j < n_modes; ++j) h += ",P_ph" + std::to_string(j + 1);
    return h + ",P_ground";
  }

  std::string csv() const {
    std::string out = csv_header() + "\n";
    for (std::size_t t = 0; t < times.size(); ++t) {
      out += detail::fmt12(times[t]);
      for (Eigen::Index c = 0; c < values.cols(); ++c) out += "," + detail::fmt12(values(static_cast<Eigen::Index>(t), c));
      out += "\n";
    }
    return out;
  }
};

inline PopulationTrace parse_trace_csv(const std::string& text, const std::string& method = "") {
  const auto rows = detail::lines(text);
  if (rows.empty()) throw Error(ErrorCode::IoError, "empty trace CSV");
  const auto header = detail::split(rows[0], ',');
  PopulationTrace tr;
  tr.method = method;
  if (header.size() < 2 || header.front() != "t_fs" || header.back() != "P_ground")
    throw Error(ErrorCode::IoError, "trace CSV header must start with t_fs and end with P_ground");
  for (std::size_t c = 1; c + 1 < header.size(); ++c) {
    if (header[c].rfind("P_E", 0) == 0)
      ++tr.n_emitters;
    else if (header[c].rfind("P_ph", 0) == 0)
      ++tr.n_modes;
    else
      throw Error(ErrorCode::IoError, "unexpected trace column '" + header[c] + "'");
  }
  std::vector<std::vector<double>> data;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (detail::trim(rows[r]).empty()) continue;
    const auto cells = detail::split(rows[r], ',');
    if (cells.size() != header.size()) throw Error(ErrorCode::IoError, "trace row " + std::to_string(r + 1) + " has wrong width");
    std::vector<double> v(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c)
      if (!detail::parse_double(cells[c], v[c])) throw Error(ErrorCode::IoError, "bad number on trace row " + std::to_string(r + 1));
    data.push_back(std::move(v));
  }
  tr.values.resize(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(header.size() - 1));
  for (std::size_t r = 0; r < data.size(); ++r) {
    tr.times.push_back(data[r][0]);
    for (std::size_t c = 1; c < header.size(); ++c) tr.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 1)) = data[r][c];
  }
  return tr;
}

struct EmitterDeviation {
  double max_abs = 0.0;       // max_t |P_a - P_b|
  double time_of_max = 0.0;   // fs
  double l2 = 0.0;            // sqrt(int (P_a - P_b)^2 dt), fs^(1/2)
};

struct TraceComparison {
  std::string method_a, method_b;
  std::vector<EmitterDeviation> emitters;

  double max_abs() const {
    double m = 0.0;
    for (const auto& e : emitters) m = std::max(m, e.max_abs);
    return m;
  }
};

/// Emitter-population deviations between two traces on the same time grid.
inline TraceComparison compare_traces(const PopulationTrace& a, const PopulationTrace& b) {
  if (a.times.size() != b.times.size())
    throw Error(ErrorCode::GridMismatch, "traces have " + std::to_string(a.times.size()) + " and " +
                                             std::to_string(b.times.size()) + " samples");
  for (std::size_t t = 0; t < a.times.size(); ++t)
    if (std::abs(a.times[t] - b.times[t]) > 1e-9 * std::max(1.0, std::abs(a.times[t])))
      throw Error(ErrorCode::GridMismatch, "time samples differ at index " + std::to_string(t));
  if (a.n_emitters != b.n_emitters) throw Error(ErrorCode::ShapeMismatch, "traces have different emitter counts");
  TraceComparison cmp;
  cmp.method_a = a.method;
  cmp.method_b = b.method;
  for (Eigen::Index e = 0; e < a.n_emitters; ++e) {
    EmitterDeviation d;
    double sum = 0.0;
    for (std::size_t t = 0; t < a.times.size(); ++t) {
      const double diff = a.emitter(t, e) - b.emitter(t, e);
      if (std::abs(diff) > d.max_abs) {
        d.max_abs = std::abs(diff);
        d.time_of_max = a.times[t];
      }
      if (t > 0) {
        const double prev = a.emitter(t - 1, e) - b.emitter(t - 1, e);
        sum += 0.5 * (diff * diff + prev * prev) * (a.times[t] - a.times[t - 1]);
      }
    }
    d.l2 = std::sqrt(sum);
    cmp.emitters.push_back(d);
  }
  return cmp;
}

inline std::string comparison_csv(const std::vector<TraceComparison>& cmps) {
  std::string out = "method_a,method_b,emitter,max_abs_dev,time_of_max_fs,l2\n";
  for (const auto& c : cmps)
    for (std::size_t e = 0; e < c.emitters.size(); ++e)
      out += c.method_a + "," + c.method_b + "," + std::to_string(e + 1) + "," + detail::fmt12(c.emitters[e].max_abs) +
             "," + detail::fmt12(c.emitters[e].time_of_max) + "," + detail::fmt12(c.emitters[e].l2) + "\n";
  return out;
}

}  // namespace mqed
