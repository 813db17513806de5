#pragma once

// Text formats:
//  - time series CSV: header `t,p1,...,pd`, one row per sample, uniform t;
//  - delimiter file: one sample index per line, strictly increasing;
//  - frame file: d + 1 rows of d numbers, the origin then the basis vectors.
// LF and CRLF line endings are both accepted.

#include <Eigen/Core>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rope/error.hpp"
#include "rope/estimator.hpp"
#include "rope/signal_core.hpp"

namespace rope {

inline constexpr double kSpacingTolerance = 1e-6;  // relative, on consecutive t differences

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::string location(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

inline double parse_double(std::string_view field, std::string_view source, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty())
    throw Error(ErrorKind::Io, location(source, line) + ": '" + std::string(field) + "' is not a number");
  if (!std::isfinite(value))
    throw Error(ErrorKind::Io, location(source, line) + ": non-finite value '" + std::string(field) + "'");
  return value;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Shortest text that parses back to the same double.
inline std::string format_exact(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Angles and other derived values: 9 significant digits.
inline std::string format_angle(double value) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.9g", value);
  return std::string(buf, static_cast<std::size_t>(n));
}

/// Row-at-a-time reader for the time series CSV, usable on an unbounded stream.
/// The sampling time is fixed by the first two rows; every later spacing must
/// agree within kSpacingTolerance.
class CsvSampleReader {
 public:
  /// `on_line` sees every raw line read (without its terminator).
  using LineHook = std::function<void(std::string_view)>;

  CsvSampleReader(std::istream& in, std::string source, LineHook on_line = {})
      : in_(in), source_(std::move(source)), on_line_(std::move(on_line)) {
    std::string header;
    if (!next_line(header)) throw Error(ErrorKind::Io, source_ + ": empty input, expected header t,p1,...,pd");
    const auto fields = detail::split(detail::trim(header), ',');
    if (detail::trim(fields.front()) != "t" || fields.size() < 2)
      throw Error(ErrorKind::Io, detail::location(source_, line_) + ": header must be t,p1,...,pd");
    dimension_ = static_cast<Index>(fields.size()) - 1;
  }

  Index dimension() const noexcept { return dimension_; }
  std::size_t line() const noexcept { return line_; }

  /// Sampling time once two rows have been read.
  std::optional<double> sampling_time() const { return sampling_time_; }

  /// Next sample (t, p); empty at end of input.
  std::optional<std::pair<double, Vector>> next() {
    std::string text;
    if (!next_line(text)) return std::nullopt;
    const auto fields = detail::split(detail::trim(text), ',');
    if (static_cast<Index>(fields.size()) != dimension_ + 1)
      throw Error(ErrorKind::Io, detail::location(source_, line_) + ": expected " + std::to_string(dimension_ + 1) +
                                     " fields, found " + std::to_string(fields.size()));
    const double t = detail::parse_double(fields[0], source_, line_);
    Vector p(dimension_);
    for (Index r = 0; r < dimension_; ++r)
      p(r) = detail::parse_double(fields[static_cast<std::size_t>(r + 1)], source_, line_);

    if (last_t_) {
      const double dt = t - *last_t_;
      if (!(dt > 0.0))
        throw Error(ErrorKind::Io, detail::location(source_, line_) + ": t is not strictly increasing");
      if (!sampling_time_) {
        sampling_time_ = dt;
      } else if (std::abs(dt - *sampling_time_) > kSpacingTolerance * *sampling_time_) {
        throw Error(ErrorKind::Io, detail::location(source_, line_) + ": non-uniform sampling (step " +
                                       format_angle(dt) + " vs " + format_angle(*sampling_time_) + ")");
      }
    }
    last_t_ = t;
    return std::make_pair(t, std::move(p));
  }

 private:
  // Skips blank lines.
  bool next_line(std::string& out) {
    while (std::getline(in_, out)) {
      ++line_;
      if (on_line_) on_line_(out);
      if (!detail::trim(out).empty()) return true;
    }
    return false;
  }

  std::istream& in_;
  std::string source_;
  LineHook on_line_;
  std::size_t line_ = 0;
  Index dimension_ = 0;
  std::optional<double> last_t_;
  std::optional<double> sampling_time_;
};

struct CsvSeries {
  TimeSeries series;
  double start_time = 0.0;
};

inline CsvSeries read_time_series_csv(std::istream& in, const std::string& source) {
  CsvSampleReader reader(in, source);
  std::vector<double> values;
  std::optional<double> t0;
  double t_last = 0.0;
  Index count = 0;
  while (auto row = reader.next()) {
    if (!t0) t0 = row->first;
    t_last = row->first;
    values.insert(values.end(), row->second.data(), row->second.data() + row->second.size());
    ++count;
  }
  if (count < 2) throw Error(ErrorKind::Io, source + ": need at least 2 samples to infer the sampling time");
  Matrix samples = Eigen::Map<const Matrix>(values.data(), reader.dimension(), count);
  // Mean spacing: the whole record pins T_s better than its first step.
  const double ts = (t_last - *t0) / static_cast<double>(count - 1);
  return {TimeSeries(ts, std::move(samples)), *t0};
}

inline void write_csv_header(std::ostream& out, Index dimension) {
  out << 't';
  for (Index r = 1; r <= dimension; ++r) out << ",p" << r;
  out << '\n';
}

inline void write_csv_row(std::ostream& out, double t, const Eigen::Ref<const Vector>& p) {
  out << detail::format_exact(t);
  for (Index r = 0; r < p.size(); ++r) out << ',' << detail::format_exact(p(r));
  out << '\n';
}

/// Writes t = start_time + k T_s with round-trip precision.
inline void write_time_series_csv(std::ostream& out, const TimeSeries& series, double start_time = 0.0) {
  write_csv_header(out, series.dimension());
  for (Index k = 0; k < series.size(); ++k)
    write_csv_row(out, start_time + static_cast<double>(k) * series.sampling_time(), series.sample(k));
}

inline Delimiters read_delimiters(std::istream& in, const std::string& source) {
  std::vector<Index> indices;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    const auto field = detail::trim(text);
    if (field.empty()) continue;
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
      throw Error(ErrorKind::Io, detail::location(source, line) + ": '" + std::string(field) + "' is not an integer");
    if (value < 0) throw Error(ErrorKind::Io, detail::location(source, line) + ": negative delimiter");
    if (!indices.empty() && value <= indices.back())
      throw Error(ErrorKind::Io, detail::location(source, line) + ": delimiters must be strictly increasing");
    indices.push_back(static_cast<Index>(value));
  }
  try {
    return Delimiters(std::move(indices));
  } catch (const Error& e) {
    throw Error(ErrorKind::Io, source + ": " + e.what());
  }
}

inline void write_delimiters(std::ostream& out, const Delimiters& delims) {
  for (Index k : delims.indices()) out << k << '\n';
}

/// Frame file: d + 1 non-blank rows, comma or whitespace separated.
inline FrameOfReference read_frame(std::istream& in, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    for (char& c : text)
      if (c == ',' || c == '\t') c = ' ';
    std::vector<double> row;
    for (auto field : detail::split(detail::trim(text), ' ')) {
      if (detail::trim(field).empty()) continue;
      row.push_back(detail::parse_double(field, source, line));
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorKind::Io, detail::location(source, line) + ": row length differs from the origin row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::Io, source + ": empty frame file");
  const auto d = static_cast<Index>(rows.front().size());
  if (static_cast<Index>(rows.size()) != d + 1)
    throw Error(ErrorKind::Io, source + ": a " + std::to_string(d) + "-dimensional frame needs " +
                                   std::to_string(d + 1) + " rows, found " + std::to_string(rows.size()));
  Vector origin = Eigen::Map<const Vector>(rows[0].data(), d);
  Matrix basis(d, d);
  for (Index j = 0; j < d; ++j) basis.col(j) = Eigen::Map<const Vector>(rows[static_cast<std::size_t>(j + 1)].data(), d);
  return FrameOfReference(std::move(origin), std::move(basis));
}

inline void write_frame(std::ostream& out, const FrameOfReference& frame) {
  const auto row = [&out](const Eigen::Ref<const Vector>& v) {
    for (Index r = 0; r < v.size(); ++r) out << (r ? "," : "") << detail::format_exact(v(r));
    out << '\n';
  };
  row(frame.origin());
  for (Index j = 0; j < frame.dimension(); ++j) row(frame.basis().col(j));
}

inline std::string_view status_name(Status s) { return s == Status::Active ? "active" : "collecting"; }

inline void write_phase_header(std::ostream& out) { out << "k,status,theta,h_star,loop_index\n"; }

/// One estimator output row; undefined fields are left empty.
inline void write_phase_row(std::ostream& out, const PhaseOutput& o) {
  out << o.sample_index << ',' << (o.retroactive ? std::string_view("backfilled") : status_name(o.status)) << ',';
  if (o.phase) out << format_angle(o.phase->value());
  out << ',';
  if (o.match_index) out << *o.match_index;
  out << ',' << o.loop_index << '\n';
}

/// Per-sample phases of one method: `k,theta`.
inline void write_phase_series(std::ostream& out, const PhaseSeries& phases) {
  out << "k,theta\n";
  for (std::size_t k = 0; k < phases.size(); ++k) {
    out << k << ',';
    if (phases[k]) out << format_angle(phases[k]->value());
    out << '\n';
  }
}

}  // namespace rope
