#include "rop/harness/records.hpp"

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <tuple>

namespace rop::harness {

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(std::string_view s, std::string_view col) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("csv: bad number in column " + std::string(col));
  }
  return v;
}

template <typename Int>
Int parse_int(std::string_view s, std::string_view col) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("csv: bad integer in column " + std::string(col));
  }
  return v;
}

bool parse_bool(std::string_view s, std::string_view col) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw std::invalid_argument("csv: bad flag in column " + std::string(col));
}

const std::string& checked(const std::string& s) {
  if (s.find_first_of(",\n\r\"") != std::string::npos) {
    throw std::invalid_argument("csv: text field contains a separator: " + s);
  }
  return s;
}

const std::vector<std::string>& summary_columns() {
  static const std::vector<std::string> cols = {
      "experiment", "ensemble",    "estimator", "n",
      "x",          "trials",      "converged", "success_rate",
      "mean_loss",  "mean_relative_error",     "mean_aux"};
  return cols;
}

std::string join(const std::vector<std::string>& cols) {
  std::string s;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) s += ',';
    s += cols[i];
  }
  return s;
}

void expect_header(std::istream& in, const std::string& header) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw std::invalid_argument("csv: unexpected header");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols = {
      "experiment", "trial",    "seed",         "rng",
      "p1",         "p2",       "r",            "n",
      "ensemble",   "distribution", "noise",    "noise_scale",
      "estimator",  "x",        "aux",          "squared_frobenius_loss",
      "relative_error", "success", "iterations", "converged",
      "wall_ms"};
  return cols;
}

std::string csv_header() { return join(record_columns()); }

std::string serialize(const ExperimentRecord& r) {
  std::string s;
  auto add = [&s](const std::string& v) {
    if (!s.empty()) s += ',';
    s += v;
  };
  add(checked(r.experiment));
  add(std::to_string(r.trial));
  add(std::to_string(r.seed));
  add(checked(r.rng));
  add(std::to_string(r.p1));
  add(std::to_string(r.p2));
  add(std::to_string(r.r));
  add(std::to_string(r.n));
  add(checked(r.ensemble));
  add(checked(r.distribution));
  add(checked(r.noise));
  add(format_double(r.noise_scale));
  add(checked(r.estimator));
  add(format_double(r.x));
  add(format_double(r.aux));
  add(format_double(r.squared_frobenius_loss));
  add(format_double(r.relative_error));
  add(r.success ? "1" : "0");
  add(std::to_string(r.iterations));
  add(r.converged ? "1" : "0");
  add(format_double(r.wall_ms));
  return s;
}

ExperimentRecord parse_record(std::string_view line) {
  const auto f = split_line(line);
  const auto& cols = record_columns();
  if (f.size() != cols.size()) throw std::invalid_argument("csv: wrong field count");
  ExperimentRecord r;
  std::size_t i = 0;
  r.experiment = f[i++];
  r.trial = parse_int<std::int64_t>(f[i], cols[i]); ++i;
  r.seed = parse_int<std::uint64_t>(f[i], cols[i]); ++i;
  r.rng = f[i++];
  r.p1 = parse_int<std::int64_t>(f[i], cols[i]); ++i;
  r.p2 = parse_int<std::int64_t>(f[i], cols[i]); ++i;
  r.r = parse_int<std::int64_t>(f[i], cols[i]); ++i;
  r.n = parse_int<std::int64_t>(f[i], cols[i]); ++i;
  r.ensemble = f[i++];
  r.distribution = f[i++];
  r.noise = f[i++];
  r.noise_scale = parse_double(f[i], cols[i]); ++i;
  r.estimator = f[i++];
  r.x = parse_double(f[i], cols[i]); ++i;
  r.aux = parse_double(f[i], cols[i]); ++i;
  r.squared_frobenius_loss = parse_double(f[i], cols[i]); ++i;
  r.relative_error = parse_double(f[i], cols[i]); ++i;
  r.success = parse_bool(f[i], cols[i]); ++i;
  r.iterations = parse_int<std::int64_t>(f[i], cols[i]); ++i;
  r.converged = parse_bool(f[i], cols[i]); ++i;
  r.wall_ms = parse_double(f[i], cols[i]);
  return r;
}

void write_records(std::ostream& out, const std::vector<ExperimentRecord>& rows) {
  out << csv_header() << '\n';
  for (const auto& r : rows) out << serialize(r) << '\n';
}

std::vector<ExperimentRecord> read_records(std::istream& in) {
  expect_header(in, csv_header());
  std::vector<ExperimentRecord> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(parse_record(line));
  }
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& rows) {
  using Key = std::tuple<std::string, std::string, std::string, std::int64_t, double>;
  std::map<Key, SummaryRow> groups;
  for (const auto& r : rows) {
    const Key key{r.experiment, r.ensemble, r.estimator, r.n, r.x};
    auto [it, fresh] = groups.try_emplace(key);
    SummaryRow& s = it->second;
    if (fresh) {
      s.experiment = r.experiment;
      s.ensemble = r.ensemble;
      s.estimator = r.estimator;
      s.n = r.n;
      s.x = r.x;
    }
    ++s.trials;
    s.converged += r.converged ? 1 : 0;
    s.success_rate += r.success ? 1.0 : 0.0;
    s.mean_loss += r.squared_frobenius_loss;
    s.mean_relative_error += r.relative_error;
    s.mean_aux += r.aux;
  }
  std::vector<SummaryRow> out;
  for (auto& [key, s] : groups) {
    const double t = static_cast<double>(s.trials);
    s.success_rate /= t;
    s.mean_loss /= t;
    s.mean_relative_error /= t;
    s.mean_aux /= t;
    out.push_back(s);
  }
  return out;
}

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << join(summary_columns()) << '\n';
  for (const auto& s : rows) {
    out << checked(s.experiment) << ',' << checked(s.ensemble) << ',' << checked(s.estimator)
        << ',' << s.n << ',' << format_double(s.x) << ',' << s.trials << ',' << s.converged << ','
        << format_double(s.success_rate) << ',' << format_double(s.mean_loss) << ','
        << format_double(s.mean_relative_error) << ',' << format_double(s.mean_aux) << '\n';
  }
}

std::vector<SummaryRow> read_summary(std::istream& in) {
  expect_header(in, join(summary_columns()));
  const auto& cols = summary_columns();
  std::vector<SummaryRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_line(line);
    if (f.size() != cols.size()) throw std::invalid_argument("csv: wrong field count");
    SummaryRow s;
    s.experiment = f[0];
    s.ensemble = f[1];
    s.estimator = f[2];
    s.n = parse_int<std::int64_t>(f[3], cols[3]);
    s.x = parse_double(f[4], cols[4]);
    s.trials = parse_int<std::int64_t>(f[5], cols[5]);
    s.converged = parse_int<std::int64_t>(f[6], cols[6]);
    s.success_rate = parse_double(f[7], cols[7]);
    s.mean_loss = parse_double(f[8], cols[8]);
    s.mean_relative_error = parse_double(f[9], cols[9]);
    s.mean_aux = parse_double(f[10], cols[10]);
    rows.push_back(std::move(s));
  }
  return rows;
}

}  // namespace rop::harness
