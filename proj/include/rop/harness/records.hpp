#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace rop::harness {

inline constexpr int kCsvSchemaVersion = 1;

/// One Monte Carlo trial. `x` is the swept parameter of the experiment (C, n,
/// rank, t, ...), named in the manifest; `aux` carries an experiment-specific
/// companion value such as a theoretical envelope.
struct ExperimentRecord {
  std::string experiment;
  std::int64_t trial = 0;
  std::uint64_t seed = 0;
  std::string rng;
  std::int64_t p1 = 0;
  std::int64_t p2 = 0;
  std::int64_t r = 0;
  std::int64_t n = 0;
  std::string ensemble;
  std::string distribution;
  std::string noise;
  double noise_scale = 0.0;
  std::string estimator;
  double x = 0.0;
  double aux = 0.0;
  double squared_frobenius_loss = 0.0;
  double relative_error = 0.0;
  bool success = false;
  std::int64_t iterations = 0;
  bool converged = false;
  double wall_ms = 0.0;

  friend bool operator==(const ExperimentRecord&, const ExperimentRecord&) = default;
};

const std::vector<std::string>& record_columns();
std::string csv_header();
std::string serialize(const ExperimentRecord& rec);
ExperimentRecord parse_record(std::string_view line);

void write_records(std::ostream& out, const std::vector<ExperimentRecord>& rows);
std::vector<ExperimentRecord> read_records(std::istream& in);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

/// Per-(experiment, ensemble, estimator, n, x) aggregates, in sorted key order.
struct SummaryRow {
  std::string experiment;
  std::string ensemble;
  std::string estimator;
  std::int64_t n = 0;
  double x = 0.0;
  std::int64_t trials = 0;
  std::int64_t converged = 0;
  double success_rate = 0.0;
  double mean_loss = 0.0;
  double mean_relative_error = 0.0;
  double mean_aux = 0.0;
};

std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& rows);
void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary(std::istream& in);

}  // namespace rop::harness
