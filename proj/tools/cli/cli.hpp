#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evseq/core.hpp"
#include "evseq/verify.hpp"

namespace evseq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailedCheck = 1;
inline constexpr int kExitConfig = 64;
inline constexpr int kExitData = 65;
inline constexpr int kExitInternal = 70;

/// Entry point shared by the executable and the in-process tests.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err);

// ---------------------------------------------------------------------------
// Input

enum class InputFormat { csv, jsonl };

InputFormat parse_input_format(const std::string& name);

struct Record {
  std::size_t row = 0;  ///< 1-based data row
  double y = 0.0;
  double x = 0.0;
  std::vector<double> z;
};

/// Streams observations from CSV (header line first) or JSON lines. For the
/// regression model the nuisance width is inferred from columns z1..zd.
class RecordReader {
 public:
  RecordReader(std::istream& in, InputFormat format, verify::ModelKind kind);

  /// Throws DataError naming the row on malformed input.
  std::optional<Record> next();
  std::size_t nuisance_dim() const { return d_; }

 private:
  std::optional<std::string> next_line();
  Record parse_csv(const std::string& line);
  Record parse_jsonl(const std::string& line);
  void read_csv_header();

  std::istream& in_;
  InputFormat format_;
  verify::ModelKind kind_;
  std::size_t line_ = 0;
  std::size_t row_ = 0;
  std::size_t d_ = 0;
  bool header_done_ = false;
  std::size_t columns_ = 0;
  std::size_t y_col_ = 0;
  std::size_t x_col_ = 0;
  std::vector<std::size_t> z_cols_;
  std::optional<std::string> pending_;
};

/// CSV with header `delta,weight`; weights within 1e-6 of summing to 1 are
/// renormalized. Throws ConfigError otherwise.
PriorGrid read_prior(std::istream& in);

// ---------------------------------------------------------------------------
// Trajectories

/// Trajectory CSV header written by `run` and read by `plot`.
inline constexpr const char* kTrajectoryHeader = "n,statistic,log10_e,e,rejected";

/// %.17g with "nan", "inf" and "-inf" spelled out.
std::string format_number(double v);

std::string trajectory_row(const TrajectoryRecord& r);

/// Throws DataError on a bad header, malformed row, or no rows at all.
std::vector<TrajectoryRecord> read_trajectory(std::istream& in);

/// Standalone SVG of log10 e against n with the 1/alpha threshold and a
/// marker at the first crossing.
std::string render_svg(std::span<const TrajectoryRecord> records, double alpha);

}  // namespace evseq::cli
