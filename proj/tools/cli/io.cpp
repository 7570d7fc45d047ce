#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <string>
#include <string_view>

#include "json.hpp"

#include "cli.hpp"
#include "evseq/errors.hpp"

namespace evseq::cli {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> to_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

bool is_blank(std::string_view s) { return trim(s).empty(); }

/// Column index of zK, or 0 if the name is not of that form.
std::size_t z_index(std::string_view name) {
  if (name.size() < 2 || name[0] != 'z') return 0;
  std::size_t k = 0;
  const auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), k);
  if (ec != std::errc() || ptr != name.data() + name.size()) return 0;
  return k;
}

}  // namespace

InputFormat parse_input_format(const std::string& name) {
  if (name == "csv") return InputFormat::csv;
  if (name == "jsonl") return InputFormat::jsonl;
  throw ConfigError("unknown input format '" + name + "' (expected csv or jsonl)");
}

RecordReader::RecordReader(std::istream& in, InputFormat format, verify::ModelKind kind)
    : in_(in), format_(format), kind_(kind) {
  if (format_ == InputFormat::csv) {
    read_csv_header();
  } else if (kind_ == verify::ModelKind::regression) {
    // Peek at the first record to learn the nuisance width.
    pending_ = next_line();
    if (pending_) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(*pending_);
      } catch (const nlohmann::json::exception&) {
        throw DataError("row 1: not a JSON object");
      }
      if (!j.is_object()) throw DataError("row 1: not a JSON object");
      std::size_t d = 0;
      while (j.contains("z" + std::to_string(d + 1))) ++d;
      d_ = d;
    }
  }
}

std::optional<std::string> RecordReader::next_line() {
  if (pending_) {
    auto s = std::move(pending_);
    pending_.reset();
    return s;
  }
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (!is_blank(line)) return line;
  }
  return std::nullopt;
}

void RecordReader::read_csv_header() {
  const auto header = next_line();
  if (!header) throw DataError("input is empty (expected a CSV header)");
  const auto names = split(*header);
  columns_ = names.size();
  bool have_y = false, have_x = false;
  std::vector<std::pair<std::size_t, std::size_t>> zs;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == "y") {
      y_col_ = i;
      have_y = true;
    } else if (names[i] == "x") {
      x_col_ = i;
      have_x = true;
    } else if (const auto k = z_index(names[i]); k > 0) {
      zs.emplace_back(k, i);
    }
  }
  if (!have_y) throw DataError("CSV header has no 'y' column");
  if (kind_ == verify::ModelKind::regression) {
    if (!have_x) throw DataError("CSV header has no 'x' column (required for linreg)");
    std::sort(zs.begin(), zs.end());
    for (std::size_t j = 0; j < zs.size(); ++j) {
      if (zs[j].first != j + 1) throw DataError("CSV header: nuisance columns must be z1..zd");
      z_cols_.push_back(zs[j].second);
    }
    d_ = z_cols_.size();
  }
  header_done_ = true;
}

Record RecordReader::parse_csv(const std::string& line) {
  const auto fields = split(line);
  if (fields.size() != columns_) {
    throw DataError("row " + std::to_string(row_) + " (line " + std::to_string(line_) +
                    "): expected " + std::to_string(columns_) + " fields, got " +
                    std::to_string(fields.size()));
  }
  auto number = [&](std::size_t col, const char* what) {
    const auto v = to_double(fields[col]);
    if (!v || !std::isfinite(*v)) {
      throw DataError("row " + std::to_string(row_) + " (line " + std::to_string(line_) +
                      "): " + what + " is not a finite number: '" + std::string(fields[col]) + "'");
    }
    return *v;
  };
  Record r;
  r.row = row_;
  r.y = number(y_col_, "y");
  if (kind_ == verify::ModelKind::regression) {
    r.x = number(x_col_, "x");
    for (std::size_t c : z_cols_) r.z.push_back(number(c, "z"));
  }
  return r;
}

Record RecordReader::parse_jsonl(const std::string& line) {
  const std::string where = "row " + std::to_string(row_);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw DataError(where + ": not valid JSON");
  }
  if (!j.is_object()) throw DataError(where + ": not a JSON object");
  auto number = [&](const std::string& key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number()) throw DataError(where + ": missing numeric field '" + key + "'");
    const double v = it->get<double>();
    if (!std::isfinite(v)) throw DataError(where + ": field '" + key + "' is not finite");
    return v;
  };
  Record r;
  r.row = row_;
  r.y = number("y");
  if (kind_ == verify::ModelKind::regression) {
    r.x = number("x");
    for (std::size_t k = 1; k <= d_; ++k) r.z.push_back(number("z" + std::to_string(k)));
    if (j.contains("z" + std::to_string(d_ + 1))) {
      throw DataError(where + ": more nuisance fields than the first record");
    }
  }
  return r;
}

std::optional<Record> RecordReader::next() {
  const auto line = next_line();
  if (!line) return std::nullopt;
  ++row_;
  Record r = format_ == InputFormat::csv ? parse_csv(*line) : parse_jsonl(*line);
  if (kind_ == verify::ModelKind::bernoulli && r.y != 0.0 && r.y != 1.0) {
    throw DataError("row " + std::to_string(row_) + ": Bernoulli observations must be 0 or 1");
  }
  return r;
}

PriorGrid read_prior(std::istream& in) {
  std::string line;
  bool header = false;
  std::vector<PriorAtom> atoms;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto fields = split(line);
    if (!header) {
      if (fields.size() != 2 || fields[0] != "delta" || fields[1] != "weight") {
        throw ConfigError("prior file: header must be 'delta,weight'");
      }
      header = true;
      continue;
    }
    const auto e = fields.size() == 2 ? to_double(fields[0]) : std::nullopt;
    const auto w = fields.size() == 2 ? to_double(fields[1]) : std::nullopt;
    if (!e || !w) throw ConfigError("prior file: malformed line " + std::to_string(line_no));
    atoms.push_back({*e, *w});
  }
  if (!header) throw ConfigError("prior file is empty");
  if (atoms.empty()) throw ConfigError("prior file has no atoms");
  try {
    return PriorGrid::normalized(std::move(atoms), 1e-6);
  } catch (const Error& e) {
    throw ConfigError(std::string("prior file: ") + e.what());
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trajectory_row(const TrajectoryRecord& r) {
  const auto e = evalue(r.log_e);
  std::string s = std::to_string(r.n);
  s += ',';
  s += format_number(r.statistic);
  s += ',';
  s += format_number(r.log_e / std::log(10.0));
  s += ',';
  s += format_number(e.value);
  s += ',';
  s += r.rejected ? "true" : "false";
  return s;
}

std::vector<TrajectoryRecord> read_trajectory(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<TrajectoryRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    if (!header) {
      if (trim(line) != kTrajectoryHeader) {
        throw DataError(std::string("trajectory: header must be '") + kTrajectoryHeader + "'");
      }
      header = true;
      continue;
    }
    const auto fields = split(line);
    const std::string where = "trajectory line " + std::to_string(line_no);
    if (fields.size() != 5) throw DataError(where + ": expected 5 fields");
    std::size_t n = 0;
    const auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), n);
    if (ec != std::errc() || ptr != fields[0].data() + fields[0].size() || n == 0) {
      throw DataError(where + ": n must be a positive integer");
    }
    if (!out.empty() && n <= out.back().n) throw DataError(where + ": n must increase");
    const auto stat = to_double(fields[1]);
    const auto log10_e = to_double(fields[2]);
    if (!stat || !log10_e || std::isnan(*log10_e) || !to_double(fields[3])) {
      throw DataError(where + ": malformed number");
    }
    bool rejected;
    if (fields[4] == "true") {
      rejected = true;
    } else if (fields[4] == "false") {
      rejected = false;
    } else {
      throw DataError(where + ": rejected must be true or false");
    }
    out.push_back({n, *stat, *log10_e * std::log(10.0), rejected});
  }
  if (!header) throw DataError("trajectory is empty");
  if (out.empty()) throw DataError("trajectory has no rows");
  return out;
}

}  // namespace evseq::cli
