#include "svilab/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <system_error>

#include <fmt/format.h>
#include <json.hpp>

namespace svilab {

std::string format_real(double value) { return fmt::format("{:.17g}", value); }

namespace {

std::string optional_real(const std::optional<double>& v) {
  return v ? format_real(*v) : std::string();
}

}  // namespace

void write_csv(std::ostream& out, const TraceTable& table) {
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
    out << (i ? "," : "") << kCsvColumns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    const TraceRecord& r = row.record;
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", row.run_id, row.algorithm,
                       row.replication, r.k, optional_real(r.rel_dist),
                       optional_real(r.rel_dist_avg), optional_real(r.residual),
                       optional_real(r.gap_lb), r.counters.grad_evals, r.counters.projections,
                       r.counters.samples_drawn,
                       r.wall_ns ? std::to_string(*r.wall_ns) : std::string());
  }
}

void write_jsonl(std::ostream& out, const TraceTable& table) {
  const auto opt = [](const auto& v) -> nlohmann::json {
    if (v) return *v;
    return nullptr;
  };
  for (const auto& row : table.rows) {
    const TraceRecord& r = row.record;
    nlohmann::ordered_json j;
    j["run_id"] = row.run_id;
    j["algorithm"] = row.algorithm;
    j["replication"] = row.replication;
    j["k"] = r.k;
    j["rel_dist"] = opt(r.rel_dist);
    j["rel_dist_avg"] = opt(r.rel_dist_avg);
    j["residual"] = opt(r.residual);
    j["gap_lb"] = opt(r.gap_lb);
    j["grad_evals"] = r.counters.grad_evals;
    j["projections"] = r.counters.projections;
    j["samples_drawn"] = r.counters.samples_drawn;
    j["wall_ns"] = opt(r.wall_ns);
    out << j.dump() << '\n';
  }
}

void write_trace_file(const std::filesystem::path& path, const TraceTable& table,
                      OutputFormat format) {
  std::filesystem::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    if (format == OutputFormat::csv) write_csv(out, table);
    else write_jsonl(out, table);
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError(fmt::format("failed while writing '{}'", path.string()));
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw IoError(fmt::format("cannot move trace into '{}': {}", path.string(), ec.message()));
  }
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
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

template <typename T>
T parse_number(std::string_view field, int line, int column) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(fmt::format("line {}, column {}: '{}' is not a number", line, column, field),
                     line, column);
  }
  return value;
}

std::optional<double> parse_optional_real(std::string_view field, int line, int column) {
  if (field.empty()) return std::nullopt;
  return parse_number<double>(field, line, column);
}

}  // namespace

std::vector<TraceRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty trace", 1, 1);
  const auto header = split(line);
  if (header.size() != kCsvColumns.size()) throw ParseError("unexpected header", 1, 1);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] != kCsvColumns[i]) {
      throw ParseError(fmt::format("header column {} is '{}', expected '{}'", i + 1, header[i],
                                   kCsvColumns[i]),
                       1, static_cast<int>(i + 1));
    }
  }
  std::vector<TraceRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != kCsvColumns.size()) {
      throw ParseError(fmt::format("line {}: expected {} fields, got {}", lineno,
                                   kCsvColumns.size(), f.size()),
                       lineno, 1);
    }
    TraceRow row;
    row.run_id = parse_number<std::size_t>(f[0], lineno, 1);
    row.algorithm = std::string(f[1]);
    row.replication = parse_number<std::uint64_t>(f[2], lineno, 3);
    TraceRecord& r = row.record;
    r.k = parse_number<std::uint64_t>(f[3], lineno, 4);
    r.rel_dist = parse_optional_real(f[4], lineno, 5);
    r.rel_dist_avg = parse_optional_real(f[5], lineno, 6);
    r.residual = parse_optional_real(f[6], lineno, 7);
    r.gap_lb = parse_optional_real(f[7], lineno, 8);
    r.counters.grad_evals = parse_number<std::uint64_t>(f[8], lineno, 9);
    r.counters.projections = parse_number<std::uint64_t>(f[9], lineno, 10);
    r.counters.samples_drawn = parse_number<std::uint64_t>(f[10], lineno, 11);
    if (!f[11].empty()) r.wall_ns = parse_number<std::int64_t>(f[11], lineno, 12);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace svilab
