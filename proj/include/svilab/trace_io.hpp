#pragma once

// Trace serialization. CSV columns are fixed:
//   run_id,algorithm,replication,k,rel_dist,rel_dist_avg,residual,gap_lb,
//   grad_evals,projections,samples_drawn,wall_ns
// Reals use 17 significant digits; missing values are empty fields (null in
// json-lines).

#include "svilab/benchmarks.hpp"
#include "svilab/config.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace svilab {

class IoError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::array<std::string_view, 12> kCsvColumns = {
    "run_id",   "algorithm", "replication", "k",          "rel_dist",      "rel_dist_avg",
    "residual", "gap_lb",    "grad_evals",  "projections", "samples_drawn", "wall_ns"};

std::string format_real(double value);

void write_csv(std::ostream& out, const TraceTable& table);
void write_jsonl(std::ostream& out, const TraceTable& table);

/// Writes through a temporary sibling file and renames it into place, so a
/// failed write leaves nothing behind. Throws IoError naming the path.
void write_trace_file(const std::filesystem::path& path, const TraceTable& table,
                      OutputFormat format);

/// Parses a CSV produced by write_csv. Throws ParseError on malformed input.
std::vector<TraceRow> read_csv(std::istream& in);

}  // namespace svilab
