#pragma once

// JSON for single-site operators and CSV rows for squeezing traces.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsq/readout.hpp"

namespace qsq {

using Json = nlohmann::json;

/// {"dim": d, "re": [...], "im": [...]} with row-major d*d arrays.
Json operator_to_json(const CMatrix& op);
CMatrix operator_from_json(const Json& j);

/// Amplitudes as [[re, im], ...].
Json vector_to_json(const CVector& v);
CVector vector_from_json(const Json& j);

/// Shortest representation that round-trips; "inf" / "nan" for non-finite values.
std::string format_double(double x);

/// Trace columns for k parameters: t, xi2, xi2_err, kappa_opt, C upper triangle (row-major), G diagonal.
std::vector<std::string> trace_columns(const std::vector<std::string>& labels);
std::vector<double> trace_row(const SqueezingRecord& r);
void write_trace_csv(std::ostream& os, const std::vector<SqueezingRecord>& records,
                     const std::vector<std::string>& labels, const std::string& schema_line);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  /// Index of a named column; throws ConfigError when absent.
  std::size_t column(const std::string& name) const;
};

/// Lines starting with '#' are skipped; the first remaining line is the header.
CsvTable read_csv(std::istream& is);

}  // namespace qsq
