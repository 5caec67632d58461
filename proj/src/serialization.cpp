#include "qsq/serialization.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace qsq {

Json operator_to_json(const CMatrix& op) {
  if (op.rows() != op.cols()) throw DimensionMismatch("operator must be square");
  const Eigen::Index d = op.rows();
  std::vector<double> re, im;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      re.push_back(op(i, j).real());
      im.push_back(op(i, j).imag());
    }
  }
  return Json{{"dim", d}, {"re", re}, {"im", im}};
}

CMatrix operator_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("re") || !j.contains("im")) {
    throw ConfigError("operator JSON needs dim, re and im");
  }
  for (const auto& [key, _] : j.items()) {
    if (key != "dim" && key != "re" && key != "im") throw ConfigError("unknown operator key '" + key + "'");
  }
  const int d = j.at("dim").get<int>();
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  if (d < 1 || re.size() != static_cast<std::size_t>(d) * d || im.size() != re.size()) {
    throw ConfigError("operator arrays must hold dim*dim entries");
  }
  CMatrix m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int k = 0; k < d; ++k) m(i, k) = cd(re[i * d + k], im[i * d + k]);
  }
  return m;
}

Json vector_to_json(const CVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v[i].real(), v[i].imag()});
  return out;
}

CVector vector_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("amplitudes must be a non-empty array");
  CVector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Json& e = j[i];
    if (e.is_number()) {
      v[i] = e.get<double>();
    } else if (e.is_array() && e.size() == 2) {
      v[i] = cd(e[0].get<double>(), e[1].get<double>());
    } else {
      throw ConfigError("amplitude entries must be numbers or [re, im] pairs");
    }
  }
  return v;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::vector<std::string> trace_columns(const std::vector<std::string>& labels) {
  std::vector<std::string> cols{"t", "xi2", "xi2_err", "kappa_opt"};
  const std::size_t k = labels.size();
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) cols.push_back("C" + labels[a] + labels[b]);
  }
  for (std::size_t a = 0; a < k; ++a) cols.push_back("G" + labels[a] + labels[a]);
  return cols;
}

std::vector<double> trace_row(const SqueezingRecord& r) {
  std::vector<double> row{r.time, r.singular ? INFINITY : r.xi2, r.xi2_err, r.kappa_opt};
  const Eigen::Index k = r.C.rows();
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a; b < k; ++b) row.push_back(r.C(a, b));
  }
  for (Eigen::Index a = 0; a < k; ++a) row.push_back(r.G(a, a));
  return row;
}

void write_trace_csv(std::ostream& os, const std::vector<SqueezingRecord>& records,
                     const std::vector<std::string>& labels, const std::string& schema_line) {
  if (!schema_line.empty()) os << "# " << schema_line << '\n';
  const auto cols = trace_columns(labels);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : records) {
    const auto row = trace_row(r);
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << '\n';
  }
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ConfigError("CSV has no column '" + name + "'");
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!have_header) {
      t.header = cells;
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) throw ConfigError("CSV row width differs from header");
    std::vector<double> row;
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
        if (used != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw ConfigError("CSV cell '" + c + "' is not a number");
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw ConfigError("CSV has no header");
  return t;
}

}  // namespace qsq
