#include "grenkit/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace grenkit {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& field, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw CsvError(line, "cannot parse number: '" + field + "'");
  }
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;  // numeric body
};

Table read_table(const std::string& path, const std::string& col0,
                 const std::string& col1) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError(0, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw CsvError(1, "missing header");
  Table t;
  t.header = split_line(strip_cr(line));
  if (t.header.size() < 2 || t.header[0] != col0 || t.header[1] != col1) {
    throw CsvError(1, "header must start with '" + col0 + "," + col1 + "'");
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != t.header.size()) {
      throw CsvError(lineno, "expected " + std::to_string(t.header.size()) +
                                 " fields, got " +
                                 std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f, lineno));
    t.rows.push_back(std::move(row));
  }
  if (t.rows.empty()) throw CsvError(lineno + 1, "no data rows");
  return t;
}

}  // namespace

SurvivalSample read_survival_csv(const std::string& path) {
  const Table t = read_table(path, "y", "delta");
  std::vector<double> y;
  std::vector<int> delta;
  std::vector<std::vector<double>> w;
  const std::size_t d = t.header.size() - 2;
  int lineno = 1;
  for (const auto& row : t.rows) {
    ++lineno;
    if (!(row[0] > 0.0) || !std::isfinite(row[0])) {
      throw CsvError(lineno, "y must be positive and finite");
    }
    if (row[1] != 0.0 && row[1] != 1.0) {
      throw CsvError(lineno, "delta must be 0 or 1");
    }
    y.push_back(row[0]);
    delta.push_back(static_cast<int>(row[1]));
    if (d > 0) w.emplace_back(row.begin() + 2, row.end());
  }
  return SurvivalSample(std::move(y), std::move(delta), std::move(w));
}

RegressionSample read_regression_csv(const std::string& path) {
  const Table t = read_table(path, "a", "y");
  RegressionSample out;
  const std::size_t d = t.header.size() - 2;
  for (const auto& row : t.rows) {
    out.a.push_back(row[0]);
    out.y.push_back(row[1]);
    if (d > 0) out.w.emplace_back(row.begin() + 2, row.end());
  }
  return out;
}

void write_survival_csv(const SurvivalSample& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "y,delta";
  for (std::size_t k = 0; k < s.covariate_dim(); ++k) {
    out << ",w" << k + 1;
  }
  out << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << format_double(s.y[i]) << ',' << s.delta[i];
    if (!s.w.empty()) {
      for (double v : s.w[i]) out << ',' << format_double(v);
    }
    out << '\n';
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace grenkit
