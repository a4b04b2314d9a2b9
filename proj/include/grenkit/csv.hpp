#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "grenkit/survival.hpp"

namespace grenkit {

// Input-format violation carrying the offending 1-based line number.
struct CsvError : std::runtime_error {
  CsvError(int line_number, const std::string& message)
      : std::runtime_error("line " + std::to_string(line_number) + ": " +
                           message),
        line(line_number) {}
  int line;
};

struct RegressionSample {
  std::vector<double> a;
  std::vector<double> y;
  std::vector<std::vector<double>> w;
};

// Schema `y,delta[,w1..wd]` with header; delta in {0,1}.
SurvivalSample read_survival_csv(const std::string& path);
// Schema `a,y[,w1..wd]` with header.
RegressionSample read_regression_csv(const std::string& path);

void write_survival_csv(const SurvivalSample& s, const std::string& path);

// Doubles rendered with 17 significant digits (round-trip exact).
std::string format_double(double v);

}  // namespace grenkit
