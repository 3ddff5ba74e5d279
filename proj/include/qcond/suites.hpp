#pragma once

// Randomized property suites behind `qcond check`. Each trial draws from a
// per-trial source derived from the seed, so a report depends only on
// (suite, seed, trials, dims).

#include <cstdint>
#include <string>
#include <vector>

namespace qcond {

struct SuiteOptions {
  std::uint64_t seed = 42;
  int trials = 0;          // 0: the suite's default count
  std::vector<int> dims;   // empty: the suite's default dimensions
};

struct SuiteMetric {
  std::string name;
  double max_deviation = 0.0;
  double threshold = 0.0;
  // Counter-style metrics (mismatched verdicts, unexpected errors) use
  // max_deviation as a count with threshold 0.
  bool ok() const { return max_deviation <= threshold; }
};

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 0;
  int trials = 0;
  std::vector<SuiteMetric> metrics;
  std::vector<std::string> notes;
  double seconds = 0.0;

  bool passed() const;
  const SuiteMetric& metric(const std::string& name) const;
};

std::vector<std::string> suite_names();
// Throws std::invalid_argument for an unknown name.
SuiteReport run_suite(const std::string& name, const SuiteOptions& options);

}  // namespace qcond
