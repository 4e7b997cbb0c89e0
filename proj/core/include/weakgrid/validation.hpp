#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace weakgrid::validation {

struct SuiteReport {
  std::string name;
  int passed = 0;
  int failed = 0;
  std::string first_failure;  // empty when all passed
  double seconds = 0.0;

  [[nodiscard]] bool ok() const { return failed == 0 && passed > 0; }
};

inline constexpr int kDefaultSamples = 1000;

// Fast property suites. Each random sample counts as one check.
SuiteReport transforms(std::uint64_t seed, int samples = kDefaultSamples);
/// Frame rotation invariance of (p, q) plus agreement of dq power with the
/// phase-domain power, which pins the transform scaling.
SuiteReport power_invariance(std::uint64_t seed, int samples = kDefaultSamples);
/// Power-controller back-substitution: the reference current reproduces the
/// set points exactly.
SuiteReport power_reference(std::uint64_t seed, int samples = kDefaultSamples);
SuiteReport compensation_identity(std::uint64_t seed, int samples = kDefaultSamples);
/// Lock from +-1 rad on a clean 1 pu source with default gains.
SuiteReport pll_lock();

std::vector<SuiteReport> run_all(std::uint64_t seed);

/// One line per suite plus a summary line.
std::string format(const std::vector<SuiteReport>& reports);

}  // namespace weakgrid::validation
