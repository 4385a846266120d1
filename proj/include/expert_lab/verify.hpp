#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace expertlab {

struct CheckResult {
  int criterion = 0;
  std::string name;
  bool pass = false;
  double observed = 0.0;
  double tolerance = 0.0;
  std::string note;
};

struct AcceptanceOptions {
  std::uint64_t seed = 424242;
  bool smoke = false;          // scaled-down inputs for a quick CLI pass
  int threads = 0;             // 0 resolves EXPERT_LAB_THREADS, else 1
  std::vector<int> criteria;   // subset of 1..10; empty runs all
};

/// Run the acceptance criteria. Full mode uses the pinned sizes and
/// tolerances; smoke mode shrinks sample counts (Monte Carlo tolerances are
/// widened by the measured standard error so the quick pass stays sound).
std::vector<CheckResult> run_acceptance(const AcceptanceOptions& opt);

/// One line per criterion, aggregated over its subchecks.
void print_report(const std::vector<CheckResult>& results);

/// Number of criteria with at least one failing subcheck.
int count_failures(const std::vector<CheckResult>& results);

}  // namespace expertlab
