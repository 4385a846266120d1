// Acceptance suite runner: one summary line per criterion, nonzero exit on
// any failing criterion.
//
//   expert_lab_acceptance [--smoke] [--seed S] [--criterion N ...]

#include "expert_lab/verify.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

int main(int argc, char** argv) {
  expertlab::AcceptanceOptions opt;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--smoke") == 0) {
      opt.smoke = true;
    } else if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc) {
      opt.seed = std::strtoull(argv[++i], nullptr, 10);
    } else if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      opt.criteria.push_back(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--smoke] [--seed S] [--criterion N ...]\n", argv[0]);
      return 2;
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  const auto results = expertlab::run_acceptance(opt);
  expertlab::print_report(results);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const int failures = expertlab::count_failures(results);
  std::printf("%d criteria with failures, %.1f s total (%s run, seed %llu)\n", failures, secs,
              opt.smoke ? "smoke" : "full", static_cast<unsigned long long>(opt.seed));
  return failures;
}
