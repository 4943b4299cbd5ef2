#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mtt {

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Oracle cross-check suites: relaxation vs vertex enumeration, exact 0-1
// solve vs exhaustive enumeration, degenerate filter vs the textbook filter,
// assignment metric vs brute-force permutations, sampled moment laws vs the
// recursions. Deterministic for a fixed seed.
std::vector<SuiteResult> run_selftest(std::uint64_t seed = 7);

}  // namespace mtt
