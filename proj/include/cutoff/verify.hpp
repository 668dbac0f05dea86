#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cutoff {

struct VerifyCheck {
    std::string name;
    std::string suite;  // "invariants" | "oracles"
    bool pass = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    int failures = 0;
    std::string text;  // deterministic pass/fail listing
};

// Runs the property suites at pinned seeds. suite: invariants | oracles | all.
VerifyReport run_verify(const std::string& suite, uint64_t seed, int workers);

}  // namespace cutoff
