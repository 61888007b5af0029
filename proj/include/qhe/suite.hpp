#pragma once
// Validation suite: the nine release criteria, shared by the CLI `validate`
// subcommand and the standalone acceptance binary.  Each criterion is a
// self-contained check with a one-line verdict; `quick` runs a reduced grid
// where the full version would be slow, and marks itself accordingly.

#include <cstdint>
#include <string>
#include <vector>

namespace qhe::suite {

struct CheckLine {
    std::string name;    // short identifier of the sub-check
    bool passed = false;
    std::string detail;  // measured value / tolerance summary
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    bool skipped = false;  // not run at this level; does not count as failure
    double seconds = 0.0;
    std::string detail;             // one-line verdict
    std::vector<CheckLine> checks;  // individual sub-checks
};

struct SuiteOptions {
    bool quick = false;      // reduced grids, skips the long adiabatic check
    std::uint64_t seed = 1;  // Monte Carlo seed
    int jobs = 1;            // Monte Carlo worker threads
};

// Criteria are numbered 1..9; ids() lists them in run order.
const std::vector<int>& criterion_ids();
std::string criterion_title(int id);

CriterionResult run_criterion(int id, const SuiteOptions& opt);
std::vector<CriterionResult> run_all(const SuiteOptions& opt);

}  // namespace qhe::suite
