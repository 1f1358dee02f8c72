// Acceptance gate: runs the eight suite criteria and prints one line per
// criterion. Exit status 0 iff all pass.
#include <iostream>

#include "billiards/suite.hpp"

int main() {
    std::vector<billiards::CriterionResult> results =
        billiards::run_acceptance(&std::cout);
    int failed = 0;
    for (const billiards::CriterionResult& r : results)
        if (!r.passed) ++failed;
    if (failed) {
        std::cout << failed << " of " << results.size()
                  << " criteria failed\n";
        return 1;
    }
    std::cout << "all " << results.size() << " criteria passed\n";
    return 0;
}
