// Acceptance suite: one line per criterion, nonzero exit if any criterion fails.

#include "reflex/validation.hpp"

#include <iostream>

int main() {
    reflex::ValidationOptions options;
    int failed = 0;
    for (int id = 1; id <= reflex::kCriterionCount; ++id) {
        const auto r = reflex::run_criterion(id, options);
        std::cout << r.summary_line() << std::endl;
        failed += !r.pass();
    }
    std::cout << (reflex::kCriterionCount - failed) << "/" << reflex::kCriterionCount << " criteria pass" << std::endl;
    return failed == 0 ? 0 : 1;
}
