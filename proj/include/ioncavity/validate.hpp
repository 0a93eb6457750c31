#pragma once

#include <string>
#include <vector>

#include "ioncavity/model.hpp"

namespace ioncavity::validate {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail; // measured defect or failure reason
};

// Fast self-contained invariant checks: angular-momentum algebra, generator
// structure, analytic steady states, quadrature moments, and the physicality
// of a full-system solve with the given parameters.  An exception inside a
// check marks it failed; the suite itself never throws.
std::vector<CheckResult> run_invariant_suite(const model::SystemParams& p);

bool all_passed(const std::vector<CheckResult>& checks);

} // namespace ioncavity::validate
