#pragma once

#include "calab/isomorphic.hpp"
#include "calab/report.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace calab {

struct Timing {
    std::string label;
    double seconds = 0.0;
    double budget = 0.0; // 0: no budget
};

struct CriterionResult {
    int id = 0;
    std::string title;
    std::vector<Check> checks;
    Json details = Json::object();
    std::vector<Timing> timings;

    bool pass() const { return all_pass(checks); }
    bool within_budget() const;
};

struct AcceptanceOptions {
    std::uint64_t seed = 0;
    int threads = 1;
    std::vector<int> criteria; // empty: all numerical criteria
};

/// Criteria 1..13 are numerical; 14 (byte-identical reruns) is checked by the caller.
constexpr int numerical_criteria = 13;

CriterionResult run_criterion(int id, const AcceptanceOptions& options);
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

Json to_json(const CriterionResult& r);

/// Bound records as checks with the relative slack as tolerance.
std::vector<Check> bound_checks(const IsoVerification& v, const std::string& prefix);

} // namespace calab
