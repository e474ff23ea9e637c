#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "selfsim/profile.hpp"

namespace selfsim {

// Settings of the acceptance suite. Every tolerance of the suite is multiplied by
// tolerance_scale, so values above 1 loosen it.
struct AcceptanceConfig {
    int schema_version = 1;
    unsigned seed = 0;
    double tolerance_scale = 1.0;
    // supercritical fixture problem and its shooting scan
    int n = 3;
    double p = 7.0;
    bool require_supercritical = true;
    double a_min = 0.75, a_max = 8.0;
    int samples = 146;
    // subcritical scan that must stay empty
    int sub_n = 3;
    double sub_p = 2.0;
    double sub_a_min = 0.02, sub_a_max = 3.0;
    int sub_samples = 150;
    std::vector<int> only;  // criteria to run; empty runs all ten
};

struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double seconds = 0.0;
    double budget = 0.0;  // runtime limit in seconds, part of the verdict
    std::string detail;
    std::vector<std::pair<std::string, double>> metrics;
};

struct AcceptanceReport {
    std::vector<CheckResult> checks;
    bool all_pass = true;
    std::vector<double> fixture_a;  // shooting values of the profiles found by the scan
    std::string fixture_note;
};

// Initial values of the two decaying (n = 3, p = 7) profiles recorded during development.
const std::vector<double>& recorded_fixture_a();

// Runs the selected criteria in order; on_result is called as each one finishes.
AcceptanceReport run_acceptance(const AcceptanceConfig& cfg,
                                const std::function<void(const CheckResult&)>& on_result = {});

// "[PASS] 4 spectra (0.31 s / 10 s): ..." style summary line.
std::string format_check(const CheckResult& r);

}  // namespace selfsim
