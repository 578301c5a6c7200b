#pragma once
#include "ledlink/config.hpp"
#include <string>
#include <vector>

namespace ledlink {

struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
    double budget_seconds = 0.0;
};

// The ten release checks. Each pins its own tolerances; `detail` carries the
// measured values so a failure is diagnosable from the one-line report.
std::vector<CheckResult> run_acceptance_checks(const ExperimentConfig& cfg);

// Individual checks (exposed for targeted testing).
CheckResult check_scale_sweep_shape(const ExperimentConfig& cfg);        // 1
CheckResult check_subcarrier_count_invariance(const ExperimentConfig& cfg); // 2
CheckResult check_jow_vs_ofdm_ratio(const ExperimentConfig& cfg);        // 3
CheckResult check_ofdm_vs_unequalized_ratio(const ExperimentConfig& cfg); // 4
CheckResult check_bussgang_regression(const ExperimentConfig& cfg);      // 5
CheckResult check_clip_variance_quadrature(const ExperimentConfig& cfg); // 6
CheckResult check_mse_prediction(const ExperimentConfig& cfg);           // 7
CheckResult check_ber_prediction(const ExperimentConfig& cfg);           // 8
CheckResult check_output_determinism(const ExperimentConfig& cfg);       // 9
CheckResult check_design_properties(const ExperimentConfig& cfg);        // 10

} // namespace ledlink
