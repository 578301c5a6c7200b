#pragma once
#include "ledlink/config.hpp"
#include "ledlink/dco_ofdm.hpp"
#include "ledlink/montecarlo.hpp"
#include "ledlink/mpam_jow.hpp"
#include <limits>
#include <string>
#include <vector>

namespace ledlink {

// One point of the modulation-scale sweep at fixed symbol time.
struct Fig3Row {
    double beta_over_n = 0.0;
    double beta = 0.0;
    int n_subcarriers = 0;
    double rb_bits_per_s = 0.0;
    int is_max = 0;              // 1 on the argmax row of its N series
};

// One (peak power, scheme) point of the throughput comparison.
struct Fig4Row {
    double peak_power_mw = 0.0;
    std::string scheme;          // dco_ofdm | mpam_jow | mpam_mmse | mpam_unequalized
    double rb_bits_per_s = 0.0;
    double rb_over_f3db = 0.0;
    double analytic_ber = std::numeric_limits<double>::quiet_NaN();
    double simulated_ber = std::numeric_limits<double>::quiet_NaN();
    double ber_ci_low = std::numeric_limits<double>::quiet_NaN();
    double ber_ci_high = std::numeric_limits<double>::quiet_NaN();
    int feasible = 0;
};

struct BitloadRow {
    int subcarrier = 0;
    double f_hz = 0.0;
    double snr = 0.0;            // linear, per the analytic model
    int qam_m = 0;               // 0 when the subcarrier stays unloaded
    int bits = 0;
    double predicted_ber = std::numeric_limits<double>::quiet_NaN();
};

std::vector<Fig3Row> run_fig3_sweep(const ExperimentConfig& cfg);
std::vector<Fig4Row> run_fig4_sweep(const ExperimentConfig& cfg);
std::vector<BitloadRow> run_bitload(const ExperimentConfig& cfg, double beta,
                                    double t_s, int n, double power_mw,
                                    OfdmPlan* plan_out = nullptr);
DesignResult run_design(const ExperimentConfig& cfg, int m, double rc,
                        double power_mw);

// Deterministic scientific formatting; NaN prints as the token `nan`.
std::string format_real(double v);

// Output directory precedence: --out flag, then LEDLINK_OUTPUT_DIR, then config.
std::string resolve_out_dir(const ExperimentConfig& cfg, const std::string& cli_out);

// Writers create the directory, emit the CSV, and drop a gnuplot stub next to it.
// Each returns the CSV path.
std::string write_fig3(const std::string& dir, const std::vector<Fig3Row>& rows);
std::string write_fig4(const std::string& dir, const std::vector<Fig4Row>& rows);
std::string write_bitload(const std::string& dir, const std::vector<BitloadRow>& rows,
                          const OfdmPlan& plan);
std::string write_waveform(const std::string& dir, const DesignResult& dr,
                           int m, double rc, double power_mw);

} // namespace ledlink
