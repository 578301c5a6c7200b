#pragma once
#include "ledlink/channel.hpp"
#include "ledlink/mpam_jow.hpp"
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ledlink {

// Invalid or inconsistent configuration; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    // channel / noise / target
    double f3db_hz = 2.0e7;
    double n0_mw_per_hz = 3.0e-9;
    double ber_target = 1.0e-3;

    // sweep
    std::vector<double> powers_mw = {2.0, 4.0, 6.0, 8.0, 10.0};

    // DCO-OFDM search space
    int ofdm_n = 64;
    std::vector<int> ofdm_n_list = {64, 128};
    std::vector<double> t_grid_s = {0.08e-6, 0.11e-6, 0.16e-6, 0.23e-6, 0.32e-6,
                                    0.45e-6, 0.64e-6, 0.91e-6, 1.28e-6};
    double beta_over_n_min = 0.03;
    double beta_over_n_max = 1.0;
    int beta_points = 41;
    std::vector<int> qam_sizes = {4, 16, 64, 256, 1024, 4096};
    bool cyclic_prefix = true;
    double qam_second_moment = 1.0;  // E{X_i^2} reading: 1.0 (unit energy) or 0.5
    double fig3_t_s = 0.32e-6;
    double fig3_power_mw = 10.0;

    // M-PAM search space
    int l_f = 4;
    std::vector<int> m_grid = {2, 4, 8, 16};
    std::vector<double> rc_grid_sps = {50e6,  75e6,  100e6,  150e6,  200e6,
                                       300e6, 450e6, 600e6,  800e6,  1000e6,
                                       1200e6, 1400e6, 1700e6, 2000e6, 2400e6};
    SigmaMode mode_equalized = SigmaMode::as_written;
    SigmaMode mode_unequalized = SigmaMode::corrected;
    DesignOptions design;

    // Monte Carlo
    uint64_t mc_seed = 20260818;
    uint64_t mc_min_errors = 100;
    uint64_t mc_max_symbols = 4000000;
    bool simulate_sweeps = true;

    // output
    std::string out_dir = "results";
    int threads = 0;   // 0 = hardware concurrency

    LedChannel channel_at(double peak_mw) const { return LedChannel{f3db_hz, peak_mw}; }
    NoiseModel noise() const { return NoiseModel{n0_mw_per_hz}; }
    std::vector<double> beta_grid(int n) const;  // geometric in beta/N, scaled by N

    // Parse order: built-in defaults, then the JSON file (if non-empty path),
    // then dotted `group.key=value` overrides. Throws ConfigError on bad input.
    static ExperimentConfig load(const std::string& json_path,
                                 const std::vector<std::string>& overrides = {});
    std::string to_json_text() const;
};

const char* sigma_mode_name(SigmaMode mode);
SigmaMode sigma_mode_from_name(const std::string& name);

} // namespace ledlink
