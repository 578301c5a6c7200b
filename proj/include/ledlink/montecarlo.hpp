#pragma once
#include "ledlink/channel.hpp"
#include "ledlink/dco_ofdm.hpp"
#include "ledlink/mpam_jow.hpp"
#include <cstdint>
#include <vector>

namespace ledlink {

struct SimRun {
    uint64_t seed = 1;
    uint64_t n_symbols = 100000;   // hard cap on simulated symbols
    uint64_t min_errors = 100;     // stop early once this many bit errors observed
    double predicted_ber = 0.0;    // 0 disables the budget sanity guard
    double confidence = 0.1;       // target relative standard error of the estimate

    // Symbols needed for the estimator's relative standard error to reach
    // `confidence` at bit error rate `ber`: n >= 1 / (confidence^2 ber).
    static uint64_t symbols_for(double ber, double confidence);
};

struct BerEstimate {
    uint64_t bit_errors = 0;
    uint64_t bits = 0;
    double ber() const { return bits ? static_cast<double>(bit_errors) / bits : 0.0; }
    double ci_low() const;    // 95% Wilson interval
    double ci_high() const;
};

struct OfdmSimResult {
    BerEstimate total;
    std::vector<BerEstimate> per_subcarrier;  // data subcarriers 1..N/2-1
    std::vector<double> snr_hat;              // empirical symbol SNR per data subcarrier
    double alpha_hat = 0.0;                   // clipped-vs-unclipped regression slope
    double clip_var_hat = 0.0;                // residual distortion variance
    uint64_t frames = 0;
};

// End-to-end DCO-OFDM chain: bits -> QAM -> modulate -> clip -> discrete channel
// -> white noise (variance n0 / t_ofdm per sample) -> CP removal -> DFT -> per-bin
// equalization by the simulated channel's own DFT gain times alpha*beta -> slice.
OfdmSimResult simulate_ofdm(const OfdmPlan& plan, const LedChannel& ch,
                            const NoiseModel& noise, const SimRun& run);

// Bussgang gain of the clipper measured by linear regression of clipped output
// against Gaussian input with mean i_max/2 and the given standard deviation.
double bussgang_alpha_mc(double i_max, double sigma_s, uint64_t n, uint64_t seed);

struct PamSimResult {
    BerEstimate total;
    double mse_hat = 0.0;      // empirical E{(y - s)^2}
    uint64_t symbols = 0;
};

// End-to-end M-PAM chain: symbols -> pulse train -> delayed channel convolution
// -> white noise (given per-chip variance) -> affine equalizer at symbol-centered
// taps -> nearest-level slicing. Edge symbols without full ISI context are skipped.
PamSimResult simulate_pam(const PamMachinery& mach, const Eigen::VectorXd& f,
                          const MmseEqualizer& eq, int m, double noise_var,
                          const SimRun& run);

struct BaselineResult {
    PamSimResult sim;
    double analytic_ber = 1.0;   // slicer-geometry prediction from the exact MSE
    double mse = 0.0;
};

// Rectangular full-scale pulse with the center-tap threshold receiver: the
// no-equalizer comparison scheme.
BaselineResult unequalized_pam_baseline(const PamConfig& cfg, const LedChannel& ch,
                                        const NoiseModel& noise, const SimRun& run);

} // namespace ledlink
