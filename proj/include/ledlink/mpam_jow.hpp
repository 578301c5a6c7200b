#pragma once
#include "ledlink/channel.hpp"
#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace ledlink {

// Second-moment model for the transmit-sample window. as_written keeps the
// same-symbol coefficient (2M^2-M)/(6M-6), which exceeds the true alphabet
// second moment by a factor M; corrected uses E{s^2} = (2M-1)/(6(M-1)).
// Cross-symbol entries are E{s}^2 = 1/4 in both.
enum class SigmaMode { as_written, corrected };

// SINR composition gamma = signal_power / mse. as_written and corrected pair
// with the matching SigmaMode; calibrated (1/(8 mse)) is the slicer-geometry
// scaling that makes the BER formula agree with nearest-level simulation.
enum class SinrRule { as_written, corrected, calibrated };

double pam_es2(int m);                // E{s^2} of uniform levels {0,...,1}
double pam_var(int m);                // E{s^2} - 1/4
double pam_sinr(int m, double mse, SinrRule rule);
double pam_ber(int m, double gamma);  // (M-1)/(M log2 M) erfc(sqrt(gamma)/(M-1))
SinrRule paired_sinr_rule(SigmaMode mode);  // the rule whose scaling matches the mode

struct PamConfig {
    int m = 2;          // constellation size
    double rc = 2.0e8;  // chip rate, samples/s
    int l_f = 4;        // waveform length, chips per symbol
    int l_w = 0;        // equalizer length (odd); 0 = default 2*L_h+1
};

// Geometry shared by the analytics and the simulator: the length-L_v sample
// window feeding an L_w-tap equalizer centered on symbol 0, with each window
// column tagged by its symbol offset and waveform phase.
class PamMachinery {
public:
    PamMachinery(std::vector<double> taps, int l_f, int l_w);

    std::vector<double> h;
    int lf, lw, lh, lv;
    int center_row;            // (lw-1)/2
    std::vector<int> sym;      // symbol offset of each window column
    std::vector<int> phase;    // waveform phase of each window column
    std::vector<int> deltas;   // sorted distinct symbol offsets
    int i0;                    // index of offset 0 in deltas
    Eigen::MatrixXd H;         // lw x lv, row r = reversed taps at columns r..r+lh-1

    // e[j] = f[phase[j]]; P column d = H * (e restricted to symbol offset deltas[d]),
    // i.e. the received pulse contributed by that symbol across the window.
    void pulses(const Eigen::VectorXd& f, Eigen::VectorXd& e, Eigen::MatrixXd& P) const;

    // Receiver chip index of equalizer tap r for symbol msym (delay-1 causal model).
    long long tap_time(long long msym, int r) const {
        return msym * lf + (lf + lh + 1) / 2 - center_row + r;
    }
};

struct ToeplitzBuild {
    Eigen::MatrixXd h_matrix;
    int n_u = 0;   // future span
    int n_l = 0;   // past span; n_u + n_l + 1 = L_h
};
ToeplitzBuild build_toeplitz(const std::vector<double>& taps, int l_w);

// Explicit L_v x L_v second-moment matrix of the window samples.
Eigen::MatrixXd sigma_matrix(const PamMachinery& mach, const Eigen::VectorXd& f,
                             int m, SigmaMode mode);

struct MmseEqualizer {
    Eigen::VectorXd w;
    double b = 0.0;
    bool ridged = false;        // solve needed a relative ridge
    double solve_residual = 0.0;
};

// Affine MMSE for the window model: w solves (H C_x H^T + sigma2 I) w = H cov(s, x)
// with b = 1/2 - w^T H E{x}. C_x is centered, which is what makes the result a
// stationary point of the exact MSE; the mode only rescales the symbol variance.
MmseEqualizer mmse_filter(const PamMachinery& mach, const Eigen::VectorXd& f,
                          int m, double noise_var, SigmaMode mode);

// Center-tap threshold receiver: single tap scaled to unit symbol gain with the
// deterministic ISI mean removed; the Fig. 4 no-equalizer baseline.
MmseEqualizer unequalized_receiver(const PamMachinery& mach, const Eigen::VectorXd& f);

// Exact E{(y - s)^2} of the affine receiver (w, b) under the mode's second-moment
// model: the quadratic form plus the receiver-noise term w^T w sigma2 and the
// bias/prior terms of the full expansion.
double isi_noise_power(const PamMachinery& mach, const Eigen::VectorXd& f,
                       int m, double noise_var, SigmaMode mode,
                       const Eigen::VectorXd& w, double b);

struct DesignOptions {
    int max_iters = 500;
    double rel_tol = 1e-6;       // stop when relative SINR gain drops below
    double kkt_tol = 1e-4;       // projected-gradient residual target
    double grad_step_rel = 1e-6; // central-difference step, relative to i_max
    std::vector<double> seed_levels = {0.25, 0.5, 0.75, 1.0};
    uint64_t random_seed = 7;    // fifth start: seeded random waveform
    int polish_iters = 300;      // extra iterations to push the KKT residual down
};

struct DesignResult {
    Eigen::VectorXd f;
    double sinr_value = 0.0;
    double mse = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
    MmseEqualizer eq;
};

// Projected gradient ascent of the SINR over the box [0, i_max]^{L_f}:
// numeric central-difference gradient, backtracking line search, multi-start.
// The rule paired with `mode` is monotone in the MSE, so the designed waveform
// depends only on the mode.
DesignResult design_waveform(const PamMachinery& mach, int m, double noise_var,
                             double i_max, SigmaMode mode,
                             const DesignOptions& opts = {});

enum class PamScheme { jow, mmse_rect, unequalized };

struct RateOptimum {
    bool feasible = false;
    double rate = 0.0;
    int m = 0;
    double rc = 0.0;
    Eigen::VectorXd f;
    MmseEqualizer eq;
    double mse = 0.0;
    double sinr_value = 0.0;
    double analytic_ber = 1.0;
    std::string diagnostic;     // set when no grid point met the BER target
};

// Grid search over (M, R_c) keeping points with pam_ber(M, gamma) < b_max and
// maximizing R_c log2(M) / L_f; ties go to smaller M, then smaller R_c.
RateOptimum maximize_rate(const LedChannel& ch, const NoiseModel& noise,
                          double b_max, const std::vector<int>& m_grid,
                          const std::vector<double>& rc_grid, int l_f,
                          PamScheme scheme, SigmaMode mode, SinrRule rule,
                          const DesignOptions& opts = {});

// Non-overlapping pulse train: x[i] = s[i / L_f] * f[i mod L_f].
std::vector<double> synthesize(const Eigen::VectorXd& f,
                               const std::vector<double>& symbols);

} // namespace ledlink
