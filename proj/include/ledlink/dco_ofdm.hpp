#pragma once
#include "ledlink/channel.hpp"
#include <complex>
#include <vector>

namespace ledlink {

// Hermitian-symmetric DCO-OFDM plan. Data lives on subcarriers 1..N/2-1;
// bins 0 (DC bias) and N/2 (Nyquist) stay empty and the upper half mirrors
// the lower, so the time signal is real.
struct OfdmPlan {
    int n = 64;                 // subcarrier count, power of two
    double t_ofdm = 3.2e-7;     // symbol time, s
    double beta = 0.0;          // modulation scale; beta/n is the modulation index
    double dc_bias = 5.0;       // = i_max/2
    std::vector<int> bits;      // log2 M per data subcarrier (size n/2-1, even or 0)
    int cp_len = 0;             // cyclic prefix samples

    int n_data() const { return n / 2 - 1; }
    double sample_rate() const { return double(n) / t_ofdm; }
};

struct ClippingStats {
    double alpha = 1.0;     // Bussgang scale
    double clip_var = 0.0;  // clipping-noise variance, mA^2
    double sigma_s2 = 0.0;  // transmit signal variance, mA^2
};

// sigma_s^2 = beta^2 * n_active / N^2 where n_active = N-2 counts every
// data-bearing bin including the conjugate mirrors (Parseval with E{|X|^2}=1).
double ofdm_sigma_s(double beta, int n);

// Eq. of the Bussgang scale: alpha = 1 - erfc(i_max / sqrt(8 sigma_s^2)).
double bussgang_alpha(double i_max, double sigma_s);

// Clipping-noise variance by adaptive quadrature of the two tail integrals
// of the density of alpha*s (mean alpha*i_max/2, sd alpha*sigma_s), taking the
// integrand exactly as modeled: (alpha x)^2 below 0, (alpha x - i_max)^2 above i_max.
double clipping_noise_variance(double i_max, double sigma_s);

// Same statistic by direct Monte Carlo expectation over n Gaussian draws;
// oracle for the quadrature path.
double clipping_noise_variance_mc(double i_max, double sigma_s,
                                  long long n, uint64_t seed);

ClippingStats clipping_stats(double i_max, double sigma_s);

// Per-subcarrier SNR: (beta*alpha*|H_i|)^2 * ex2 / (N*(n0/T + clip_var)),
// H_i evaluated at f_i = i/T. ex2 is the configured E{X_i^2} reading
// (1.0 for |X|^2 of unit-energy QAM, 0.5 for the real-part reading).
double subcarrier_snr(const OfdmPlan& plan, const LedChannel& ch,
                      const NoiseModel& noise, const ClippingStats& st,
                      int i, double ex2 = 1.0);

// Largest QAM per subcarrier with predicted BER below b_max.
OfdmPlan bit_load(const LedChannel& ch, const NoiseModel& noise,
                  double beta, double t_ofdm, int n, double b_max,
                  const std::vector<int>& qam_sizes, bool cp, double ex2 = 1.0);

// Bits per symbol time; cyclic prefix overhead n/(n+cp) applied when present.
double throughput(const OfdmPlan& plan);

struct OfdmOptimum {
    OfdmPlan plan;
    double rate = 0.0;
};

// Grid search over (beta, T); ties go to smaller beta, then smaller T.
OfdmOptimum optimize_ofdm(const LedChannel& ch, const NoiseModel& noise,
                          double b_max, const std::vector<double>& betas,
                          const std::vector<double>& ts, int n,
                          const std::vector<int>& qam_sizes, bool cp,
                          double ex2 = 1.0);

// Time-domain frames: s = (beta/N) * idft(X) + dc with CP prepended.
// qam_symbols holds the data subcarriers 1..N/2-1 in order.
std::vector<double> modulate(const OfdmPlan& plan,
                             const std::vector<std::complex<double>>& qam_symbols);

} // namespace ledlink
