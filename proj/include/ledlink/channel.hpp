#pragma once
#include <complex>
#include <vector>

namespace ledlink {

// First-order lowpass LED model with hard drive-current limits [0, i_max].
// Under unity current-to-power conversion i_max in mA equals peak optical
// power in mW, so one number serves as both.
struct LedChannel {
    double f3db = 2.0e7;  // 3 dB modulation bandwidth, Hz
    double i_max = 10.0;  // drive limit, mA (= peak optical power, mW)
};

struct NoiseModel {
    double n0 = 3.0e-9;   // one-sided PSD, mW/Hz
    double ofdm_var(double t_ofdm) const { return n0 / t_ofdm; } // per subcarrier
    double pam_var(double rc) const { return n0 * rc; }          // per chip sample
};

// 1 / (1 + j f/f3db); |.| = 1 at DC, 1/sqrt(2) at f3db.
std::complex<double> frequency_response(const LedChannel& ch, double f);

// Samples of a(t) = 2*pi*f3db*exp(-2*pi*f3db*t) at spacing 1/rate, scaled by
// 1/rate and renormalized to unit sum. Length is the smallest L with
// truncated tail mass below 1e-4 unless an explicit length is forced.
std::vector<double> discrete_impulse_response(const LedChannel& ch, double rate,
                                              int forced_len = 0);

// Smallest L_h with geometric tail mass < 1e-4 at this rate.
int impulse_length(const LedChannel& ch, double rate);

std::vector<double> clip(std::vector<double> x, double i_max);
void clip_inplace(std::vector<double>& x, double i_max);

} // namespace ledlink
