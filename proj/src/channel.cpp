#include "ledlink/channel.hpp"
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ledlink {

std::complex<double> frequency_response(const LedChannel& ch, double f) {
    if (f < 0.0) throw std::invalid_argument("frequency must be nonnegative");
    return 1.0 / std::complex<double>(1.0, f / ch.f3db);
}

int impulse_length(const LedChannel& ch, double rate) {
    // tail mass of the unit-sum geometric is rho^L; require < 1e-4
    double decay = 2.0 * 3.14159265358979323846 * ch.f3db / rate;
    return std::max(1, int(std::ceil(std::log(1e4) / decay)));
}

std::vector<double> discrete_impulse_response(const LedChannel& ch, double rate,
                                              int forced_len) {
    int min_len = impulse_length(ch, rate);
    int lh = forced_len > 0 ? forced_len : min_len;
    if (lh < min_len)
        throw std::invalid_argument("impulse response too short to hold 99.99% of mass");
    double rho = std::exp(-2.0 * 3.14159265358979323846 * ch.f3db / rate);
    std::vector<double> h(lh);
    double v = 1.0, sum = 0.0;
    for (int k = 0; k < lh; ++k) { h[k] = v; sum += v; v *= rho; }
    for (double& x : h) x /= sum;
    return h;
}

void clip_inplace(std::vector<double>& x, double i_max) {
    for (double& v : x) v = std::min(std::max(v, 0.0), i_max);
}

std::vector<double> clip(std::vector<double> x, double i_max) {
    clip_inplace(x, i_max);
    return x;
}

} // namespace ledlink
