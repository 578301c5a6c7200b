#include "ledlink/qam.hpp"
#include <bit>
#include <cmath>
#include <stdexcept>

namespace ledlink {

double qam_ber(int m, double gamma) {
    int side = int(std::lround(std::sqrt(double(m))));
    if (side * side != m || m < 4)
        throw std::invalid_argument("square QAM size required");
    double rm = double(side);
    double pref = (rm - 1.0) / (rm * std::log2(rm));
    return pref * std::erfc(std::sqrt(3.0 * gamma / (2.0 * (m - 1))));
}

int max_qam_size(double gamma, double b_max, const std::vector<int>& sizes) {
    int best = 0;
    for (int m : sizes) {
        // ber is increasing in m at fixed gamma, so stop at the first failure
        if (qam_ber(m, gamma) < b_max) best = m; else break;
    }
    return best;
}

QamMapper::QamMapper(int m_) : m(m_) {
    side = int(std::lround(std::sqrt(double(m))));
    if (side * side != m || m < 4)
        throw std::invalid_argument("square QAM size required");
    // per-axis E{a^2} = scale^2 (side^2-1)/3 and two axes must sum to 1
    scale = std::sqrt(3.0 / (2.0 * (m - 1)));
}

int QamMapper::slice(double a) const {
    // clamp in floating point first: casting a huge double to int is undefined
    double k = (a / scale + (side - 1)) / 2.0;
    if (k <= 0.0) return 0;
    if (k >= side - 1) return side - 1;
    return int(std::lround(k));
}

int QamMapper::bit_errors(int k, int khat) {
    return std::popcount(gray(uint32_t(k)) ^ gray(uint32_t(khat)));
}

} // namespace ledlink
