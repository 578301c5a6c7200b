#pragma once
#include <complex>
#include <vector>
#include <stdexcept>

namespace ledlink {

using cplx = std::complex<double>;

// Radix-2 FFT, unnormalized in both directions: forward computes
// X_k = sum_n x_n e^{-j2pi nk/N}, inverse computes sum with e^{+...} and no 1/N,
// so inverse(forward(x)) = N * x. The modulator applies its own beta/N scale.
inline void fft_inplace(std::vector<cplx>& a, bool inverse) {
    const size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft size must be a power of two");
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double two_pi = 6.283185307179586476925286766559;
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = two_pi / double(len) * (inverse ? 1.0 : -1.0);
        cplx wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                cplx u = a[i + k], v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

inline std::vector<cplx> dft(std::vector<cplx> x)  { fft_inplace(x, false); return x; }
inline std::vector<cplx> idft(std::vector<cplx> x) { fft_inplace(x, true);  return x; }

} // namespace ledlink
