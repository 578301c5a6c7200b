#pragma once
#include <complex>
#include <cstdint>
#include <vector>

namespace ledlink {

// Square QAM with independent Gray coding per axis, normalized to unit
// average symbol energy so E{|X|^2} = 1.

// Approximate Gray-coded BER at average SNR gamma:
// (sqrt(M)-1)/(sqrt(M) log2 sqrt(M)) * erfc(sqrt(3 gamma / (2(M-1)))).
double qam_ber(int m, double gamma);

// Largest size from `sizes` (ascending squares) with qam_ber < b_max; 0 if none.
int max_qam_size(double gamma, double b_max, const std::vector<int>& sizes);

struct QamMapper {
    explicit QamMapper(int m);
    int m;                  // constellation size (square)
    int side;               // sqrt(m) levels per axis
    double scale;           // amplitude step so that E{|X|^2} = 1

    // level index k in [0, side) -> amplitude (2k - (side-1)) * scale
    double amp(int k) const { return (2.0 * k - (side - 1)) * scale; }
    std::complex<double> symbol(int ki, int kq) const { return {amp(ki), amp(kq)}; }
    int slice(double a) const;                   // nearest level index
    static uint32_t gray(uint32_t k) { return k ^ (k >> 1); }
    // bit errors between levels k and khat under Gray labels
    static int bit_errors(int k, int khat);
};

} // namespace ledlink
