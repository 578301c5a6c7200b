#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ledlink/dco_ofdm.hpp"
#include "ledlink/qam.hpp"

#include <cmath>
#include <complex>
#include <vector>

using namespace ledlink;

TEST_CASE("transmit variance follows beta^2 (N-2) / N^2") {
    CHECK(ofdm_sigma_s(1.0, 64) == doctest::Approx(std::sqrt(62.0) / 64.0).epsilon(1e-14));
    CHECK(ofdm_sigma_s(9.28, 64) == doctest::Approx(9.28 * std::sqrt(62.0) / 64.0).epsilon(1e-14));
    CHECK(ofdm_sigma_s(2.0, 128) == doctest::Approx(2.0 * std::sqrt(126.0) / 128.0).epsilon(1e-14));
}

TEST_CASE("bussgang scale hits closed-form landmarks") {
    // i_max / sqrt(8 sigma^2) = 1  =>  alpha = 1 - erfc(1) = erf(1).
    const double sigma = 10.0 / std::sqrt(8.0);
    CHECK(bussgang_alpha(10.0, sigma) == doctest::Approx(0.84270079295).epsilon(1e-10));
    // Tiny signals never clip.
    CHECK(bussgang_alpha(10.0, 1e-4) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(bussgang_alpha(10.0, 0.0) == 1.0);
    // Larger swing clips more: alpha decreases in sigma_s.
    CHECK(bussgang_alpha(10.0, 4.0) < bussgang_alpha(10.0, 2.0));
}

TEST_CASE("clipping noise quadrature agrees with monte carlo") {
    for (double sigma : {1.5, 2.5, 4.0}) {
        double quad = clipping_noise_variance(10.0, sigma);
        double mc = clipping_noise_variance_mc(10.0, sigma, 2000000, 42);
        CHECK(quad == doctest::Approx(mc).epsilon(0.02));
        CHECK(quad > 0.0);
    }
    CHECK(clipping_noise_variance(10.0, 1e-4) < 1e-12); // negligible for tiny swings
    CHECK(clipping_noise_variance(10.0, 0.0) == 0.0);
}

TEST_CASE("clipping noise grows with the signal swing") {
    double prev = 0.0;
    for (double sigma : {1.0, 2.0, 3.0, 4.0, 6.0}) {
        double v = clipping_noise_variance(10.0, sigma);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("clipping stats bundle is self-consistent") {
    ClippingStats st = clipping_stats(10.0, 2.5);
    CHECK(st.alpha == doctest::Approx(bussgang_alpha(10.0, 2.5)).epsilon(1e-14));
    CHECK(st.clip_var == doctest::Approx(clipping_noise_variance(10.0, 2.5)).epsilon(1e-14));
    CHECK(st.sigma_s2 == doctest::Approx(6.25).epsilon(1e-14));
}

TEST_CASE("subcarrier snr matches the analytic composition") {
    LedChannel ch{2.0e7, 10.0};
    NoiseModel noise{3.0e-9};
    OfdmPlan plan;
    plan.n = 64;
    plan.t_ofdm = 3.2e-7;
    plan.beta = 4.0;
    ClippingStats st = clipping_stats(ch.i_max, ofdm_sigma_s(plan.beta, plan.n));
    for (int i : {1, 7, 31}) {
        double fi = double(i) / plan.t_ofdm;
        double habs = std::abs(frequency_response(ch, fi));
        double num = plan.beta * st.alpha * habs;
        double want = num * num / (plan.n * (noise.n0 / plan.t_ofdm + st.clip_var));
        CHECK(subcarrier_snr(plan, ch, noise, st, i) == doctest::Approx(want).epsilon(1e-13));
        // The 0.5 second-moment reading halves the SNR exactly.
        CHECK(subcarrier_snr(plan, ch, noise, st, i, 0.5)
              == doctest::Approx(0.5 * want).epsilon(1e-13));
    }
    // Lowpass channel: SNR decreases with subcarrier index.
    double prev = 1e300;
    for (int i = 1; i <= plan.n_data(); ++i) {
        double g = subcarrier_snr(plan, ch, noise, st, i);
        CHECK(g < prev);
        prev = g;
    }
    CHECK_THROWS(subcarrier_snr(plan, ch, noise, st, 0));
    CHECK_THROWS(subcarrier_snr(plan, ch, noise, st, 32));
}

TEST_CASE("bit loading matches the per-subcarrier brute force") {
    LedChannel ch{2.0e7, 10.0};
    NoiseModel noise{3.0e-9};
    const std::vector<int> sizes = {4, 16, 64, 256, 1024, 4096};
    for (double beta : {2.0, 9.28, 30.0}) {
        OfdmPlan plan = bit_load(ch, noise, beta, 3.2e-7, 64, 1e-3, sizes, true);
        ClippingStats st = clipping_stats(ch.i_max, ofdm_sigma_s(beta, 64));
        REQUIRE(int(plan.bits.size()) == 31);
        for (int i = 1; i <= 31; ++i) {
            double g = subcarrier_snr(plan, ch, noise, st, i);
            int want = 0;
            for (int m : sizes)
                if (qam_ber(m, g) < 1e-3) want = int(std::lround(std::log2(double(m))));
            CHECK(plan.bits[i - 1] == want);
        }
        CHECK(plan.dc_bias == doctest::Approx(5.0));
        CHECK(plan.beta == beta);
    }
}

TEST_CASE("cyclic prefix length covers the channel memory") {
    LedChannel ch{2.0e7, 10.0};
    NoiseModel noise{3.0e-9};
    const std::vector<int> sizes = {4, 16, 64, 256, 1024, 4096};
    OfdmPlan with_cp = bit_load(ch, noise, 9.0, 3.2e-7, 64, 1e-3, sizes, true);
    // At 64 / 0.32us = 200 MS/s the channel needs 15 taps, so CP = 14.
    CHECK(with_cp.cp_len == 14);
    OfdmPlan no_cp = bit_load(ch, noise, 9.0, 3.2e-7, 64, 1e-3, sizes, false);
    CHECK(no_cp.cp_len == 0);
    CHECK(with_cp.bits == no_cp.bits);  // loading ignores the prefix
}

TEST_CASE("bit loading is monotone in the ber target") {
    LedChannel ch{2.0e7, 10.0};
    NoiseModel noise{3.0e-9};
    const std::vector<int> sizes = {4, 16, 64, 256, 1024, 4096};
    OfdmPlan tight = bit_load(ch, noise, 9.0, 3.2e-7, 64, 1e-4, sizes, true);
    OfdmPlan loose = bit_load(ch, noise, 9.0, 3.2e-7, 64, 1e-2, sizes, true);
    for (size_t i = 0; i < tight.bits.size(); ++i)
        CHECK(tight.bits[i] <= loose.bits[i]);
}

TEST_CASE("throughput counts bits per symbol time with prefix overhead") {
    OfdmPlan plan;
    plan.n = 8;
    plan.t_ofdm = 1e-6;
    plan.bits = {2, 4, 6};
    plan.cp_len = 0;
    CHECK(throughput(plan) == doctest::Approx(1.2e7).epsilon(1e-14));
    plan.cp_len = 3;
    CHECK(throughput(plan) == doctest::Approx(1.2e7 * 8.0 / 11.0).epsilon(1e-14));
}

TEST_CASE("grid optimizer returns the best point and a grid member") {
    LedChannel ch{2.0e7, 10.0};
    NoiseModel noise{3.0e-9};
    const std::vector<int> sizes = {4, 16, 64, 256, 1024, 4096};
    std::vector<double> betas = {2.0, 6.0, 12.0, 24.0};
    std::vector<double> ts = {1.6e-7, 3.2e-7};
    OfdmOptimum best = optimize_ofdm(ch, noise, 1e-3, betas, ts, 64, sizes, true);
    double brute = 0.0;
    for (double b : betas)
        for (double t : ts)
            brute = std::max(brute, throughput(bit_load(ch, noise, b, t, 64, 1e-3, sizes, true)));
    CHECK(best.rate == doctest::Approx(brute).epsilon(1e-14));
    CHECK(best.rate == doctest::Approx(throughput(best.plan)).epsilon(1e-14));
    bool beta_on_grid = false;
    for (double b : betas) beta_on_grid |= (best.plan.beta == b);
    CHECK(beta_on_grid);
}

TEST_CASE("modulator emits dc only for all-zero data") {
    OfdmPlan plan;
    plan.n = 64;
    plan.t_ofdm = 3.2e-7;
    plan.beta = 4.0;
    plan.dc_bias = 5.0;
    plan.cp_len = 14;
    std::vector<std::complex<double>> zeros(plan.n_data(), {0.0, 0.0});
    auto s = modulate(plan, zeros);
    REQUIRE(int(s.size()) == plan.n + plan.cp_len);
    for (double v : s) CHECK(v == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("single tone synthesizes a cosine of amplitude 2 beta / N") {
    OfdmPlan plan;
    plan.n = 64;
    plan.t_ofdm = 3.2e-7;
    plan.beta = 4.0;
    plan.dc_bias = 5.0;
    plan.cp_len = 0;
    std::vector<std::complex<double>> data(plan.n_data(), {0.0, 0.0});
    data[0] = {1.0, 0.0};   // subcarrier 1
    auto s = modulate(plan, data);
    for (int k = 0; k < plan.n; ++k) {
        double want = plan.dc_bias
                    + 2.0 * plan.beta / plan.n * std::cos(2.0 * M_PI * k / plan.n);
        CHECK(s[k] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("modulated frame has the analytic transmit variance") {
    // With every data bin carrying a unit-magnitude symbol, Parseval gives the
    // time-domain mean square (s - dc)^2 = sigma_s^2 exactly.
    OfdmPlan plan;
    plan.n = 64;
    plan.t_ofdm = 3.2e-7;
    plan.beta = 7.3;
    plan.dc_bias = 5.0;
    plan.cp_len = 0;
    std::vector<std::complex<double>> data(plan.n_data(), {1.0, 0.0});
    auto s = modulate(plan, data);
    double acc = 0.0;
    for (double v : s) acc += (v - plan.dc_bias) * (v - plan.dc_bias);
    double sig2 = ofdm_sigma_s(plan.beta, plan.n);
    CHECK(acc / plan.n == doctest::Approx(sig2 * sig2).epsilon(1e-12));
}

TEST_CASE("cyclic prefix repeats the block tail") {
    OfdmPlan plan;
    plan.n = 16;
    plan.t_ofdm = 1e-7;
    plan.beta = 2.0;
    plan.dc_bias = 5.0;
    plan.cp_len = 5;
    std::vector<std::complex<double>> data(plan.n_data());
    for (int i = 0; i < plan.n_data(); ++i)
        data[i] = {std::cos(0.7 * i), std::sin(1.3 * i)};
    auto s = modulate(plan, data);
    for (int k = 0; k < plan.cp_len; ++k)
        CHECK(s[k] == doctest::Approx(s[plan.n + k]).epsilon(1e-15));
}
