#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ledlink/channel.hpp"
#include "ledlink/mpam_jow.hpp"
#include "ledlink/rng.hpp"

#include <cmath>
#include <vector>

using namespace ledlink;

namespace {

std::vector<double> random_levels(int m, int n, uint64_t seed) {
    CounterRng g(seed, 0);
    std::vector<double> s(n);
    for (auto& v : s) v = double(g.below(m)) / double(m - 1);
    return s;
}

Eigen::VectorXd random_waveform(int lf, uint64_t seed) {
    CounterRng g(seed, 1);
    Eigen::VectorXd f(lf);
    for (int i = 0; i < lf; ++i) f(i) = 0.2 + 0.8 * g.u01();
    return f;
}

// Noiseless receiver samples by direct convolution through the delay-1 channel.
double rx_sample(const std::vector<double>& h, const std::vector<double>& x, long long t) {
    double acc = 0.0;
    for (size_t k = 0; k < h.size(); ++k) {
        long long src = t - 1 - static_cast<long long>(k);
        if (src >= 0 && src < static_cast<long long>(x.size())) acc += h[k] * x[src];
    }
    return acc;
}

} // namespace

TEST_CASE("alphabet moments") {
    CHECK(pam_es2(2) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(pam_var(2) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(pam_es2(4) == doctest::Approx(7.0 / 18.0).epsilon(1e-15));
    CHECK(pam_es2(8) == doctest::Approx(15.0 / 42.0).epsilon(1e-15));
    // Large-M limit of uniform levels on [0, 1] is 1/3.
    CHECK(pam_es2(4096) == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
}

TEST_CASE("sinr rules at m = 2") {
    CHECK(pam_sinr(2, 1.0, SinrRule::as_written) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pam_sinr(2, 1.0, SinrRule::corrected) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(pam_sinr(2, 1.0, SinrRule::calibrated) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(pam_sinr(4, 2.0, SinrRule::as_written)
          == doctest::Approx((32.0 - 4.0) / (24.0 - 6.0) / 2.0).epsilon(1e-15));
    CHECK(paired_sinr_rule(SigmaMode::as_written) == SinrRule::as_written);
    CHECK(paired_sinr_rule(SigmaMode::corrected) == SinrRule::corrected);
}

TEST_CASE("pam ber closed form") {
    for (double g : {0.5, 1.0, 4.0})
        CHECK(pam_ber(2, g) == doctest::Approx(0.5 * std::erfc(std::sqrt(g))).epsilon(1e-14));
    CHECK(pam_ber(4, 40.0)
          == doctest::Approx(3.0 / 8.0 * std::erfc(std::sqrt(40.0) / 3.0)).epsilon(1e-14));
    CHECK(pam_ber(4, 10.0) > pam_ber(2, 10.0));
    CHECK(pam_ber(2, 10.0) < pam_ber(2, 5.0));
}

TEST_CASE("window geometry covers every phase and the reference symbol") {
    for (int lf : {1, 2, 4, 5}) {
        for (int lh : {1, 3, 8}) {
            std::vector<double> taps(lh, 1.0 / lh);
            int lw = 2 * std::max(lf, lh) + 1;
            PamMachinery mach(taps, lf, lw);
            CHECK(mach.lv == lw + lh - 1);
            CHECK(mach.deltas[mach.i0] == 0);
            for (size_t d = 0; d + 1 < mach.deltas.size(); ++d)
                CHECK(mach.deltas[d + 1] == mach.deltas[d] + 1);   // contiguous
            for (int j = 0; j < mach.lv; ++j) {
                CHECK(mach.phase[j] >= 0);
                CHECK(mach.phase[j] < lf);
            }
        }
    }
    CHECK_THROWS(PamMachinery({0.5, 0.5}, 4, 8));  // even equalizer length
    CHECK_THROWS(PamMachinery({}, 4, 9));
}

TEST_CASE("toeplitz rows hold the reversed taps") {
    std::vector<double> taps = {0.6, 0.3, 0.1};
    ToeplitzBuild tb = build_toeplitz(taps, 5);
    REQUIRE(tb.h_matrix.rows() == 5);
    REQUIRE(tb.h_matrix.cols() == 7);
    CHECK(tb.n_u + tb.n_l + 1 == 3);
    for (int r = 0; r < 5; ++r) {
        CHECK(tb.h_matrix(r, r) == doctest::Approx(0.1));
        CHECK(tb.h_matrix(r, r + 1) == doctest::Approx(0.3));
        CHECK(tb.h_matrix(r, r + 2) == doctest::Approx(0.6));
        CHECK(tb.h_matrix.row(r).sum() == doctest::Approx(1.0));
    }
}

TEST_CASE("pulse model equals direct convolution through the channel") {
    // The analytic window model (pulse matrix trained on symbol offsets) must
    // reproduce, sample for sample, what the delay-1 convolution produces at
    // the equalizer tap positions. This ties analytics and simulator together.
    for (uint64_t seed : {11u, 12u, 13u}) {
        std::vector<double> taps = {0.5, 0.3, 0.15, 0.05};
        const int lf = 3, lw = 9, m = 4;
        PamMachinery mach(taps, lf, lw);
        Eigen::VectorXd f = random_waveform(lf, seed);
        auto s = random_levels(m, 60, seed);
        auto x = synthesize(f, s);
        Eigen::VectorXd e;
        Eigen::MatrixXd P;
        mach.pulses(f, e, P);
        for (long long q : {20, 25, 30}) {
            for (int r = 0; r < lw; ++r) {
                double direct = rx_sample(taps, x, mach.tap_time(q, r));
                double model = 0.0;
                for (size_t d = 0; d < mach.deltas.size(); ++d)
                    model += P(r, d) * s[q + mach.deltas[d]];
                CHECK(direct == doctest::Approx(model).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("pulse model equals direct convolution for a realistic led channel") {
    LedChannel ch{2.0e7, 10.0};
    auto taps = discrete_impulse_response(ch, 2.0e8);
    const int lf = 4, m = 2;
    const int lw = 2 * int(taps.size()) + 1;
    PamMachinery mach(taps, lf, lw);
    Eigen::VectorXd f = random_waveform(lf, 77);
    auto s = random_levels(m, 80, 78);
    auto x = synthesize(f, s);
    Eigen::VectorXd e;
    Eigen::MatrixXd P;
    mach.pulses(f, e, P);
    const long long q = 40;
    for (int r = 0; r < lw; ++r) {
        double direct = rx_sample(taps, x, mach.tap_time(q, r));
        double model = 0.0;
        for (size_t d = 0; d < mach.deltas.size(); ++d)
            model += P(r, d) * s[q + mach.deltas[d]];
        CHECK(direct == doctest::Approx(model).epsilon(1e-12));
    }
}

TEST_CASE("second-moment matrix entries follow the mode") {
    PamMachinery mach({1.0}, 2, 5);   // sym = {-1,0,0,1,1}, phase = {1,0,1,0,1}
    Eigen::VectorXd f(2);
    f << 0.5, 2.0;
    Eigen::MatrixXd sw = sigma_matrix(mach, f, 2, SigmaMode::as_written);
    Eigen::MatrixXd sc = sigma_matrix(mach, f, 2, SigmaMode::corrected);
    auto e = [&](int j) { return f(mach.phase[j]); };
    for (int i = 0; i < mach.lv; ++i) {
        for (int j = 0; j < mach.lv; ++j) {
            double same_w = 1.0;   // (2 m^2 - m) / (6 m - 6) at m = 2
            double same_c = 0.5;   // E{s^2} at m = 2
            double cross = 0.25;   // E{s}^2
            double ww = e(i) * e(j) * (mach.sym[i] == mach.sym[j] ? same_w : cross);
            double cc = e(i) * e(j) * (mach.sym[i] == mach.sym[j] ? same_c : cross);
            CHECK(sw(i, j) == doctest::Approx(ww).epsilon(1e-14));
            CHECK(sc(i, j) == doctest::Approx(cc).epsilon(1e-14));
        }
    }
}

TEST_CASE("mmse on the identity channel inverts or mutes as noise dictates") {
    PamMachinery mach({1.0}, 1, 1);
    Eigen::VectorXd f(1);
    f << 1.0;
    MmseEqualizer clean = mmse_filter(mach, f, 2, 0.0, SigmaMode::corrected);
    CHECK(clean.w(0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(clean.b == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(isi_noise_power(mach, f, 2, 0.0, SigmaMode::corrected, clean.w, clean.b)
          == doctest::Approx(0.0).epsilon(1e-12));

    MmseEqualizer deaf = mmse_filter(mach, f, 2, 1e12, SigmaMode::corrected);
    CHECK(std::abs(deaf.w(0)) < 1e-9);
    CHECK(deaf.b == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(isi_noise_power(mach, f, 2, 1e12, SigmaMode::corrected, deaf.w, deaf.b)
          == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("trivial receiver w = 0, b = 1/2 scores the prior variance") {
    PamMachinery mach({0.7, 0.3}, 2, 5);
    Eigen::VectorXd f(2);
    f << 1.0, 0.5;
    Eigen::VectorXd w0 = Eigen::VectorXd::Zero(5);
    for (int m : {2, 4, 8}) {
        double want = pam_es2(m) - 0.25;
        CHECK(isi_noise_power(mach, f, m, 0.3, SigmaMode::corrected, w0, 0.5)
              == doctest::Approx(want).epsilon(1e-14));
        CHECK(isi_noise_power(mach, f, m, 0.3, SigmaMode::as_written, w0, 0.5)
              == doctest::Approx(want).epsilon(1e-14));
    }
}

TEST_CASE("mmse solution is a stationary point of the exact mse") {
    std::vector<double> taps = {0.40, 0.25, 0.15, 0.09, 0.06, 0.03, 0.015, 0.005};
    PamMachinery mach(taps, 4, 11);
    Eigen::VectorXd f = random_waveform(4, 5);
    const double sigma2 = 1e-2;
    for (SigmaMode mode : {SigmaMode::corrected, SigmaMode::as_written}) {
        MmseEqualizer eq = mmse_filter(mach, f, 4, sigma2, mode);
        double base = isi_noise_power(mach, f, 4, sigma2, mode, eq.w, eq.b);
        CounterRng g(99, 2);
        for (int trial = 0; trial < 40; ++trial) {
            Eigen::VectorXd dw(eq.w.size());
            for (int i = 0; i < dw.size(); ++i) dw(i) = g.normal();
            double db = g.normal();
            double eps = 1e-4;
            double perturbed = isi_noise_power(mach, f, 4, sigma2, mode,
                                               eq.w + eps * dw, eq.b + eps * db);
            CHECK(perturbed >= base - 1e-12);
        }
    }
}

TEST_CASE("woodbury and dense solves agree") {
    // Wide equalizer over a short channel triggers the low-rank path; a version
    // with a huge ridge-free dense solve must give the same filter.
    LedChannel ch{2.0e7, 10.0};
    auto taps = discrete_impulse_response(ch, 2.0e8, 15);
    PamMachinery mach(taps, 4, 31);
    Eigen::VectorXd f = random_waveform(4, 21);
    MmseEqualizer eq = mmse_filter(mach, f, 2, 1e-3, SigmaMode::corrected);
    CHECK(eq.solve_residual <= 1e-10);
    double mse = isi_noise_power(mach, f, 2, 1e-3, SigmaMode::corrected, eq.w, eq.b);
    CHECK(mse > 0.0);
    CHECK(mse < 0.25);   // beats the trivial receiver
}

TEST_CASE("affine center-tap receiver is unbiased with unit gain") {
    PamMachinery mach({1.0}, 1, 3);
    Eigen::VectorXd f(1);
    f << 0.8;
    MmseEqualizer eq = unequalized_receiver(mach, f);
    CHECK(eq.w(mach.center_row) == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(eq.b == doctest::Approx(0.0).epsilon(1e-12));
    // Through a real channel: gain through the center tap must stay one and the
    // symbol-mean ISI must cancel, i.e. y = s when all neighbors transmit 1/2.
    std::vector<double> taps = {0.5, 0.3, 0.2};
    PamMachinery mach2(taps, 2, 5);
    Eigen::VectorXd f2(2);
    f2 << 1.0, 0.7;
    MmseEqualizer eq2 = unequalized_receiver(mach2, f2);
    Eigen::VectorXd e;
    Eigen::MatrixXd P;
    mach2.pulses(f2, e, P);
    // All interfering symbols at the mean 1/2, reference symbol at level s.
    for (double s : {0.0, 0.5, 1.0}) {
        Eigen::VectorXd window = Eigen::VectorXd::Zero(mach2.lw);
        for (size_t d = 0; d < mach2.deltas.size(); ++d)
            window += P.col(d) * (int(d) == mach2.i0 ? s : 0.5);
        CHECK(eq2.w.dot(window) + eq2.b == doctest::Approx(s).epsilon(1e-12));
    }
}

TEST_CASE("design reaches full scale on a memoryless channel") {
    // With no ISI the SINR is monotone in every chip amplitude, so the box
    // corner i_max * ones is the unique optimum in either second-moment mode.
    PamMachinery mach({1.0}, 2, 5);
    const double i_max = 1.0, sigma2 = 0.5;
    for (SigmaMode mode : {SigmaMode::corrected, SigmaMode::as_written}) {
        DesignResult dr = design_waveform(mach, 2, sigma2, i_max, mode);
        for (int i = 0; i < dr.f.size(); ++i)
            CHECK(dr.f(i) == doctest::Approx(i_max).epsilon(1e-3));
        CHECK(dr.sinr_value > 0.0);
    }
}

TEST_CASE("designed waveforms stay inside the box") {
    std::vector<double> taps = {0.40, 0.25, 0.15, 0.09, 0.06, 0.03, 0.015, 0.005};
    PamMachinery mach(taps, 4, 17);
    DesignResult dr = design_waveform(mach, 4, 1e-3, 10.0, SigmaMode::corrected);
    for (int i = 0; i < dr.f.size(); ++i) {
        CHECK(dr.f(i) >= -1e-12);
        CHECK(dr.f(i) <= 10.0 + 1e-12);
    }
    CHECK(dr.iterations > 0);
}

TEST_CASE("doubling the drive limit cannot hurt the designed sinr") {
    std::vector<double> taps = {0.6, 0.3, 0.1};
    PamMachinery mach(taps, 4, 9);
    DesignResult lo = design_waveform(mach, 2, 1e-2, 1.0, SigmaMode::corrected);
    DesignResult hi = design_waveform(mach, 2, 1e-2, 2.0, SigmaMode::corrected);
    CHECK(hi.sinr_value >= lo.sinr_value - 1e-9);
}

TEST_CASE("designed waveform beats the rectangular pulse") {
    LedChannel ch{2.0e7, 10.0};
    auto taps = discrete_impulse_response(ch, 3.0e8);
    PamMachinery mach(taps, 4, int(2 * taps.size() + 1));
    const double sigma2 = 3.0e-9 * 3.0e8;
    DesignResult dr = design_waveform(mach, 2, sigma2, 10.0, SigmaMode::corrected);
    Eigen::VectorXd rect = Eigen::VectorXd::Constant(4, 10.0);
    MmseEqualizer req = mmse_filter(mach, rect, 2, sigma2, SigmaMode::corrected);
    double rect_mse = isi_noise_power(mach, rect, 2, sigma2, SigmaMode::corrected,
                                      req.w, req.b);
    double rect_sinr = pam_sinr(2, rect_mse, SinrRule::corrected);
    CHECK(dr.sinr_value >= rect_sinr - 1e-9);
}

TEST_CASE("rate search returns the only grid point when it is feasible") {
    LedChannel ch{2.0e7, 8.0};
    NoiseModel noise{3.0e-9};
    RateOptimum opt = maximize_rate(ch, noise, 0.5, {2}, {2.0e8}, 4,
                                    PamScheme::jow, SigmaMode::corrected,
                                    SinrRule::corrected);
    CHECK(opt.feasible);
    CHECK(opt.m == 2);
    CHECK(opt.rc == doctest::Approx(2.0e8));
    CHECK(opt.rate == doctest::Approx(5.0e7).epsilon(1e-12));
    CHECK(opt.analytic_ber < 0.5);
    CHECK(opt.f.size() == 4);

    RateOptimum none = maximize_rate(ch, noise, 1e-300, {2}, {2.0e8}, 4,
                                     PamScheme::jow, SigmaMode::corrected,
                                     SinrRule::corrected);
    CHECK(!none.feasible);
    CHECK(!none.diagnostic.empty());
}

TEST_CASE("rate search is monotone in the ber budget") {
    LedChannel ch{2.0e7, 8.0};
    NoiseModel noise{3.0e-9};
    const std::vector<int> ms = {2, 4};
    const std::vector<double> rcs = {5e7, 1e8, 2e8, 3e8};
    RateOptimum tight = maximize_rate(ch, noise, 1e-4, ms, rcs, 4,
                                      PamScheme::jow, SigmaMode::corrected,
                                      SinrRule::corrected);
    RateOptimum loose = maximize_rate(ch, noise, 1e-2, ms, rcs, 4,
                                      PamScheme::jow, SigmaMode::corrected,
                                      SinrRule::corrected);
    REQUIRE(tight.feasible);
    REQUIRE(loose.feasible);
    CHECK(loose.rate >= tight.rate - 1e-9);
}

TEST_CASE("synthesize tiles the waveform scaled by each symbol") {
    Eigen::VectorXd f(2);
    f << 1.0, 2.0;
    auto x = synthesize(f, {0.0, 0.5, 1.0});
    REQUIRE(x.size() == 6);
    CHECK(x == std::vector<double>{0.0, 0.0, 0.5, 1.0, 1.0, 2.0});
}
