#include "ledlink/montecarlo.hpp"
#include "ledlink/fft.hpp"
#include "ledlink/qam.hpp"
#include "ledlink/rng.hpp"
#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace ledlink {

namespace {

constexpr double kWilsonZ = 1.959963984540054;  // 95% two-sided

void check_budget(const SimRun& run) {
    if (run.n_symbols == 0) throw std::invalid_argument("symbol budget must be positive");
    if (run.predicted_ber > 0.0 &&
        run.predicted_ber * static_cast<double>(run.n_symbols) < 100.0)
        throw std::runtime_error(
            "symbol budget too small to observe 100 errors at the predicted error rate");
}

} // namespace

uint64_t SimRun::symbols_for(double ber, double confidence) {
    if (ber <= 0.0 || ber >= 1.0) throw std::invalid_argument("ber must be in (0, 1)");
    if (confidence <= 0.0) throw std::invalid_argument("confidence must be positive");
    return static_cast<uint64_t>(std::ceil(1.0 / (confidence * confidence * ber)));
}

double BerEstimate::ci_low() const {
    if (bits == 0 || bit_errors == 0) return 0.0;  // exact bound; avoids fp cancellation at p=0
    const double n = static_cast<double>(bits), p = ber(), z2 = kWilsonZ * kWilsonZ;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = kWilsonZ * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return std::max(0.0, center - half);
}

double BerEstimate::ci_high() const {
    if (bits == 0) return 1.0;
    const double n = static_cast<double>(bits), p = ber(), z2 = kWilsonZ * kWilsonZ;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = kWilsonZ * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return std::min(1.0, center + half);
}

OfdmSimResult simulate_ofdm(const OfdmPlan& plan, const LedChannel& ch,
                            const NoiseModel& noise, const SimRun& run) {
    check_budget(run);
    const int n = plan.n;
    const int nd = plan.n_data();
    if (static_cast<int>(plan.bits.size()) != nd)
        throw std::invalid_argument("plan bit allocation does not match subcarrier count");

    const std::vector<double> taps = discrete_impulse_response(ch, plan.sample_rate());
    const int lh = static_cast<int>(taps.size());

    // DFT gain of the simulated discrete channel at each data bin: the receiver
    // equalizes with the gain the simulated system actually has.
    std::vector<cplx> bin_gain(nd);
    for (int i = 1; i <= nd; ++i) {
        cplx g(0.0, 0.0);
        for (int k = 0; k < lh; ++k) {
            const double ang = -2.0 * M_PI * double(i) * double(k) / double(n);
            g += taps[k] * cplx(std::cos(ang), std::sin(ang));
        }
        bin_gain[i - 1] = g;
    }

    const double alpha = bussgang_alpha(ch.i_max, ofdm_sigma_s(plan.beta, n));
    const double noise_sd = std::sqrt(noise.ofdm_var(plan.t_ofdm));

    std::map<int, QamMapper> mappers;
    int loaded = 0;
    for (int b : plan.bits) {
        if (b < 0 || b % 2 != 0) throw std::invalid_argument("bit loads must be even and non-negative");
        if (b > 0) {
            ++loaded;
            mappers.emplace(b, QamMapper(1 << b));
        }
    }
    if (loaded == 0) throw std::invalid_argument("plan carries no data");

    const uint64_t max_frames =
        std::max<uint64_t>(1, (run.n_symbols + loaded - 1) / loaded);
    const int frame_len = plan.cp_len + n;

    OfdmSimResult out;
    out.per_subcarrier.assign(nd, {});
    out.snr_hat.assign(nd, 0.0);
    std::vector<double> err2(nd, 0.0), sig2(nd, 0.0);

    // Channel delay line across frames (linear convolution over the whole stream).
    std::vector<double> delay(lh - 1 > 0 ? lh - 1 : 0, 0.0);
    // Regression accumulators for the Bussgang estimate.
    double rn = 0.0, rs = 0.0, rc = 0.0, rss = 0.0, rsc = 0.0, rcc = 0.0;

    std::vector<cplx> spectrum(n), window(n);
    std::vector<int> tx_r(nd), tx_i(nd);
    std::vector<double> clipped(frame_len), received(frame_len);

    for (uint64_t fr = 0; fr < max_frames; ++fr) {
        CounterRng bits_rng(run.seed, fr * 2);
        CounterRng noise_rng(run.seed, fr * 2 + 1);

        std::vector<cplx> syms(nd, cplx(0.0, 0.0));
        for (int i = 0; i < nd; ++i) {
            if (plan.bits[i] == 0) { tx_r[i] = tx_i[i] = 0; continue; }
            const QamMapper& map = mappers.at(plan.bits[i]);
            tx_r[i] = static_cast<int>(bits_rng.below(map.side));
            tx_i[i] = static_cast<int>(bits_rng.below(map.side));
            syms[i] = map.symbol(tx_r[i], tx_i[i]);
        }

        std::vector<double> s = modulate(plan, syms);
        for (int t = 0; t < frame_len; ++t) {
            clipped[t] = std::clamp(s[t], 0.0, ch.i_max);
            rn += 1.0; rs += s[t]; rc += clipped[t];
            rss += s[t] * s[t]; rsc += s[t] * clipped[t]; rcc += clipped[t] * clipped[t];
        }

        for (int t = 0; t < frame_len; ++t) {
            double y = taps[0] * clipped[t];
            for (int k = 1; k < lh; ++k) {
                const int src = t - k;
                y += taps[k] * (src >= 0 ? clipped[src] : (lh - 1 + src < 0 ? 0.0 : delay[lh - 1 + src]));
            }
            received[t] = y + noise_sd * noise_rng.normal();
        }
        for (int k = 0; k < lh - 1; ++k)
            delay[k] = clipped[frame_len - (lh - 1) + k];

        for (int j = 0; j < n; ++j) window[j] = cplx(received[plan.cp_len + j], 0.0);
        fft_inplace(window, false);

        for (int i = 0; i < nd; ++i) {
            if (plan.bits[i] == 0) continue;
            const QamMapper& map = mappers.at(plan.bits[i]);
            const cplx xhat = window[i + 1] / (alpha * plan.beta * bin_gain[i]);
            const int hr = map.slice(xhat.real());
            const int hi = map.slice(xhat.imag());
            const int be = QamMapper::bit_errors(tx_r[i], hr) + QamMapper::bit_errors(tx_i[i], hi);
            out.per_subcarrier[i].bit_errors += be;
            out.per_subcarrier[i].bits += plan.bits[i];
            out.total.bit_errors += be;
            out.total.bits += plan.bits[i];
            const cplx tx = map.symbol(tx_r[i], tx_i[i]);
            err2[i] += std::norm(xhat - tx);
            sig2[i] += std::norm(tx);
        }
        ++out.frames;
        if (out.total.bit_errors >= run.min_errors) break;
    }

    const double var_s = rss / rn - (rs / rn) * (rs / rn);
    const double cov = rsc / rn - (rs / rn) * (rc / rn);
    out.alpha_hat = cov / var_s;
    out.clip_var_hat = (rcc / rn - (rc / rn) * (rc / rn)) - out.alpha_hat * out.alpha_hat * var_s;
    for (int i = 0; i < nd; ++i)
        out.snr_hat[i] = err2[i] > 0.0 ? sig2[i] / err2[i] : 0.0;
    return out;
}

double bussgang_alpha_mc(double i_max, double sigma_s, uint64_t n, uint64_t seed) {
    if (n == 0) throw std::invalid_argument("sample count must be positive");
    CounterRng rng(seed, 0xA1FAull);
    const double mu = 0.5 * i_max;
    double rs = 0.0, rc = 0.0, rss = 0.0, rsc = 0.0;
    for (uint64_t i = 0; i < n; ++i) {
        const double s = mu + sigma_s * rng.normal();
        const double c = std::clamp(s, 0.0, i_max);
        rs += s; rc += c; rss += s * s; rsc += s * c;
    }
    const double nn = static_cast<double>(n);
    return (rsc / nn - (rs / nn) * (rc / nn)) / (rss / nn - (rs / nn) * (rs / nn));
}

PamSimResult simulate_pam(const PamMachinery& mach, const Eigen::VectorXd& f,
                          const MmseEqualizer& eq, int m, double noise_var,
                          const SimRun& run) {
    check_budget(run);
    if (eq.w.size() != mach.lw) throw std::invalid_argument("equalizer length mismatch");
    if (m < 2) throw std::invalid_argument("constellation size must be at least 2");
    const int lf = mach.lf, lh = mach.lh, lw = mach.lw;
    const long long c_off = (lf + lh + 1) / 2;
    const long long d = mach.center_row;
    const long long n_edge = (mach.lv + lh) / lf + 2;
    const long long n_total = static_cast<long long>(run.n_symbols);
    if (n_total <= 2 * n_edge)
        throw std::runtime_error("symbol budget smaller than the channel-memory edge exclusion");

    CounterRng sym_rng(run.seed, 0xB175ull);
    CounterRng noise_rng(run.seed, 0x9015Eull);
    const double noise_sd = std::sqrt(noise_var);
    const bool pow2 = (m & (m - 1)) == 0;
    auto level_at = [&](long long q) {
        const uint64_t u = sym_rng.u64_at(static_cast<uint64_t>(q));
        return static_cast<int>(pow2 ? (u & (m - 1)) : (u % m));
    };

    const double bits_per_symbol = std::log2(static_cast<double>(m));
    const long long total_chips = n_total * lf;
    PamSimResult out;
    double mse_acc = 0.0;

    const long long block = 4096;
    std::vector<double> xbuf, rxbuf;
    for (long long q0 = n_edge; q0 < n_total - n_edge; q0 += block) {
        const long long q1 = std::min(q0 + block, n_total - n_edge);
        const long long t_lo = q0 * lf + c_off - d;
        const long long t_hi = (q1 - 1) * lf + c_off - d + lw - 1;
        const long long x_lo = t_lo - lh, x_hi = t_hi - 1;

        xbuf.assign(static_cast<size_t>(x_hi - x_lo + 1), 0.0);
        for (long long t = std::max<long long>(x_lo, 0); t <= std::min(x_hi, total_chips - 1); ++t) {
            const long long q = t / lf;
            xbuf[static_cast<size_t>(t - x_lo)] =
                (level_at(q) / (m - 1.0)) * f(static_cast<int>(t % lf));
        }

        rxbuf.assign(static_cast<size_t>(t_hi - t_lo + 1), 0.0);
        for (long long t = t_lo; t <= t_hi; ++t) {
            double y = 0.0;
            for (int k = 0; k < lh; ++k)
                y += mach.h[k] * xbuf[static_cast<size_t>(t - 1 - k - x_lo)];
            rxbuf[static_cast<size_t>(t - t_lo)] =
                y + noise_sd * noise_rng.normal_at(static_cast<uint64_t>(t));
        }

        for (long long q = q0; q < q1; ++q) {
            const long long base = q * lf + c_off - d - t_lo;
            double yhat = eq.b;
            for (int r = 0; r < lw; ++r)
                yhat += eq.w(r) * rxbuf[static_cast<size_t>(base + r)];
            const int k = level_at(q);
            const double s = k / (m - 1.0);
            mse_acc += (yhat - s) * (yhat - s);
            int khat = static_cast<int>(std::lround(yhat * (m - 1)));
            khat = std::clamp(khat, 0, m - 1);
            out.total.bit_errors += QamMapper::bit_errors(k, khat);
            ++out.symbols;
        }
        out.total.bits = static_cast<uint64_t>(out.symbols * bits_per_symbol + 0.5);
        if (out.total.bit_errors >= run.min_errors) break;
    }
    out.mse_hat = out.symbols ? mse_acc / out.symbols : 0.0;
    return out;
}

BaselineResult unequalized_pam_baseline(const PamConfig& cfg, const LedChannel& ch,
                                        const NoiseModel& noise, const SimRun& run) {
    std::vector<double> taps = discrete_impulse_response(ch, cfg.rc);
    const int lw = cfg.l_w > 0 ? cfg.l_w : 2 * static_cast<int>(taps.size()) + 1;
    PamMachinery mach(std::move(taps), cfg.l_f, lw);
    const Eigen::VectorXd f = Eigen::VectorXd::Constant(cfg.l_f, ch.i_max);
    MmseEqualizer eq = unequalized_receiver(mach, f);
    const double sigma2 = noise.pam_var(cfg.rc);

    BaselineResult out;
    out.mse = isi_noise_power(mach, f, cfg.m, sigma2, SigmaMode::corrected, eq.w, eq.b);
    out.analytic_ber = pam_ber(cfg.m, pam_sinr(cfg.m, out.mse, SinrRule::calibrated));
    out.sim = simulate_pam(mach, f, eq, cfg.m, sigma2, run);
    return out;
}

} // namespace ledlink
