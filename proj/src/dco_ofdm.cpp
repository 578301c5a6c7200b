#include "ledlink/dco_ofdm.hpp"
#include "ledlink/fft.hpp"
#include "ledlink/math_util.hpp"
#include "ledlink/qam.hpp"
#include "ledlink/rng.hpp"
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ledlink {

double ofdm_sigma_s(double beta, int n) {
    return (beta / n) * std::sqrt(double(n - 2));
}

double bussgang_alpha(double i_max, double sigma_s) {
    if (sigma_s <= 0.0) return 1.0;
    return 1.0 - std::erfc(i_max / std::sqrt(8.0 * sigma_s * sigma_s));
}

double clipping_noise_variance(double i_max, double sigma_s) {
    if (sigma_s <= 0.0) return 0.0;
    double a = bussgang_alpha(i_max, sigma_s);
    double mu = a * i_max / 2.0;
    double sd = a * sigma_s;
    if (sd <= 0.0) return 0.0;
    // 13 sd covers the tails far past double precision of the Gaussian mass
    double lo = std::min(0.0, mu - 13.0 * sd);
    double hi = std::max(i_max, mu + 13.0 * sd);
    double below = integrate([&](double x) {
        double e = a * x;
        return e * e * normal_pdf(x, mu, sd);
    }, lo, 0.0, 1e-10);
    double above = integrate([&](double x) {
        double e = a * x - i_max;
        return e * e * normal_pdf(x, mu, sd);
    }, i_max, hi, 1e-10);
    return below + above;
}

double clipping_noise_variance_mc(double i_max, double sigma_s,
                                  long long n, uint64_t seed) {
    double a = bussgang_alpha(i_max, sigma_s);
    CounterRng rng(seed, 0x0c11);
    double mu = a * i_max / 2.0, sd = a * sigma_s;
    double acc = 0.0;
    for (long long k = 0; k < n; ++k) {
        double x = mu + sd * rng.normal();  // draw of alpha * s
        if (x < 0.0) { double e = a * x; acc += e * e; }
        else if (x > i_max) { double e = a * x - i_max; acc += e * e; }
    }
    return acc / double(n);
}

ClippingStats clipping_stats(double i_max, double sigma_s) {
    ClippingStats st;
    st.sigma_s2 = sigma_s * sigma_s;
    st.alpha = bussgang_alpha(i_max, sigma_s);
    st.clip_var = clipping_noise_variance(i_max, sigma_s);
    return st;
}

double subcarrier_snr(const OfdmPlan& plan, const LedChannel& ch,
                      const NoiseModel& noise, const ClippingStats& st,
                      int i, double ex2) {
    if (i < 1 || i > plan.n / 2 - 1)
        throw std::invalid_argument("not a data subcarrier");
    double fi = double(i) / plan.t_ofdm;
    double habs = std::abs(frequency_response(ch, fi));
    double num = plan.beta * st.alpha * habs;
    return num * num * ex2 / (plan.n * (noise.ofdm_var(plan.t_ofdm) + st.clip_var));
}

OfdmPlan bit_load(const LedChannel& ch, const NoiseModel& noise,
                  double beta, double t_ofdm, int n, double b_max,
                  const std::vector<int>& qam_sizes, bool cp, double ex2) {
    OfdmPlan plan;
    plan.n = n;
    plan.t_ofdm = t_ofdm;
    plan.beta = beta;
    plan.dc_bias = ch.i_max / 2.0;
    plan.cp_len = cp ? impulse_length(ch, plan.sample_rate()) - 1 : 0;
    ClippingStats st = clipping_stats(ch.i_max, ofdm_sigma_s(beta, n));
    plan.bits.resize(plan.n_data(), 0);
    for (int i = 1; i <= plan.n_data(); ++i) {
        double g = subcarrier_snr(plan, ch, noise, st, i, ex2);
        int m = max_qam_size(g, b_max, qam_sizes);
        plan.bits[i - 1] = m ? int(std::lround(std::log2(double(m)))) : 0;
    }
    return plan;
}

double throughput(const OfdmPlan& plan) {
    long long total = 0;
    for (int b : plan.bits) total += b;
    double rate = double(total) / plan.t_ofdm;
    if (plan.cp_len > 0) rate *= double(plan.n) / double(plan.n + plan.cp_len);
    return rate;
}

OfdmOptimum optimize_ofdm(const LedChannel& ch, const NoiseModel& noise,
                          double b_max, const std::vector<double>& betas,
                          const std::vector<double>& ts, int n,
                          const std::vector<int>& qam_sizes, bool cp, double ex2) {
    if (betas.empty() || ts.empty())
        throw std::invalid_argument("empty search grid");
    std::vector<double> bs(betas), tg(ts);
    std::sort(bs.begin(), bs.end());
    std::sort(tg.begin(), tg.end());
    OfdmOptimum best;
    bool first = true;
    // beta outer / T inner with strict > keeps ties at the smaller beta, then smaller T
    for (double beta : bs) {
        for (double t : tg) {
            OfdmPlan p = bit_load(ch, noise, beta, t, n, b_max, qam_sizes, cp, ex2);
            double r = throughput(p);
            if (first || r > best.rate) {
                best.plan = p;
                best.rate = r;
                first = false;
            }
        }
    }
    return best;
}

std::vector<double> modulate(const OfdmPlan& plan,
                             const std::vector<std::complex<double>>& qam_symbols) {
    int n = plan.n;
    if (n < 4 || (n & (n - 1)) != 0)
        throw std::invalid_argument("subcarrier count must be a power of two >= 4");
    if (int(qam_symbols.size()) != plan.n_data())
        throw std::invalid_argument("expected one symbol per data subcarrier");
    std::vector<cplx> spectrum(n, cplx(0.0, 0.0));
    for (int i = 1; i <= plan.n_data(); ++i) {
        spectrum[i] = qam_symbols[i - 1];
        spectrum[n - i] = std::conj(qam_symbols[i - 1]);
    }
    std::vector<cplx> x = idft(std::move(spectrum));
    std::vector<double> s(n + plan.cp_len);
    double g = plan.beta / n;
    for (int k = 0; k < n; ++k)
        s[plan.cp_len + k] = g * x[k].real() + plan.dc_bias;
    for (int k = 0; k < plan.cp_len; ++k)
        s[k] = s[n + k];  // prefix copies the block tail
    return s;
}

} // namespace ledlink
