#include "ledlink/mpam_jow.hpp"
#include "ledlink/math_util.hpp"
#include "ledlink/rng.hpp"
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>

namespace ledlink {

namespace {

// Floor division/modulo matching mathematical convention for negative operands.
long long floor_div(long long a, long long b) {
    long long q = a / b, r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) --q;
    return q;
}
long long floor_mod(long long a, long long b) {
    long long r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) r += b;
    return r;
}

double same_symbol_coef(int m, SigmaMode mode) {
    return mode == SigmaMode::as_written ? m * pam_es2(m) : pam_es2(m);
}

// Exact mean squared error of the affine receiver, written in terms of the
// per-symbol pulse matrix P (lw x n_deltas) and q = H E{x}:
//   E{(w^T r + b - s)^2} = v ||P^T w||^2 + (w^T q)^2 + sigma2 ||w||^2
//                          + 2 b w^T q - 2 w^T(Var(s) p0 + q/2) + b^2 - b + E{s^2}
// with v the mode's symbol variance. E{x} and E{s x} always use the true
// uniform-alphabet moments; the mode only rescales the autocovariance.
double mse_from_pulses(const Eigen::MatrixXd& P, const Eigen::VectorXd& q, int i0,
                       int m, double noise_var, SigmaMode mode,
                       const Eigen::VectorXd& w, double b) {
    const double es2 = pam_es2(m);
    const double var_s = pam_var(m);
    const double var_mode = same_symbol_coef(m, mode) - 0.25;
    Eigen::VectorXd ptw = P.transpose() * w;
    const double wq = w.dot(q);
    return var_mode * ptw.squaredNorm() + wq * wq + noise_var * w.squaredNorm()
           + 2.0 * b * wq - 2.0 * (var_s * ptw(i0) + 0.5 * wq) + b * b - b + es2;
}

struct PulseSet {
    Eigen::VectorXd e;
    Eigen::MatrixXd P;
    Eigen::VectorXd q;
};

PulseSet make_pulses(const PamMachinery& mach, const Eigen::VectorXd& f) {
    PulseSet ps;
    mach.pulses(f, ps.e, ps.P);
    ps.q = 0.5 * ps.P.rowwise().sum();
    return ps;
}

MmseEqualizer solve_mmse(const PamMachinery& mach, const PulseSet& ps, int m,
                         double noise_var, SigmaMode mode) {
    const int lw = mach.lw;
    const int nd = static_cast<int>(mach.deltas.size());
    const double var_mode = same_symbol_coef(m, mode) - 0.25;
    const double var_s = pam_var(m);
    Eigen::VectorXd rhs = var_s * ps.P.col(mach.i0);

    MmseEqualizer eq;
    const double rhs_norm = std::max(rhs.norm(), 1e-300);
    auto residual_of = [&](const Eigen::VectorXd& w) {
        Eigen::VectorXd aw = var_mode * (ps.P * (ps.P.transpose() * w)) + noise_var * w;
        return (aw - rhs).norm() / rhs_norm;
    };

    bool solved = false;
    if (nd < lw && noise_var > 0.0 && var_mode > 0.0) {
        // Low-rank identity: (v P P^T + s I)^-1 = (I - P (P^T P + s/v I)^-1 P^T)/s.
        Eigen::MatrixXd k = ps.P.transpose() * ps.P;
        k.diagonal().array() += noise_var / var_mode;
        Eigen::LLT<Eigen::MatrixXd> llt(k);
        if (llt.info() == Eigen::Success) {
            Eigen::VectorXd y = llt.solve(ps.P.transpose() * rhs);
            eq.w = (rhs - ps.P * y) / noise_var;
            eq.solve_residual = residual_of(eq.w);
            solved = eq.solve_residual <= 1e-10;
        }
    }
    if (!solved) {
        Eigen::MatrixXd a = var_mode * (ps.P * ps.P.transpose());
        a.diagonal().array() += noise_var;
        const double scale = std::max(a.trace() / lw, 1e-300);
        double ridge = 0.0;
        for (double rel = 1e-12; ; rel *= 10.0) {
            Eigen::MatrixXd ar = a;
            if (ridge > 0.0) ar.diagonal().array() += ridge;
            Eigen::LLT<Eigen::MatrixXd> llt(ar);
            if (llt.info() == Eigen::Success) {
                eq.w = llt.solve(rhs);
                eq.solve_residual = residual_of(eq.w);
                if (eq.solve_residual <= 1e-10 || rel > 1e-6) break;
            }
            ridge = rel * scale;
            eq.ridged = true;
            if (rel > 1e-6) {
                if (eq.w.size() == 0) eq.w = Eigen::VectorXd::Zero(lw);
                break;
            }
        }
    }
    eq.b = 0.5 - eq.w.dot(ps.q);
    return eq;
}

SinrRule rule_for(SigmaMode mode) {
    return mode == SigmaMode::as_written ? SinrRule::as_written : SinrRule::corrected;
}

} // namespace

SinrRule paired_sinr_rule(SigmaMode mode) { return rule_for(mode); }

double pam_es2(int m) {
    if (m < 2) throw std::invalid_argument("constellation size must be at least 2");
    return (2.0 * m - 1.0) / (6.0 * (m - 1.0));
}

double pam_var(int m) { return pam_es2(m) - 0.25; }

double pam_sinr(int m, double mse, SinrRule rule) {
    if (mse <= 0.0) throw std::invalid_argument("mse must be positive");
    switch (rule) {
        case SinrRule::as_written:
            return (2.0 * m * m - m) / (6.0 * m - 6.0) / mse;
        case SinrRule::corrected:
            return pam_es2(m) / mse;
        case SinrRule::calibrated:
            return 1.0 / (8.0 * mse);
    }
    throw std::logic_error("unknown sinr rule");
}

double pam_ber(int m, double gamma) {
    if (m < 2 || (m & (m - 1)) != 0) throw std::invalid_argument("constellation size must be a power of two");
    if (gamma < 0.0) throw std::invalid_argument("sinr must be non-negative");
    const double bits = std::log2(static_cast<double>(m));
    return (m - 1.0) / (m * bits) * std::erfc(std::sqrt(gamma) / (m - 1.0));
}

PamMachinery::PamMachinery(std::vector<double> taps, int l_f, int l_w)
    : h(std::move(taps)), lf(l_f), lw(l_w) {
    if (h.empty()) throw std::invalid_argument("channel taps must be non-empty");
    if (lf < 1) throw std::invalid_argument("waveform length must be positive");
    if (lw < 1 || lw % 2 == 0) throw std::invalid_argument("equalizer length must be odd and positive");
    lh = static_cast<int>(h.size());
    lv = lw + lh - 1;
    center_row = (lw - 1) / 2;

    const long long c = (lf + lh + 1) / 2;
    sym.resize(lv);
    phase.resize(lv);
    for (int j = 0; j < lv; ++j) {
        const long long a = c - center_row - lh + j;
        sym[j] = static_cast<int>(floor_div(a, lf));
        phase[j] = static_cast<int>(floor_mod(a, lf));
    }

    H = Eigen::MatrixXd::Zero(lw, lv);
    for (int r = 0; r < lw; ++r)
        for (int k = 0; k < lh; ++k)
            H(r, r + lh - 1 - k) = h[k];

    deltas.assign(sym.begin(), sym.end());
    std::sort(deltas.begin(), deltas.end());
    deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());
    auto it = std::lower_bound(deltas.begin(), deltas.end(), 0);
    if (it == deltas.end() || *it != 0)
        throw std::logic_error("window does not cover the reference symbol");
    i0 = static_cast<int>(it - deltas.begin());
}

void PamMachinery::pulses(const Eigen::VectorXd& f, Eigen::VectorXd& e,
                          Eigen::MatrixXd& P) const {
    if (f.size() != lf) throw std::invalid_argument("waveform length mismatch");
    e.resize(lv);
    for (int j = 0; j < lv; ++j) e(j) = f(phase[j]);
    const int nd = static_cast<int>(deltas.size());
    P.setZero(lw, nd);
    // Column j of H contributes e[j] to the pulse of the symbol that owns it;
    // symbol offsets are contiguous so the slot is an offset from deltas[0].
    for (int j = 0; j < lv; ++j) {
        if (e(j) == 0.0) continue;
        P.col(sym[j] - deltas[0]) += e(j) * H.col(j);
    }
}

ToeplitzBuild build_toeplitz(const std::vector<double>& taps, int l_w) {
    PamMachinery mach(taps, 1, l_w);
    ToeplitzBuild tb;
    tb.h_matrix = mach.H;
    tb.n_u = 0;
    tb.n_l = static_cast<int>(taps.size()) - 1;
    return tb;
}

Eigen::MatrixXd sigma_matrix(const PamMachinery& mach, const Eigen::VectorXd& f,
                             int m, SigmaMode mode) {
    if (f.size() != mach.lf) throw std::invalid_argument("waveform length mismatch");
    const double coef_same = same_symbol_coef(m, mode);
    Eigen::MatrixXd sig(mach.lv, mach.lv);
    for (int i = 0; i < mach.lv; ++i) {
        const double fi = f(mach.phase[i]);
        for (int j = 0; j < mach.lv; ++j) {
            const double coef = mach.sym[i] == mach.sym[j] ? coef_same : 0.25;
            sig(i, j) = coef * fi * f(mach.phase[j]);
        }
    }
    return sig;
}

MmseEqualizer mmse_filter(const PamMachinery& mach, const Eigen::VectorXd& f,
                          int m, double noise_var, SigmaMode mode) {
    if (noise_var < 0.0) throw std::invalid_argument("noise variance must be non-negative");
    PulseSet ps = make_pulses(mach, f);
    return solve_mmse(mach, ps, m, noise_var, mode);
}

MmseEqualizer unequalized_receiver(const PamMachinery& mach, const Eigen::VectorXd& f) {
    PulseSet ps = make_pulses(mach, f);
    const int cr = mach.center_row;
    const double gain = ps.P(cr, mach.i0);
    if (std::abs(gain) < 1e-300)
        throw std::invalid_argument("waveform has no energy at the detection tap");
    const double offset = 0.5 * (ps.P.row(cr).sum() - gain);
    MmseEqualizer eq;
    eq.w = Eigen::VectorXd::Zero(mach.lw);
    eq.w(cr) = 1.0 / gain;
    eq.b = -offset / gain;
    return eq;
}

double isi_noise_power(const PamMachinery& mach, const Eigen::VectorXd& f,
                       int m, double noise_var, SigmaMode mode,
                       const Eigen::VectorXd& w, double b) {
    if (w.size() != mach.lw) throw std::invalid_argument("equalizer length mismatch");
    PulseSet ps = make_pulses(mach, f);
    return mse_from_pulses(ps.P, ps.q, mach.i0, m, noise_var, mode, w, b);
}

DesignResult design_waveform(const PamMachinery& mach, int m, double noise_var,
                             double i_max, SigmaMode mode, const DesignOptions& opts) {
    if (i_max <= 0.0) throw std::invalid_argument("peak level must be positive");
    const SinrRule rule = rule_for(mode);
    const int lf = mach.lf;

    auto gamma_of = [&](const Eigen::VectorXd& f) {
        PulseSet ps = make_pulses(mach, f);
        MmseEqualizer eq = solve_mmse(mach, ps, m, noise_var, mode);
        const double mse = mse_from_pulses(ps.P, ps.q, mach.i0, m, noise_var, mode, eq.w, eq.b);
        return pam_sinr(m, mse, rule);
    };
    auto boxed = [&](Eigen::VectorXd f) {
        for (int j = 0; j < lf; ++j) f(j) = std::clamp(f(j), 0.0, i_max);
        return f;
    };
    const double step = opts.grad_step_rel * i_max;
    auto gradient_at = [&](const Eigen::VectorXd& f) {
        Eigen::VectorXd g(lf);
        for (int j = 0; j < lf; ++j) {
            Eigen::VectorXd fp = f, fm = f;
            fp(j) = std::min(f(j) + step, i_max);
            fm(j) = std::max(f(j) - step, 0.0);
            g(j) = (gamma_of(fp) - gamma_of(fm)) / (fp(j) - fm(j));
        }
        return g;
    };
    auto kkt_residual = [&](const Eigen::VectorXd& f, const Eigen::VectorXd& g, double gamma) {
        const double edge = 1e-9 * i_max;
        const double scale = i_max / std::max(gamma, 1e-300);
        double worst = 0.0;
        for (int j = 0; j < lf; ++j) {
            const double gn = g(j) * scale;
            double viol;
            if (f(j) >= i_max - edge) viol = std::max(0.0, -gn);      // push outward or flat
            else if (f(j) <= edge) viol = std::max(0.0, gn);
            else viol = std::abs(gn);
            worst = std::max(worst, viol);
        }
        return worst;
    };

    std::vector<Eigen::VectorXd> seeds;
    for (double lv : opts.seed_levels)
        seeds.push_back(Eigen::VectorXd::Constant(lf, lv * i_max));
    {
        CounterRng rng(opts.random_seed, 0x5eedULL);
        Eigen::VectorXd fr(lf);
        for (int j = 0; j < lf; ++j) fr(j) = i_max * rng.u01();
        seeds.push_back(fr);
    }

    DesignResult best;
    best.sinr_value = -1.0;
    for (const auto& seed : seeds) {
        Eigen::VectorXd f = boxed(seed);
        double gamma = gamma_of(f);
        // Ascent phase runs until gains fall below rel_tol (or max_iters);
        // the polish phase then keeps stepping only to push the projected
        // gradient below kkt_tol, within polish_iters extra iterations.
        bool rel_done = false;
        int it = 0;
        const int hard_budget = opts.max_iters + opts.polish_iters;
        Eigen::VectorXd g = gradient_at(f);
        double residual = kkt_residual(f, g, gamma);
        while (it < hard_budget) {
            const bool ascent_phase = !rel_done && it < opts.max_iters;
            if (!ascent_phase && (residual <= opts.kkt_tol || opts.polish_iters == 0)) break;
            const double gn = g.norm();
            if (gn < 1e-300) break;
            bool improved = false;
            for (double t = 0.25 * i_max; t > 1e-12 * i_max; t *= 0.5) {
                Eigen::VectorXd cand = boxed(f + (t / gn) * g);
                const double gc = gamma_of(cand);
                if (gc > gamma) {
                    if (gc - gamma < opts.rel_tol * std::max(gamma, 1e-300)) rel_done = true;
                    f = std::move(cand);
                    gamma = gc;
                    improved = true;
                    break;
                }
            }
            ++it;
            if (!improved) break;  // numerically stationary
            g = gradient_at(f);
            residual = kkt_residual(f, g, gamma);
        }
        if (gamma > best.sinr_value) {
            best.f = f;
            best.sinr_value = gamma;
            best.kkt_residual = residual;
            best.iterations = it;
        }
    }

    PulseSet ps = make_pulses(mach, best.f);
    best.eq = solve_mmse(mach, ps, m, noise_var, mode);
    best.mse = mse_from_pulses(ps.P, ps.q, mach.i0, m, noise_var, mode, best.eq.w, best.eq.b);
    best.sinr_value = pam_sinr(m, best.mse, rule);
    if (!std::isfinite(best.kkt_residual))
        best.kkt_residual = kkt_residual(best.f, gradient_at(best.f), best.sinr_value);
    return best;
}

RateOptimum maximize_rate(const LedChannel& ch, const NoiseModel& noise,
                          double b_max, const std::vector<int>& m_grid,
                          const std::vector<double>& rc_grid, int l_f,
                          PamScheme scheme, SigmaMode mode, SinrRule rule,
                          const DesignOptions& opts) {
    if (b_max <= 0.0 || b_max >= 1.0) throw std::invalid_argument("target bit error rate must be in (0, 1)");
    struct Cand { int m; double rc; double rate; };
    std::vector<Cand> cands;
    for (int m : m_grid)
        for (double rc : rc_grid)
            cands.push_back({m, rc, rc * std::log2(static_cast<double>(m)) / l_f});
    // Highest rate first; ties prefer the smaller constellation, then the
    // slower chip rate, so the first feasible candidate is the optimum.
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.rate != b.rate) return a.rate > b.rate;
        if (a.m != b.m) return a.m < b.m;
        return a.rc < b.rc;
    });

    std::map<double, std::unique_ptr<PamMachinery>> mach_cache;
    auto machinery_for = [&](double rc) -> const PamMachinery& {
        auto it = mach_cache.find(rc);
        if (it == mach_cache.end()) {
            std::vector<double> taps = discrete_impulse_response(ch, rc);
            const int lw = 2 * static_cast<int>(taps.size()) + 1;
            it = mach_cache.emplace(rc, std::make_unique<PamMachinery>(std::move(taps), l_f, lw)).first;
        }
        return *it->second;
    };

    // Scan designs skip the KKT polish: feasibility only needs the ascent
    // phase, and the winning point is re-designed below under the full options.
    DesignOptions scan_opts = opts;
    scan_opts.polish_iters = 0;

    RateOptimum out;
    for (const auto& cand : cands) {
        const PamMachinery& mach = machinery_for(cand.rc);
        const double sigma2 = noise.pam_var(cand.rc);
        Eigen::VectorXd f;
        MmseEqualizer eq;
        double mse;
        if (scheme == PamScheme::jow) {
            DesignResult dr = design_waveform(mach, cand.m, sigma2, ch.i_max, mode, scan_opts);
            f = dr.f;
            eq = dr.eq;
            mse = dr.mse;
        } else {
            f = Eigen::VectorXd::Constant(l_f, ch.i_max);
            eq = scheme == PamScheme::mmse_rect ? mmse_filter(mach, f, cand.m, sigma2, mode)
                                                : unequalized_receiver(mach, f);
            mse = isi_noise_power(mach, f, cand.m, sigma2, mode, eq.w, eq.b);
        }
        const double gamma = pam_sinr(cand.m, mse, rule);
        const double ber = pam_ber(cand.m, gamma);
        if (ber < b_max) {
            if (scheme == PamScheme::jow && opts.polish_iters > 0) {
                // Re-run the winner with the polish budget; extra ascent can
                // only improve the SINR, so feasibility is preserved.
                DesignResult dr = design_waveform(mach, cand.m, sigma2, ch.i_max, mode, opts);
                if (pam_sinr(cand.m, dr.mse, rule) >= gamma) {
                    f = dr.f;
                    eq = dr.eq;
                    mse = dr.mse;
                }
            }
            const double gamma_final = pam_sinr(cand.m, mse, rule);
            out.feasible = true;
            out.rate = cand.rate;
            out.m = cand.m;
            out.rc = cand.rc;
            out.f = f;
            out.eq = eq;
            out.mse = mse;
            out.sinr_value = gamma_final;
            out.analytic_ber = pam_ber(cand.m, gamma_final);
            return out;
        }
    }
    out.diagnostic = "no grid point met the target bit error rate";
    return out;
}

std::vector<double> synthesize(const Eigen::VectorXd& f, const std::vector<double>& symbols) {
    const int lf = static_cast<int>(f.size());
    std::vector<double> x(symbols.size() * lf);
    for (size_t s = 0; s < symbols.size(); ++s)
        for (int p = 0; p < lf; ++p)
            x[s * lf + p] = symbols[s] * f(p);
    return x;
}

} // namespace ledlink
