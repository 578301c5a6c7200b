#include "ledlink/experiments.hpp"
#include "ledlink/qam.hpp"
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

namespace ledlink {

namespace {

int pool_size(const ExperimentConfig& cfg) {
    if (cfg.threads > 0) return cfg.threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Run index-addressed tasks on a small pool; results land in caller-owned
// slots, so output order is the grid order no matter how work is scheduled.
void run_tasks(int n_threads, int n_tasks, const std::function<void(int)>& task) {
    if (n_threads <= 1 || n_tasks <= 1) {
        for (int i = 0; i < n_tasks; ++i) task(i);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1)) task(i);
    };
    std::vector<std::thread> threads;
    const int spawn = std::min(n_threads, n_tasks);
    threads.reserve(spawn);
    for (int t = 0; t < spawn; ++t) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
}

double aggregate_ofdm_ber(const OfdmPlan& plan, const LedChannel& ch,
                          const NoiseModel& noise, double ex2) {
    const ClippingStats st = clipping_stats(ch.i_max, ofdm_sigma_s(plan.beta, plan.n));
    double err_bits = 0.0, bits = 0.0;
    for (int i = 1; i <= plan.n_data(); ++i) {
        const int b = plan.bits[i - 1];
        if (b == 0) continue;
        const double gamma = subcarrier_snr(plan, ch, noise, st, i, ex2);
        err_bits += b * qam_ber(1 << b, gamma);
        bits += b;
    }
    return bits > 0.0 ? err_bits / bits : std::numeric_limits<double>::quiet_NaN();
}

uint64_t row_seed(uint64_t base, int row) {
    return base ^ (0x9e3779b97f4a7c15ull * static_cast<uint64_t>(row + 1));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

} // namespace

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.8e", v);
    return buf;
}

std::string resolve_out_dir(const ExperimentConfig& cfg, const std::string& cli_out) {
    if (!cli_out.empty()) return cli_out;
    if (const char* env = std::getenv("LEDLINK_OUTPUT_DIR"); env && *env) return env;
    return cfg.out_dir;
}

std::vector<Fig3Row> run_fig3_sweep(const ExperimentConfig& cfg) {
    const LedChannel ch = cfg.channel_at(cfg.fig3_power_mw);
    const NoiseModel noise = cfg.noise();
    std::vector<Fig3Row> rows;
    for (int n : cfg.ofdm_n_list)
        for (double beta : cfg.beta_grid(n))
            rows.push_back({beta / n, beta, n, 0.0, 0});

    run_tasks(pool_size(cfg), static_cast<int>(rows.size()), [&](int i) {
        Fig3Row& r = rows[i];
        const OfdmPlan plan = bit_load(ch, noise, r.beta, cfg.fig3_t_s, r.n_subcarriers,
                                       cfg.ber_target, cfg.qam_sizes, cfg.cyclic_prefix,
                                       cfg.qam_second_moment);
        r.rb_bits_per_s = throughput(plan);
    });

    for (int n : cfg.ofdm_n_list) {
        int best = -1;
        for (size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].n_subcarriers != n) continue;
            if (best < 0 || rows[i].rb_bits_per_s > rows[best].rb_bits_per_s)
                best = static_cast<int>(i);
        }
        if (best >= 0) rows[best].is_max = 1;
    }
    return rows;
}

std::vector<Fig4Row> run_fig4_sweep(const ExperimentConfig& cfg) {
    static const char* kSchemes[] = {"dco_ofdm", "mpam_jow", "mpam_mmse", "mpam_unequalized"};
    const NoiseModel noise = cfg.noise();
    std::vector<Fig4Row> rows(cfg.powers_mw.size() * 4);

    run_tasks(pool_size(cfg), static_cast<int>(rows.size()), [&](int idx) {
        const double power = cfg.powers_mw[idx / 4];
        const int scheme = idx % 4;
        const LedChannel ch = cfg.channel_at(power);
        Fig4Row& r = rows[idx];
        r.peak_power_mw = power;
        r.scheme = kSchemes[scheme];

        SimRun run;
        run.seed = row_seed(cfg.mc_seed, idx);
        run.n_symbols = cfg.mc_max_symbols;
        run.min_errors = cfg.mc_min_errors;

        if (scheme == 0) {
            const OfdmOptimum opt = optimize_ofdm(ch, noise, cfg.ber_target,
                                                  cfg.beta_grid(cfg.ofdm_n), cfg.t_grid_s,
                                                  cfg.ofdm_n, cfg.qam_sizes,
                                                  cfg.cyclic_prefix, cfg.qam_second_moment);
            if (opt.rate <= 0.0) return;
            r.feasible = 1;
            r.rb_bits_per_s = opt.rate;
            r.analytic_ber = aggregate_ofdm_ber(opt.plan, ch, noise, cfg.qam_second_moment);
            if (cfg.simulate_sweeps) {
                const OfdmSimResult sim = simulate_ofdm(opt.plan, ch, noise, run);
                r.simulated_ber = sim.total.ber();
                r.ber_ci_low = sim.total.ci_low();
                r.ber_ci_high = sim.total.ci_high();
            }
        } else {
            const PamScheme ps = scheme == 1   ? PamScheme::jow
                                 : scheme == 2 ? PamScheme::mmse_rect
                                               : PamScheme::unequalized;
            const SigmaMode mode = scheme == 3 ? cfg.mode_unequalized : cfg.mode_equalized;
            const RateOptimum opt = maximize_rate(ch, noise, cfg.ber_target, cfg.m_grid,
                                                  cfg.rc_grid_sps, cfg.l_f, ps, mode,
                                                  paired_sinr_rule(mode), cfg.design);
            if (!opt.feasible) return;
            r.feasible = 1;
            r.rb_bits_per_s = opt.rate;
            r.analytic_ber = opt.analytic_ber;
            if (cfg.simulate_sweeps) {
                std::vector<double> taps = discrete_impulse_response(ch, opt.rc);
                const int lw = 2 * static_cast<int>(taps.size()) + 1;
                const PamMachinery mach(std::move(taps), cfg.l_f, lw);
                const PamSimResult sim = simulate_pam(mach, opt.f, opt.eq, opt.m,
                                                      noise.pam_var(opt.rc), run);
                r.simulated_ber = sim.total.ber();
                r.ber_ci_low = sim.total.ci_low();
                r.ber_ci_high = sim.total.ci_high();
            }
        }
    });

    for (Fig4Row& r : rows) r.rb_over_f3db = r.rb_bits_per_s / cfg.f3db_hz;
    return rows;
}

std::vector<BitloadRow> run_bitload(const ExperimentConfig& cfg, double beta,
                                    double t_s, int n, double power_mw,
                                    OfdmPlan* plan_out) {
    const LedChannel ch = cfg.channel_at(power_mw);
    const NoiseModel noise = cfg.noise();
    const OfdmPlan plan = bit_load(ch, noise, beta, t_s, n, cfg.ber_target,
                                   cfg.qam_sizes, cfg.cyclic_prefix,
                                   cfg.qam_second_moment);
    const ClippingStats st = clipping_stats(ch.i_max, ofdm_sigma_s(beta, n));
    std::vector<BitloadRow> rows(plan.n_data());
    for (int i = 1; i <= plan.n_data(); ++i) {
        BitloadRow& r = rows[i - 1];
        r.subcarrier = i;
        r.f_hz = i / plan.t_ofdm;
        r.snr = subcarrier_snr(plan, ch, noise, st, i, cfg.qam_second_moment);
        r.bits = plan.bits[i - 1];
        r.qam_m = r.bits > 0 ? (1 << r.bits) : 0;
        if (r.bits > 0) r.predicted_ber = qam_ber(r.qam_m, r.snr);
    }
    if (plan_out) *plan_out = plan;
    return rows;
}

DesignResult run_design(const ExperimentConfig& cfg, int m, double rc, double power_mw) {
    const LedChannel ch = cfg.channel_at(power_mw);
    std::vector<double> taps = discrete_impulse_response(ch, rc);
    const int lw = 2 * static_cast<int>(taps.size()) + 1;
    const PamMachinery mach(std::move(taps), cfg.l_f, lw);
    return design_waveform(mach, m, cfg.noise().pam_var(rc), ch.i_max,
                           cfg.mode_equalized, cfg.design);
}

std::string write_fig3(const std::string& dir, const std::vector<Fig3Row>& rows) {
    std::filesystem::create_directories(dir);
    std::string csv = "beta_over_n,beta,n_subcarriers,rb_bits_per_s,is_max\n";
    for (const Fig3Row& r : rows) {
        csv += format_real(r.beta_over_n) + "," + format_real(r.beta) + ","
             + std::to_string(r.n_subcarriers) + "," + format_real(r.rb_bits_per_s)
             + "," + std::to_string(r.is_max) + "\n";
    }
    const auto path = std::filesystem::path(dir) / "fig3.csv";
    write_text(path, csv);
    write_text(std::filesystem::path(dir) / "fig3.gp",
               "# throughput vs modulation scale at fixed symbol time\n"
               "set datafile separator ','\n"
               "set logscale x\n"
               "set xlabel 'modulation scale beta/N'\n"
               "set ylabel 'throughput R_b (bit/s)'\n"
               "set key top left\n"
               "plot for [nn in \"64 128\"] 'fig3.csv' every ::1 \\\n"
               "  using (column(1)):((column(3) == real(nn)) ? column(4) : 1/0) \\\n"
               "  with linespoints title 'N = '.nn\n");
    return path.string();
}

std::string write_fig4(const std::string& dir, const std::vector<Fig4Row>& rows) {
    std::filesystem::create_directories(dir);
    std::string csv = "peak_power_mw,scheme,rb_bits_per_s,rb_over_f3db,analytic_ber,"
                      "simulated_ber,ber_ci_low,ber_ci_high,feasible\n";
    for (const Fig4Row& r : rows) {
        csv += format_real(r.peak_power_mw) + "," + r.scheme + ","
             + format_real(r.rb_bits_per_s) + "," + format_real(r.rb_over_f3db) + ","
             + format_real(r.analytic_ber) + "," + format_real(r.simulated_ber) + ","
             + format_real(r.ber_ci_low) + "," + format_real(r.ber_ci_high) + ","
             + std::to_string(r.feasible) + "\n";
    }
    const auto path = std::filesystem::path(dir) / "fig4.csv";
    write_text(path, csv);
    write_text(std::filesystem::path(dir) / "fig4.gp",
               "# throughput vs peak optical power, one curve per scheme\n"
               "set datafile separator ','\n"
               "set xlabel 'peak optical power (mW)'\n"
               "set ylabel 'throughput R_b (bit/s)'\n"
               "set key top left\n"
               "schemes = 'dco_ofdm mpam_jow mpam_mmse mpam_unequalized'\n"
               "plot for [s in schemes] 'fig4.csv' every ::1 \\\n"
               "  using (column(1)):((strcol(2) eq s) ? column(3) : 1/0) \\\n"
               "  with linespoints title s\n");
    return path.string();
}

std::string write_bitload(const std::string& dir, const std::vector<BitloadRow>& rows,
                          const OfdmPlan& plan) {
    std::filesystem::create_directories(dir);
    std::string csv;
    csv += "# n_subcarriers=" + std::to_string(plan.n)
         + " t_ofdm_s=" + format_real(plan.t_ofdm)
         + " beta=" + format_real(plan.beta)
         + " cp_len=" + std::to_string(plan.cp_len)
         + " rb_bits_per_s=" + format_real(throughput(plan)) + "\n";
    csv += "subcarrier,f_hz,snr,qam_m,bits,predicted_ber\n";
    for (const BitloadRow& r : rows) {
        csv += std::to_string(r.subcarrier) + "," + format_real(r.f_hz) + ","
             + format_real(r.snr) + "," + std::to_string(r.qam_m) + ","
             + std::to_string(r.bits) + "," + format_real(r.predicted_ber) + "\n";
    }
    const auto path = std::filesystem::path(dir) / "bitload.csv";
    write_text(path, csv);
    return path.string();
}

std::string write_waveform(const std::string& dir, const DesignResult& dr,
                           int m, double rc, double power_mw) {
    std::filesystem::create_directories(dir);
    std::string csv;
    csv += "# m=" + std::to_string(m) + " rc_sps=" + format_real(rc)
         + " peak_mw=" + format_real(power_mw)
         + " sinr=" + format_real(dr.sinr_value)
         + " mse=" + format_real(dr.mse)
         + " kkt_residual=" + format_real(dr.kkt_residual)
         + " iterations=" + std::to_string(dr.iterations) + "\n";
    csv += "chip,amplitude_ma\n";
    for (int i = 0; i < dr.f.size(); ++i)
        csv += std::to_string(i) + "," + format_real(dr.f(i)) + "\n";
    const auto path = std::filesystem::path(dir) / "waveform.csv";
    write_text(path, csv);
    return path.string();
}

} // namespace ledlink
