#include "ledlink/experiments.hpp"
#include "ledlink/validation.hpp"
#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

namespace {

void print_fig4_summary(const std::vector<ledlink::Fig4Row>& rows) {
    std::printf("%14s %18s %16s %14s %14s\n", "peak_power_mw", "scheme",
                "rb_bits_per_s", "analytic_ber", "simulated_ber");
    for (const auto& r : rows) {
        std::printf("%14.3g %18s %16.6g %14.4g %14.4g\n", r.peak_power_mw,
                    r.scheme.c_str(), r.rb_bits_per_s, r.analytic_ber, r.simulated_ber);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Link-level simulator and optimizer for LED intensity-modulated "
                 "optical links: clipping-aware DCO-OFDM bit loading and jointly "
                 "optimized M-PAM waveforms with MMSE equalization"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir_flag;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--set", overrides,
                   "Override a config field, e.g. --set pam.l_f=8 (repeatable)");
    app.add_option("--out", out_dir_flag,
                   "Output directory (overrides LEDLINK_OUTPUT_DIR and config)");

    CLI::App* fig3 = app.add_subcommand(
        "fig3", "Throughput vs modulation scale at fixed symbol time");
    CLI::App* fig4 = app.add_subcommand(
        "fig4", "Throughput vs peak power for every scheme");
    CLI::App* validate = app.add_subcommand(
        "validate", "Run the release checks and report pass/fail per check");

    CLI::App* bitload = app.add_subcommand(
        "bitload", "Per-subcarrier SNR and constellation assignment");
    double bl_beta_over_n = 0.145, bl_t = 0.0, bl_power = 0.0;
    int bl_n = 0;
    bitload->add_option("--beta-over-n", bl_beta_over_n, "Modulation scale beta/N");
    bitload->add_option("--t", bl_t, "Symbol time in seconds (default: config fig3 point)");
    bitload->add_option("--n", bl_n, "Subcarrier count (default: config)");
    bitload->add_option("--power", bl_power, "Peak power in mW (default: config fig3 point)");

    CLI::App* design = app.add_subcommand(
        "design-waveform", "Optimize the transmit pulse for one (M, chip rate) point");
    int dw_m = 2;
    double dw_rc = 200e6, dw_power = 8.0;
    design->add_option("--m", dw_m, "Constellation size");
    design->add_option("--rc", dw_rc, "Chip rate in samples/s");
    design->add_option("--power", dw_power, "Peak power in mW");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const ledlink::ExperimentConfig cfg =
            ledlink::ExperimentConfig::load(config_path, overrides);
        const std::string out_dir = ledlink::resolve_out_dir(cfg, out_dir_flag);

        if (fig3->parsed()) {
            const auto rows = ledlink::run_fig3_sweep(cfg);
            const std::string path = ledlink::write_fig3(out_dir, rows);
            for (const auto& r : rows)
                if (r.is_max)
                    std::printf("N=%d peak %.6g bit/s at beta/N=%.6g\n",
                                r.n_subcarriers, r.rb_bits_per_s, r.beta_over_n);
            std::printf("wrote %s\n", path.c_str());
        } else if (fig4->parsed()) {
            const auto rows = ledlink::run_fig4_sweep(cfg);
            const std::string path = ledlink::write_fig4(out_dir, rows);
            print_fig4_summary(rows);
            std::printf("wrote %s\n", path.c_str());
        } else if (validate->parsed()) {
            bool all = true;
            for (const auto& c : ledlink::run_acceptance_checks(cfg)) {
                std::printf("[%s] %2d %-36s (%.1f s):%s\n", c.pass ? "PASS" : "FAIL",
                            c.id, c.name.c_str(), c.seconds, c.detail.c_str());
                all = all && c.pass;
            }
            return all ? 0 : 1;
        } else if (bitload->parsed()) {
            const double t = bl_t > 0.0 ? bl_t : cfg.fig3_t_s;
            const int n = bl_n > 0 ? bl_n : cfg.ofdm_n;
            const double power = bl_power > 0.0 ? bl_power : cfg.fig3_power_mw;
            ledlink::OfdmPlan plan;
            const auto rows = ledlink::run_bitload(cfg, bl_beta_over_n * n, t, n, power, &plan);
            const std::string path = ledlink::write_bitload(out_dir, rows, plan);
            std::printf("throughput %.6g bit/s with cp_len=%d\nwrote %s\n",
                        ledlink::throughput(plan), plan.cp_len, path.c_str());
        } else if (design->parsed()) {
            const auto dr = ledlink::run_design(cfg, dw_m, dw_rc, dw_power);
            const std::string path = ledlink::write_waveform(out_dir, dr, dw_m, dw_rc, dw_power);
            std::printf("sinr %.6g, mse %.6g, kkt residual %.3g, %d iterations\nwrote %s\n",
                        dr.sinr_value, dr.mse, dr.kkt_residual, dr.iterations, path.c_str());
        }
        return 0;
    } catch (const ledlink::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
