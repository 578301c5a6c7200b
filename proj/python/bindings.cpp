// Python bindings for the link simulator: channel model, DCO-OFDM analytics,
// M-PAM waveform design, Monte Carlo simulators, and the experiment drivers.
#include <pybind11/pybind11.h>
#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/stl.h>

#include "ledlink/channel.hpp"
#include "ledlink/config.hpp"
#include "ledlink/dco_ofdm.hpp"
#include "ledlink/experiments.hpp"
#include "ledlink/montecarlo.hpp"
#include "ledlink/mpam_jow.hpp"
#include "ledlink/qam.hpp"
#include "ledlink/validation.hpp"

namespace py = pybind11;
using namespace ledlink;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Link-level simulator and optimizer for LED intensity-modulated links";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    // ---- channel ----
    py::class_<LedChannel>(m, "LedChannel")
        .def(py::init<>())
        .def(py::init([](double f3db, double i_max) { return LedChannel{f3db, i_max}; }),
             py::arg("f3db"), py::arg("i_max"))
        .def_readwrite("f3db", &LedChannel::f3db)
        .def_readwrite("i_max", &LedChannel::i_max);

    py::class_<NoiseModel>(m, "NoiseModel")
        .def(py::init<>())
        .def(py::init([](double n0) { return NoiseModel{n0}; }), py::arg("n0"))
        .def_readwrite("n0", &NoiseModel::n0)
        .def("ofdm_var", &NoiseModel::ofdm_var, py::arg("t_ofdm"))
        .def("pam_var", &NoiseModel::pam_var, py::arg("rc"));

    m.def("frequency_response", &frequency_response, py::arg("channel"), py::arg("f"));
    m.def("discrete_impulse_response", &discrete_impulse_response,
          py::arg("channel"), py::arg("rate"), py::arg("forced_len") = 0);
    m.def("impulse_length", &impulse_length, py::arg("channel"), py::arg("rate"));
    m.def("clip", &clip, py::arg("x"), py::arg("i_max"));

    // ---- QAM ----
    m.def("qam_ber", &qam_ber, py::arg("m"), py::arg("gamma"));
    m.def("max_qam_size", &max_qam_size, py::arg("gamma"), py::arg("b_max"),
          py::arg("sizes"));

    // ---- DCO-OFDM ----
    py::class_<OfdmPlan>(m, "OfdmPlan")
        .def(py::init<>())
        .def_readwrite("n", &OfdmPlan::n)
        .def_readwrite("t_ofdm", &OfdmPlan::t_ofdm)
        .def_readwrite("beta", &OfdmPlan::beta)
        .def_readwrite("dc_bias", &OfdmPlan::dc_bias)
        .def_readwrite("bits", &OfdmPlan::bits)
        .def_readwrite("cp_len", &OfdmPlan::cp_len)
        .def("n_data", &OfdmPlan::n_data)
        .def("sample_rate", &OfdmPlan::sample_rate);

    py::class_<ClippingStats>(m, "ClippingStats")
        .def_readonly("alpha", &ClippingStats::alpha)
        .def_readonly("clip_var", &ClippingStats::clip_var)
        .def_readonly("sigma_s2", &ClippingStats::sigma_s2);

    m.def("ofdm_sigma_s", &ofdm_sigma_s, py::arg("beta"), py::arg("n"));
    m.def("bussgang_alpha", &bussgang_alpha, py::arg("i_max"), py::arg("sigma_s"));
    m.def("clipping_noise_variance", &clipping_noise_variance,
          py::arg("i_max"), py::arg("sigma_s"));
    m.def("clipping_noise_variance_mc", &clipping_noise_variance_mc,
          py::arg("i_max"), py::arg("sigma_s"), py::arg("n"), py::arg("seed"),
          py::call_guard<py::gil_scoped_release>());
    m.def("clipping_stats", &clipping_stats, py::arg("i_max"), py::arg("sigma_s"));
    m.def("subcarrier_snr", &subcarrier_snr, py::arg("plan"), py::arg("channel"),
          py::arg("noise"), py::arg("stats"), py::arg("i"), py::arg("ex2") = 1.0);
    m.def("bit_load", &bit_load, py::arg("channel"), py::arg("noise"),
          py::arg("beta"), py::arg("t_ofdm"), py::arg("n"), py::arg("b_max"),
          py::arg("qam_sizes"), py::arg("cp"), py::arg("ex2") = 1.0);
    m.def("throughput", &throughput, py::arg("plan"));

    py::class_<OfdmOptimum>(m, "OfdmOptimum")
        .def_readonly("plan", &OfdmOptimum::plan)
        .def_readonly("rate", &OfdmOptimum::rate);
    m.def("optimize_ofdm", &optimize_ofdm, py::arg("channel"), py::arg("noise"),
          py::arg("b_max"), py::arg("betas"), py::arg("ts"), py::arg("n"),
          py::arg("qam_sizes"), py::arg("cp"), py::arg("ex2") = 1.0,
          py::call_guard<py::gil_scoped_release>());
    m.def("modulate", &modulate, py::arg("plan"), py::arg("qam_symbols"));

    // ---- M-PAM ----
    py::enum_<SigmaMode>(m, "SigmaMode")
        .value("as_written", SigmaMode::as_written)
        .value("corrected", SigmaMode::corrected);
    py::enum_<SinrRule>(m, "SinrRule")
        .value("as_written", SinrRule::as_written)
        .value("corrected", SinrRule::corrected)
        .value("calibrated", SinrRule::calibrated);
    py::enum_<PamScheme>(m, "PamScheme")
        .value("jow", PamScheme::jow)
        .value("mmse_rect", PamScheme::mmse_rect)
        .value("unequalized", PamScheme::unequalized);

    m.def("pam_es2", &pam_es2, py::arg("m"));
    m.def("pam_var", &pam_var, py::arg("m"));
    m.def("pam_sinr", &pam_sinr, py::arg("m"), py::arg("mse"), py::arg("rule"));
    m.def("pam_ber", &pam_ber, py::arg("m"), py::arg("gamma"));
    m.def("paired_sinr_rule", &paired_sinr_rule, py::arg("mode"));

    py::class_<PamConfig>(m, "PamConfig")
        .def(py::init<>())
        .def_readwrite("m", &PamConfig::m)
        .def_readwrite("rc", &PamConfig::rc)
        .def_readwrite("l_f", &PamConfig::l_f)
        .def_readwrite("l_w", &PamConfig::l_w);

    py::class_<PamMachinery>(m, "PamMachinery")
        .def(py::init<std::vector<double>, int, int>(),
             py::arg("taps"), py::arg("l_f"), py::arg("l_w"))
        .def_readonly("h", &PamMachinery::h)
        .def_readonly("lf", &PamMachinery::lf)
        .def_readonly("lw", &PamMachinery::lw)
        .def_readonly("lh", &PamMachinery::lh)
        .def_readonly("lv", &PamMachinery::lv)
        .def_readonly("center_row", &PamMachinery::center_row)
        .def_readonly("sym", &PamMachinery::sym)
        .def_readonly("phase", &PamMachinery::phase)
        .def_readonly("deltas", &PamMachinery::deltas)
        .def_readonly("i0", &PamMachinery::i0)
        .def_readonly("H", &PamMachinery::H)
        .def("tap_time", &PamMachinery::tap_time, py::arg("msym"), py::arg("r"))
        .def("pulses", [](const PamMachinery& mach, const Eigen::VectorXd& f) {
            Eigen::VectorXd e;
            Eigen::MatrixXd P;
            mach.pulses(f, e, P);
            return py::make_tuple(e, P);
        }, py::arg("f"));

    m.def("build_toeplitz", &build_toeplitz, py::arg("taps"), py::arg("l_w"));
    py::class_<ToeplitzBuild>(m, "ToeplitzBuild")
        .def_readonly("h_matrix", &ToeplitzBuild::h_matrix)
        .def_readonly("n_u", &ToeplitzBuild::n_u)
        .def_readonly("n_l", &ToeplitzBuild::n_l);

    m.def("sigma_matrix", &sigma_matrix, py::arg("machinery"), py::arg("f"),
          py::arg("m"), py::arg("mode"));

    py::class_<MmseEqualizer>(m, "MmseEqualizer")
        .def(py::init<>())
        .def_readwrite("w", &MmseEqualizer::w)
        .def_readwrite("b", &MmseEqualizer::b)
        .def_readonly("ridged", &MmseEqualizer::ridged)
        .def_readonly("solve_residual", &MmseEqualizer::solve_residual);

    m.def("mmse_filter", &mmse_filter, py::arg("machinery"), py::arg("f"),
          py::arg("m"), py::arg("noise_var"), py::arg("mode"));
    m.def("unequalized_receiver", &unequalized_receiver,
          py::arg("machinery"), py::arg("f"));
    m.def("isi_noise_power", &isi_noise_power, py::arg("machinery"), py::arg("f"),
          py::arg("m"), py::arg("noise_var"), py::arg("mode"), py::arg("w"),
          py::arg("b"));

    py::class_<DesignOptions>(m, "DesignOptions")
        .def(py::init<>())
        .def_readwrite("max_iters", &DesignOptions::max_iters)
        .def_readwrite("rel_tol", &DesignOptions::rel_tol)
        .def_readwrite("kkt_tol", &DesignOptions::kkt_tol)
        .def_readwrite("grad_step_rel", &DesignOptions::grad_step_rel)
        .def_readwrite("seed_levels", &DesignOptions::seed_levels)
        .def_readwrite("random_seed", &DesignOptions::random_seed)
        .def_readwrite("polish_iters", &DesignOptions::polish_iters);

    py::class_<DesignResult>(m, "DesignResult")
        .def_readonly("f", &DesignResult::f)
        .def_readonly("sinr_value", &DesignResult::sinr_value)
        .def_readonly("mse", &DesignResult::mse)
        .def_readonly("kkt_residual", &DesignResult::kkt_residual)
        .def_readonly("iterations", &DesignResult::iterations)
        .def_readonly("eq", &DesignResult::eq);

    m.def("design_waveform", &design_waveform, py::arg("machinery"), py::arg("m"),
          py::arg("noise_var"), py::arg("i_max"), py::arg("mode"),
          py::arg("options") = DesignOptions{},
          py::call_guard<py::gil_scoped_release>());

    py::class_<RateOptimum>(m, "RateOptimum")
        .def_readonly("feasible", &RateOptimum::feasible)
        .def_readonly("rate", &RateOptimum::rate)
        .def_readonly("m", &RateOptimum::m)
        .def_readonly("rc", &RateOptimum::rc)
        .def_readonly("f", &RateOptimum::f)
        .def_readonly("eq", &RateOptimum::eq)
        .def_readonly("mse", &RateOptimum::mse)
        .def_readonly("sinr_value", &RateOptimum::sinr_value)
        .def_readonly("analytic_ber", &RateOptimum::analytic_ber)
        .def_readonly("diagnostic", &RateOptimum::diagnostic);

    m.def("maximize_rate", &maximize_rate, py::arg("channel"), py::arg("noise"),
          py::arg("b_max"), py::arg("m_grid"), py::arg("rc_grid"), py::arg("l_f"),
          py::arg("scheme"), py::arg("mode"), py::arg("rule"),
          py::arg("options") = DesignOptions{},
          py::call_guard<py::gil_scoped_release>());

    m.def("synthesize", &synthesize, py::arg("f"), py::arg("symbols"));

    // ---- Monte Carlo ----
    py::class_<SimRun>(m, "SimRun")
        .def(py::init<>())
        .def_readwrite("seed", &SimRun::seed)
        .def_readwrite("n_symbols", &SimRun::n_symbols)
        .def_readwrite("min_errors", &SimRun::min_errors)
        .def_readwrite("predicted_ber", &SimRun::predicted_ber)
        .def_readwrite("confidence", &SimRun::confidence)
        .def_static("symbols_for", &SimRun::symbols_for,
                    py::arg("ber"), py::arg("confidence"));

    py::class_<BerEstimate>(m, "BerEstimate")
        .def_readonly("bit_errors", &BerEstimate::bit_errors)
        .def_readonly("bits", &BerEstimate::bits)
        .def("ber", &BerEstimate::ber)
        .def("ci_low", &BerEstimate::ci_low)
        .def("ci_high", &BerEstimate::ci_high);

    py::class_<OfdmSimResult>(m, "OfdmSimResult")
        .def_readonly("total", &OfdmSimResult::total)
        .def_readonly("per_subcarrier", &OfdmSimResult::per_subcarrier)
        .def_readonly("snr_hat", &OfdmSimResult::snr_hat)
        .def_readonly("alpha_hat", &OfdmSimResult::alpha_hat)
        .def_readonly("clip_var_hat", &OfdmSimResult::clip_var_hat)
        .def_readonly("frames", &OfdmSimResult::frames);

    m.def("simulate_ofdm", &simulate_ofdm, py::arg("plan"), py::arg("channel"),
          py::arg("noise"), py::arg("run"),
          py::call_guard<py::gil_scoped_release>());
    m.def("bussgang_alpha_mc", &bussgang_alpha_mc, py::arg("i_max"),
          py::arg("sigma_s"), py::arg("n"), py::arg("seed"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<PamSimResult>(m, "PamSimResult")
        .def_readonly("total", &PamSimResult::total)
        .def_readonly("mse_hat", &PamSimResult::mse_hat)
        .def_readonly("symbols", &PamSimResult::symbols);

    m.def("simulate_pam", &simulate_pam, py::arg("machinery"), py::arg("f"),
          py::arg("eq"), py::arg("m"), py::arg("noise_var"), py::arg("run"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<BaselineResult>(m, "BaselineResult")
        .def_readonly("sim", &BaselineResult::sim)
        .def_readonly("analytic_ber", &BaselineResult::analytic_ber)
        .def_readonly("mse", &BaselineResult::mse);

    m.def("unequalized_pam_baseline", &unequalized_pam_baseline, py::arg("config"),
          py::arg("channel"), py::arg("noise"), py::arg("run"),
          py::call_guard<py::gil_scoped_release>());

    // ---- experiments ----
    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_static("load", &ExperimentConfig::load, py::arg("json_path"),
                    py::arg("overrides") = std::vector<std::string>{})
        .def("to_json_text", &ExperimentConfig::to_json_text)
        .def("channel_at", &ExperimentConfig::channel_at, py::arg("peak_mw"))
        .def("noise", &ExperimentConfig::noise)
        .def("beta_grid", &ExperimentConfig::beta_grid, py::arg("n"))
        .def_readwrite("f3db_hz", &ExperimentConfig::f3db_hz)
        .def_readwrite("n0_mw_per_hz", &ExperimentConfig::n0_mw_per_hz)
        .def_readwrite("ber_target", &ExperimentConfig::ber_target)
        .def_readwrite("powers_mw", &ExperimentConfig::powers_mw)
        .def_readwrite("ofdm_n", &ExperimentConfig::ofdm_n)
        .def_readwrite("ofdm_n_list", &ExperimentConfig::ofdm_n_list)
        .def_readwrite("t_grid_s", &ExperimentConfig::t_grid_s)
        .def_readwrite("beta_over_n_min", &ExperimentConfig::beta_over_n_min)
        .def_readwrite("beta_over_n_max", &ExperimentConfig::beta_over_n_max)
        .def_readwrite("beta_points", &ExperimentConfig::beta_points)
        .def_readwrite("qam_sizes", &ExperimentConfig::qam_sizes)
        .def_readwrite("cyclic_prefix", &ExperimentConfig::cyclic_prefix)
        .def_readwrite("qam_second_moment", &ExperimentConfig::qam_second_moment)
        .def_readwrite("fig3_t_s", &ExperimentConfig::fig3_t_s)
        .def_readwrite("fig3_power_mw", &ExperimentConfig::fig3_power_mw)
        .def_readwrite("l_f", &ExperimentConfig::l_f)
        .def_readwrite("m_grid", &ExperimentConfig::m_grid)
        .def_readwrite("rc_grid_sps", &ExperimentConfig::rc_grid_sps)
        .def_readwrite("mode_equalized", &ExperimentConfig::mode_equalized)
        .def_readwrite("mode_unequalized", &ExperimentConfig::mode_unequalized)
        .def_readwrite("design", &ExperimentConfig::design)
        .def_readwrite("mc_seed", &ExperimentConfig::mc_seed)
        .def_readwrite("mc_min_errors", &ExperimentConfig::mc_min_errors)
        .def_readwrite("mc_max_symbols", &ExperimentConfig::mc_max_symbols)
        .def_readwrite("simulate_sweeps", &ExperimentConfig::simulate_sweeps)
        .def_readwrite("out_dir", &ExperimentConfig::out_dir)
        .def_readwrite("threads", &ExperimentConfig::threads);

    py::class_<Fig3Row>(m, "Fig3Row")
        .def_readonly("beta_over_n", &Fig3Row::beta_over_n)
        .def_readonly("beta", &Fig3Row::beta)
        .def_readonly("n_subcarriers", &Fig3Row::n_subcarriers)
        .def_readonly("rb_bits_per_s", &Fig3Row::rb_bits_per_s)
        .def_readonly("is_max", &Fig3Row::is_max);

    py::class_<Fig4Row>(m, "Fig4Row")
        .def_readonly("peak_power_mw", &Fig4Row::peak_power_mw)
        .def_readonly("scheme", &Fig4Row::scheme)
        .def_readonly("rb_bits_per_s", &Fig4Row::rb_bits_per_s)
        .def_readonly("rb_over_f3db", &Fig4Row::rb_over_f3db)
        .def_readonly("analytic_ber", &Fig4Row::analytic_ber)
        .def_readonly("simulated_ber", &Fig4Row::simulated_ber)
        .def_readonly("ber_ci_low", &Fig4Row::ber_ci_low)
        .def_readonly("ber_ci_high", &Fig4Row::ber_ci_high)
        .def_readonly("feasible", &Fig4Row::feasible);

    py::class_<BitloadRow>(m, "BitloadRow")
        .def_readonly("subcarrier", &BitloadRow::subcarrier)
        .def_readonly("f_hz", &BitloadRow::f_hz)
        .def_readonly("snr", &BitloadRow::snr)
        .def_readonly("qam_m", &BitloadRow::qam_m)
        .def_readonly("bits", &BitloadRow::bits)
        .def_readonly("predicted_ber", &BitloadRow::predicted_ber);

    m.def("run_fig3_sweep", &run_fig3_sweep, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("run_fig4_sweep", &run_fig4_sweep, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("run_bitload", [](const ExperimentConfig& cfg, double beta, double t_s,
                            int n, double power_mw) {
        OfdmPlan plan;
        auto rows = run_bitload(cfg, beta, t_s, n, power_mw, &plan);
        return py::make_tuple(rows, plan);
    }, py::arg("config"), py::arg("beta"), py::arg("t_s"), py::arg("n"),
       py::arg("power_mw"));
    m.def("run_design", &run_design, py::arg("config"), py::arg("m"),
          py::arg("rc"), py::arg("power_mw"),
          py::call_guard<py::gil_scoped_release>());

    m.def("resolve_out_dir", &resolve_out_dir, py::arg("config"), py::arg("cli_out"));
    m.def("write_fig3", &write_fig3, py::arg("dir"), py::arg("rows"));
    m.def("write_fig4", &write_fig4, py::arg("dir"), py::arg("rows"));
    m.def("write_bitload", &write_bitload, py::arg("dir"), py::arg("rows"),
          py::arg("plan"));
    m.def("write_waveform", &write_waveform, py::arg("dir"), py::arg("design"),
          py::arg("m"), py::arg("rc"), py::arg("power_mw"));
    m.def("format_real", &format_real, py::arg("value"));

    // ---- release checks ----
    py::class_<CheckResult>(m, "CheckResult")
        .def_readonly("id", &CheckResult::id)
        .def_readonly("name", &CheckResult::name)
        .def_readonly("pass_", &CheckResult::pass)
        .def_readonly("detail", &CheckResult::detail)
        .def_readonly("seconds", &CheckResult::seconds)
        .def_readonly("budget_seconds", &CheckResult::budget_seconds);
    m.def("run_acceptance_checks", &run_acceptance_checks, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
}
