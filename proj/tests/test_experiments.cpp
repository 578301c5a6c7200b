#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ledlink/experiments.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace ledlink;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const std::string& text) {
    return text.substr(0, text.find('\n'));
}

fs::path fresh_dir(const char* tag) {
    fs::path p = fs::temp_directory_path() / (std::string("ledlink_test_") + tag);
    fs::remove_all(p);
    return p;
}

// Small search spaces keep the sweep tests fast while exercising every code path.
ExperimentConfig small_config() {
    ExperimentConfig cfg = ExperimentConfig::load("");
    cfg.powers_mw = {8.0};
    cfg.ofdm_n_list = {64};
    cfg.t_grid_s = {0.16e-6, 0.32e-6};
    cfg.beta_points = 7;
    cfg.m_grid = {2, 4};
    cfg.rc_grid_sps = {5e7, 1e8, 2e8, 3e8};
    cfg.simulate_sweeps = false;
    cfg.threads = 1;
    return cfg;
}

} // namespace

TEST_CASE("defaults load and round-trip through json") {
    ExperimentConfig cfg = ExperimentConfig::load("");
    CHECK(cfg.f3db_hz == doctest::Approx(2.0e7));
    CHECK(cfg.ofdm_n == 64);
    CHECK(cfg.l_f == 4);
    CHECK(cfg.ber_target == doctest::Approx(1e-3));
    CHECK(cfg.mode_equalized == SigmaMode::as_written);
    CHECK(cfg.mode_unequalized == SigmaMode::corrected);

    // Serialize, reload, compare a few fields.
    fs::path dir = fresh_dir("roundtrip");
    fs::create_directories(dir);
    std::ofstream(dir / "cfg.json") << cfg.to_json_text();
    ExperimentConfig back = ExperimentConfig::load((dir / "cfg.json").string());
    CHECK(back.f3db_hz == cfg.f3db_hz);
    CHECK(back.t_grid_s == cfg.t_grid_s);
    CHECK(back.rc_grid_sps == cfg.rc_grid_sps);
    CHECK(back.design.max_iters == cfg.design.max_iters);
    fs::remove_all(dir);
}

TEST_CASE("dotted overrides patch individual fields") {
    ExperimentConfig cfg = ExperimentConfig::load(
        "", {"channel.f3db_hz=3.0e7", "pam.l_f=8", "ofdm.beta_points=5",
             "output.dir=elsewhere", "pam.sigma_mode_equalized=corrected"});
    CHECK(cfg.f3db_hz == doctest::Approx(3.0e7));
    CHECK(cfg.l_f == 8);
    CHECK(cfg.beta_points == 5);
    CHECK(cfg.out_dir == "elsewhere");
    CHECK(cfg.mode_equalized == SigmaMode::corrected);
}

TEST_CASE("invalid configuration is rejected with a config error") {
    CHECK_THROWS_AS(ExperimentConfig::load("", {"channel.f3db_hz=-1"}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::load("", {"ber.target=2.0"}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::load("", {"pam.l_f=0"}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::load("", {"nonsense"}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::load("", {"pam.sigma_mode_equalized=banana"}),
                    ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/path.json"), ConfigError);

    fs::path dir = fresh_dir("badjson");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK_THROWS_AS(ExperimentConfig::load((dir / "bad.json").string()), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("beta grid is geometric between the configured endpoints") {
    ExperimentConfig cfg = ExperimentConfig::load("");
    cfg.beta_points = 5;
    auto g = cfg.beta_grid(64);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == doctest::Approx(0.03 * 64).epsilon(1e-12));
    CHECK(g.back() == doctest::Approx(64.0).epsilon(1e-12));
    for (size_t i = 0; i + 2 < g.size(); ++i)
        CHECK(g[i + 1] / g[i] == doctest::Approx(g[i + 2] / g[i + 1]).epsilon(1e-10));
    cfg.beta_points = 1;
    auto one = cfg.beta_grid(64);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == doctest::Approx(0.03 * 64));
}

TEST_CASE("formatting is fixed-width scientific with nan tokens") {
    CHECK(format_real(1.0) == "1.00000000e+00");
    CHECK(format_real(-0.5) == "-5.00000000e-01");
    CHECK(format_real(std::nan("")) == "nan");
    CHECK(format_real(3.2e-7) == "3.20000000e-07");
}

TEST_CASE("output directory precedence: flag, environment, config") {
    ExperimentConfig cfg = ExperimentConfig::load("");
    unsetenv("LEDLINK_OUTPUT_DIR");
    CHECK(resolve_out_dir(cfg, "") == cfg.out_dir);
    setenv("LEDLINK_OUTPUT_DIR", "from_env", 1);
    CHECK(resolve_out_dir(cfg, "") == "from_env");
    CHECK(resolve_out_dir(cfg, "from_flag") == "from_flag");
    unsetenv("LEDLINK_OUTPUT_DIR");
}

TEST_CASE("bitload rows cover every data subcarrier") {
    ExperimentConfig cfg = small_config();
    OfdmPlan plan;
    auto rows = run_bitload(cfg, 9.28, 3.2e-7, 64, 10.0, &plan);
    REQUIRE(rows.size() == 31);
    for (int i = 0; i < 31; ++i) {
        CHECK(rows[i].subcarrier == i + 1);
        CHECK(rows[i].f_hz == doctest::Approx((i + 1) / 3.2e-7).epsilon(1e-12));
        CHECK(rows[i].snr > 0.0);
        if (rows[i].qam_m > 0) {
            CHECK(rows[i].bits == int(std::lround(std::log2(double(rows[i].qam_m)))));
            CHECK(rows[i].predicted_ber < cfg.ber_target);
        } else {
            CHECK(rows[i].bits == 0);
        }
        CHECK(rows[i].bits == plan.bits[i]);
    }
    // Lowpass channel: SNR falls with frequency.
    for (int i = 0; i + 1 < 31; ++i) CHECK(rows[i].snr > rows[i + 1].snr);
}

TEST_CASE("scale sweep peaks strictly inside the search interval") {
    ExperimentConfig cfg = small_config();
    cfg.beta_points = 15;
    auto rows = run_fig3_sweep(cfg);
    REQUIRE(rows.size() == 15);
    int max_at = -1;
    for (int i = 0; i < 15; ++i)
        if (rows[i].is_max) { CHECK(max_at == -1); max_at = i; }
    REQUIRE(max_at >= 0);
    for (const auto& r : rows) {
        CHECK(r.n_subcarriers == 64);
        CHECK(r.beta_over_n == doctest::Approx(r.beta / 64.0).epsilon(1e-12));
        CHECK(r.rb_bits_per_s <= rows[max_at].rb_bits_per_s);
    }
}

TEST_CASE("fig3 csv writer emits the documented schema deterministically") {
    ExperimentConfig cfg = small_config();
    auto rows = run_fig3_sweep(cfg);
    fs::path d1 = fresh_dir("fig3a"), d2 = fresh_dir("fig3b");
    std::string p1 = write_fig3(d1.string(), rows);
    std::string p2 = write_fig3(d2.string(), rows);
    std::string t1 = slurp(p1), t2 = slurp(p2);
    CHECK(first_line(t1) == "beta_over_n,beta,n_subcarriers,rb_bits_per_s,is_max");
    CHECK(t1 == t2);
    CHECK(fs::exists(d1 / "fig3.gp"));
    // one header + one line per row
    CHECK(std::count(t1.begin(), t1.end(), '\n') == int(rows.size()) + 1);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("throughput comparison emits one row per scheme and power") {
    ExperimentConfig cfg = small_config();
    auto rows = run_fig4_sweep(cfg);
    REQUIRE(rows.size() == 4);
    std::set<std::string> schemes;
    for (const auto& r : rows) {
        schemes.insert(r.scheme);
        CHECK(r.peak_power_mw == doctest::Approx(8.0));
        CHECK(r.feasible == 1);
        CHECK(r.rb_bits_per_s > 0.0);
        CHECK(r.rb_over_f3db == doctest::Approx(r.rb_bits_per_s / cfg.f3db_hz).epsilon(1e-12));
        CHECK(std::isnan(r.simulated_ber));   // sweep simulation disabled here
        if (r.scheme != "dco_ofdm") CHECK(r.analytic_ber < cfg.ber_target);
    }
    CHECK(schemes == std::set<std::string>{"dco_ofdm", "mpam_jow", "mpam_mmse",
                                           "mpam_unequalized"});
    // The designed waveform can only improve on the rectangular pulse.
    double jow = 0.0, mmse = 0.0, uneq = 0.0;
    for (const auto& r : rows) {
        if (r.scheme == "mpam_jow") jow = r.rb_bits_per_s;
        if (r.scheme == "mpam_mmse") mmse = r.rb_bits_per_s;
        if (r.scheme == "mpam_unequalized") uneq = r.rb_bits_per_s;
    }
    CHECK(jow >= mmse - 1e-9);
    CHECK(mmse >= uneq - 1e-9);
}

TEST_CASE("fig4 csv schema and determinism") {
    ExperimentConfig cfg = small_config();
    auto rows = run_fig4_sweep(cfg);
    fs::path d1 = fresh_dir("fig4a"), d2 = fresh_dir("fig4b");
    std::string t1 = slurp(write_fig4(d1.string(), rows));
    std::string t2 = slurp(write_fig4(d2.string(), rows));
    CHECK(first_line(t1) == "peak_power_mw,scheme,rb_bits_per_s,rb_over_f3db,"
                            "analytic_ber,simulated_ber,ber_ci_low,ber_ci_high,feasible");
    CHECK(t1 == t2);
    CHECK(t1.find("mpam_jow") != std::string::npos);
    CHECK(t1.find("nan") != std::string::npos);
    CHECK(fs::exists(d1 / "fig4.gp"));
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("bitload and waveform writers carry their metadata") {
    ExperimentConfig cfg = small_config();
    OfdmPlan plan;
    auto rows = run_bitload(cfg, 9.28, 3.2e-7, 64, 10.0, &plan);
    fs::path d = fresh_dir("artifacts");
    std::string bp = write_bitload(d.string(), rows, plan);
    std::string bt = slurp(bp);
    CHECK(bt.rfind("# ", 0) == 0);   // metadata comment first
    CHECK(bt.find("subcarrier,f_hz,snr,qam_m,bits,predicted_ber") != std::string::npos);

    DesignResult dr = run_design(cfg, 2, 2.0e8, 8.0);
    CHECK(dr.f.size() == cfg.l_f);
    std::string wp = write_waveform(d.string(), dr, 2, 2.0e8, 8.0);
    std::string wt = slurp(wp);
    CHECK(wt.rfind("# ", 0) == 0);
    CHECK(wt.find("chip,amplitude_ma") != std::string::npos);
    CHECK(std::count(wt.begin(), wt.end(), '\n') >= cfg.l_f + 2);
    fs::remove_all(d);
}

TEST_CASE("single-thread and multi-thread sweeps agree") {
    ExperimentConfig one = small_config();
    ExperimentConfig four = small_config();
    four.threads = 4;
    auto r1 = run_fig3_sweep(one);
    auto r4 = run_fig3_sweep(four);
    REQUIRE(r1.size() == r4.size());
    for (size_t i = 0; i < r1.size(); ++i) {
        CHECK(r1[i].rb_bits_per_s == r4[i].rb_bits_per_s);
        CHECK(r1[i].is_max == r4[i].is_max);
    }
}
