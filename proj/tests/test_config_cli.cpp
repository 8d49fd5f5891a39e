#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qrad/commands.hpp"
#include "qrad/qi_detection.hpp"
#include "qrad/run_config.hpp"

using namespace qrad;
using namespace qrad::cli;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir()
    {
        path = fs::temp_directory_path() / ("qrad_cli_test_" + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }

    fs::path write(const std::string& name, const std::string& text) const
    {
        const auto p = path / name;
        std::ofstream(p, std::ios::binary) << text;
        return p;
    }
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "qrad");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

struct Csv {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t col(const std::string& name) const
    {
        for (std::size_t k = 0; k < header.size(); ++k)
            if (header[k] == name)
                return k;
        FAIL("missing column " << name);
        return 0;
    }
    std::vector<double> numbers(const std::string& name) const
    {
        std::vector<double> v;
        const auto c = col(name);
        for (const auto& r : rows)
            v.push_back(std::stod(r[c]));
        return v;
    }
    std::string get(const std::string& key) const
    {
        for (const auto& [k, v] : meta)
            if (k == key)
                return v;
        return {};
    }
};

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    return out;
}

Csv parse_csv(const std::string& text)
{
    Csv csv;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.rfind("# ", 0) == 0) {
            const auto colon = line.find(": ");
            csv.meta.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
        } else if (csv.header.empty()) {
            csv.header = split(line);
        } else {
            csv.rows.push_back(split(line));
        }
    }
    return csv;
}

}  // namespace

TEST_CASE("config defaults")
{
    const RunConfig c = parse_config("");
    CHECK(c.scenario.eta == 0.5);
    CHECK(c.device.cell.n_cells == 990);
    CHECK_FALSE(c.device.kappa.has_value());
    CHECK(c.calibration.target_gain_db == 25.0);
    CHECK(c.bias.pump_powers_dbm == std::vector<double>{-90.0, -85.0, -80.0});
    CHECK(c.link.bandwidth == 10e9);
    CHECK_FALSE(c.montecarlo.seed.has_value());
    CHECK_FALSE(c.sweep.has_value());
}

TEST_CASE("config diagnostics")
{
    SUBCASE("out-of-range prior")
    {
        try {
            parse_config("scenario:\n  eta: 0.5\n  lambda: 1.5\n");
            FAIL("expected a config error");
        } catch (const ConfigError& e) {
            CHECK(e.field() == "scenario.lambda");
            CHECK(e.line() == 3);
            CHECK(std::string(e.what()).find("scenario.lambda") != std::string::npos);
        }
    }
    SUBCASE("unknown key")
    {
        try {
            parse_config("device:\n  c_g_F: 13e-15\n  l_g: 45e-12\n");
            FAIL("expected a config error");
        } catch (const ConfigError& e) {
            CHECK(e.field() == "device.l_g");
            CHECK(e.line() == 3);
        }
    }
    SUBCASE("bad value type")
    {
        CHECK_THROWS_AS(parse_config("scenario:\n  n_b: lots\n"), ConfigError);
    }
    SUBCASE("syntax error")
    {
        CHECK_THROWS_AS(parse_config("scenario: [1, 2\n"), ConfigError);
    }
    SUBCASE("hysteretic cells labelled otherwise")
    {
        CHECK_THROWS_AS(parse_config("device:\n  i_c_A: 15e-6\n"), ConfigError);
        CHECK_NOTHROW(parse_config("device:\n  i_c_A: 15e-6\n  non_hysteretic: false\n"));
    }
    SUBCASE("floor and depth are exclusive")
    {
        CHECK_THROWS_AS(parse_config("bias:\n  floor_dBm: -120\n  target_depth_dB: 10\n"), ConfigError);
        const auto c = parse_config("bias:\n  floor_dBm: -120\n");
        CHECK(c.bias.floor_dbm == -120.0);
        CHECK_FALSE(c.bias.target_depth_db.has_value());
    }
    SUBCASE("monte-carlo trial floor")
    {
        CHECK_THROWS_AS(parse_config("montecarlo:\n  trials: 10\n"), ConfigError);
    }
    SUBCASE("log grid needs positive bounds")
    {
        CHECK_THROWS_AS(parse_config("sweep:\n  variable: n_b\n  start: 0\n  stop: 10\n  scale: log\n"), ConfigError);
    }
}

TEST_CASE("config hash")
{
    const auto a = parse_config("scenario:\n  eta: 0.5\n  n_b: 20\nlink:\n  bandwidth_Hz: 1e10\n");
    const auto b = parse_config("link: {bandwidth_Hz: 10000000000}\nscenario: {n_b: 20.0, eta: 0.50}\n");
    const auto c = parse_config("scenario:\n  eta: 0.5\n  n_b: 21\n");
    const auto d = parse_config("scenario:\n  eta: 0.5\n  n_b: 20\nmontecarlo:\n  seed: 99\n");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a) != config_hash(c));
    CHECK(config_hash(a) == config_hash(d));
    CHECK(config_hash(a).size() == 16);
    CHECK(canonical_form(a) == canonical_form(b));
}

TEST_CASE("grid values")
{
    GridSpec lin{"x", -2.5e-3, 2.5e-3, 101, GridScale::linear};
    const auto v = lin.values();
    REQUIRE(v.size() == 101);
    CHECK(v.front() == -2.5e-3);
    CHECK(v.back() == 2.5e-3);
    CHECK(v[50] == 0.0);
    for (std::size_t k = 0; k < v.size(); ++k)
        CHECK(v[k] == -v[100 - k]);

    GridSpec lg{"x", 1.0, 1e6, 7, GridScale::log};
    const auto w = lg.values();
    for (std::size_t k = 0; k < w.size(); ++k)
        CHECK(w[k] == doctest::Approx(std::pow(10.0, static_cast<double>(k))).epsilon(1e-14));

    GridSpec one{"x", 3.0, 9.0, 1, GridScale::linear};
    CHECK(one.values() == std::vector<double>{3.0});
}

TEST_CASE("qi-error command")
{
    TempDir tmp;
    SUBCASE("background sweep approaches 6 dB")
    {
        const auto cfg = tmp.write("qi.yaml", "scenario: {eta: 0.01, n_s: 0.01, n_b: 20, modes: 1000}\n"
                                              "sweep: {variable: n_b, start: 1, stop: 1.0e6, points: 13, scale: log}\n");
        const auto r = run({"qi-error", "--config", cfg.string()});
        REQUIRE(r.code == 0);
        const auto csv = parse_csv(r.out);
        CHECK(csv.header == std::vector<std::string>{"n_b", "p_cl", "p_tmsv", "exponent_cl", "exponent_tmsv",
                                                     "advantage_dB"});
        const auto adv = csv.numbers("advantage_dB");
        REQUIRE(adv.size() == 13);
        for (std::size_t k = 1; k < adv.size(); ++k)
            CHECK(adv[k] < adv[k - 1]);
        CHECK(adv.back() >= 6.02);
        CHECK(adv.back() <= 6.03);
        const auto cl = csv.numbers("p_cl");
        const auto q = csv.numbers("p_tmsv");
        for (std::size_t k = 0; k < cl.size(); ++k)
            CHECK(q[k] <= cl[k]);
    }
    SUBCASE("single point")
    {
        const auto cfg = tmp.write("one.yaml", "scenario: {eta: 0.5, n_s: 0.1, n_b: 20, modes: 10000}\n");
        const auto r = run({"qi-error", "--config", cfg.string()});
        REQUIRE(r.code == 0);
        const auto csv = parse_csv(r.out);
        REQUIRE(csv.rows.size() == 1);
        CHECK(std::stod(csv.rows[0][csv.col("p_tmsv")]) == doctest::Approx(std::exp(-25.0)).epsilon(1e-13));
        CHECK(csv.get("command") == "qi-error");
        CHECK(csv.get("seed") == "none");
        CHECK(csv.get("tool_version") == QRAD_VERSION);
        CHECK(csv.get("config_hash") == config_hash(load_config(cfg)));
    }
    SUBCASE("invalid prior exits 2 naming the field")
    {
        const auto cfg = tmp.write("bad.yaml", "scenario:\n  lambda: 1.5\n");
        const auto r = run({"qi-error", "--config", cfg.string()});
        CHECK(r.code == 2);
        CHECK(r.err.find("scenario.lambda") != std::string::npos);
        CHECK(r.out.empty());
    }
    SUBCASE("mode sweep with --points")
    {
        const auto cfg = tmp.write("m.yaml", "sweep: {variable: modes, start: 1, stop: 1000, points: 5}\n");
        const auto r = run({"qi-error", "--config", cfg.string(), "--points", "11"});
        REQUIRE(r.code == 0);
        const auto csv = parse_csv(r.out);
        CHECK(csv.rows.size() == 11);
        CHECK(csv.rows.back()[0] == "1000");
    }
    SUBCASE("unsupported sweep variable")
    {
        const auto cfg = tmp.write("v.yaml", "sweep: {variable: bandwidth_Hz, start: 1, stop: 2, points: 2}\n");
        const auto r = run({"qi-error", "--config", cfg.string()});
        CHECK(r.code == 2);
        CHECK(r.err.find("sweep.variable") != std::string::npos);
    }
    SUBCASE("missing config file")
    {
        CHECK(run({"qi-error", "--config", (tmp.path / "nope.yaml").string()}).code == 2);
        CHECK(run({"qi-error"}).code == 2);
        CHECK(run({"frobnicate", "--config", "x"}).code == 2);
    }
}

TEST_CASE("link command")
{
    TempDir tmp;
    const auto cfg = tmp.write("link.yaml", "scenario: {eta: 1.0e-9, n_s: 1, n_b: 600}\n"
                                            "link:\n  bandwidth_Hz: 1.0e10\n  integration_time_s: 1\n"
                                            "  stages:\n    - {gain_dB: 30, noise_temperature_K: 5}\n"
                                            "    - {gain_dB: 30, noise_temperature_K: 300}\n");
    const auto r = run({"link", "--config", cfg.string()});
    REQUIRE(r.code == 0);
    const auto csv = parse_csv(r.out);
    REQUIRE(csv.rows.size() == 1);
    CHECK(csv.rows[0][csv.col("modes")] == "10000000000");
    CHECK(csv.rows[0][csv.col("power_ratio_vs_jpa")] == "1000");
    CHECK(std::stod(csv.rows[0][csv.col("transmit_power_W")]) == doctest::Approx(5.96e-14).epsilon(0.005));
    CHECK(std::stod(csv.get("cascade_noise_temperature_K")) == doctest::Approx(5.3).epsilon(1e-12));

    const auto zero = tmp.write("zero.yaml", "scenario: {eta: 0, n_s: 1, n_b: 600}\n");
    const auto z = parse_csv(run({"link", "--config", zero.string()}).out);
    CHECK(z.rows[0][z.col("p_error")] == "1");
    CHECK(z.rows[0][z.col("p_cl")] == "1");
}

TEST_CASE("montecarlo command")
{
    TempDir tmp;
    const auto cfg = tmp.write("mc.yaml", "scenario: {eta: 0.1, n_s: 0.01, n_b: 10}\n"
                                          "sweep: {variable: modes, start: 40000, stop: 100000, points: 4}\n"
                                          "montecarlo: {trials: 20000}\n");
    SUBCASE("seed required")
    {
        const auto r = run({"montecarlo", "--config", cfg.string()});
        CHECK(r.code == 2);
        CHECK(r.err.find("montecarlo.seed") != std::string::npos);
    }
    SUBCASE("byte-identical reruns and bound")
    {
        const auto a = tmp.path / "a.csv";
        const auto b = tmp.path / "b.csv";
        REQUIRE(run({"montecarlo", "--config", cfg.string(), "--seed", "7", "--out", a.string()}).code == 0);
        REQUIRE(run({"montecarlo", "--config", cfg.string(), "--seed", "7", "--out", b.string()}).code == 0);
        CHECK(slurp(a) == slurp(b));
        CHECK_FALSE(fs::exists(tmp.path / "a.csv.tmp"));

        const auto csv = parse_csv(slurp(a));
        CHECK(csv.get("seed") == "7");
        const auto pe = csv.numbers("p_error");
        const auto hi = csv.numbers("p_error_hi");
        const auto bound = csv.numbers("p_tmsv");
        for (std::size_t k = 0; k < pe.size(); ++k) {
            CHECK(pe[k] >= bound[k]);
            CHECK(hi[k] >= bound[k]);
        }
        CHECK(std::stod(csv.get("log_p_error_slope")) < 0.0);
        CHECK(std::stod(csv.get("log_p_error_r2")) >= 0.98);

        const auto c = tmp.path / "c.csv";
        REQUIRE(run({"montecarlo", "--config", cfg.string(), "--seed", "8", "--out", c.string()}).code == 0);
        CHECK(slurp(a) != slurp(c));
    }
}

TEST_CASE("device commands")
{
    TempDir tmp;
    SUBCASE("bias sweep")
    {
        const auto cfg = tmp.write("bias.yaml", "device: {kappa: 0.14}\nbias:\n  grid: {start: -2.5e-3, stop: 2.5e-3, points: 41}\n");
        const auto r = run({"bias-sweep", "--config", cfg.string()});
        REQUIRE(r.code == 0);
        const auto csv = parse_csv(r.out);
        CHECK(csv.rows.size() == 3 * 41);
        const auto pumps = csv.numbers("pump_dBm");
        const auto bias = csv.numbers("bias_A");
        const auto raw = csv.numbers("idler_raw_dBm");
        double prev_top = -INFINITY;
        for (int curve = 0; curve < 3; ++curve) {
            double top = -INFINITY, low = INFINITY, at = NAN;
            for (int k = 0; k < 41; ++k) {
                const std::size_t i = curve * 41 + k;
                top = std::max(top, raw[i]);
                if (raw[i] < low) {
                    low = raw[i];
                    at = bias[i];
                }
            }
            CHECK(at == 0.0);
            CHECK(top > prev_top);
            prev_top = top;
            CHECK(pumps[curve * 41] == std::vector<double>{-90, -85, -80}[curve]);
        }
        CHECK(std::stod(csv.get("curve_2_modulation_depth_dB")) == doctest::Approx(10.0).epsilon(0.05));
        CHECK(csv.get("kappa_source") == "config");
    }
    SUBCASE("gain sweep")
    {
        const auto cfg = tmp.write("gain.yaml", "gain:\n  grid: {start: -95, stop: -65, points: 7}\n");
        const auto r = run({"gain-sweep", "--config", cfg.string()});
        REQUIRE(r.code == 0);
        const auto csv = parse_csv(r.out);
        CHECK(csv.rows.size() == 2 * 8);
        CHECK(csv.get("kappa_source") == "calibrated");
        const auto reg = csv.col("regime");
        const auto gain = csv.numbers("gain_dB");
        const auto dbm = csv.numbers("pump_dBm");
        int zero_rows = 0;
        bool saw_deg = false, saw_nd = false;
        for (std::size_t i = 0; i < csv.rows.size(); ++i) {
            const bool nd = csv.rows[i][reg] == "non-degenerate";
            saw_nd |= nd;
            saw_deg |= csv.rows[i][reg] == "degenerate";
            if (std::isinf(dbm[i])) {
                CHECK(gain[i] == 0.0);
                ++zero_rows;
            }
            if (nd && dbm[i] == -65.0)
                CHECK(std::abs(gain[i] - 25.0) <= 0.05);
        }
        CHECK(zero_rows == 2);
        CHECK(saw_deg);
        CHECK(saw_nd);
    }
    SUBCASE("partial failure exits 3")
    {
        const auto cfg = tmp.write("fail.yaml", "device: {kappa: 50}\nbias:\n  signal_power_dBm: -80\n"
                                                "  pump_powers_dBm: [-80]\n  grid: {start: -2.5e-3, stop: 2.5e-3, points: 21}\n");
        const auto r = run({"bias-sweep", "--config", cfg.string()});
        CHECK(r.code == 3);
        const auto csv = parse_csv(r.out);
        CHECK(csv.rows.size() == 21);
        CHECK(std::stoi(csv.get("failed_points")) > 2);
    }
    SUBCASE("unreachable calibration exits 4")
    {
        const auto cfg = tmp.write("cal.yaml", "calibration: {target_gain_dB: 60, signal_power_dBm: -70}\n");
        const auto r = run({"gain-sweep", "--config", cfg.string()});
        CHECK(r.code == 4);
        CHECK(r.err.find("numerical failure") != std::string::npos);
    }
}

TEST_CASE("installed binary")
{
    TempDir tmp;
    const auto cfg = tmp.write("one.yaml", "scenario: {eta: 0.5, n_s: 0.1, n_b: 20, modes: 10000}\n");
    const auto out = tmp.path / "out.csv";
    const std::string cmd = std::string("\"") + QRAD_CLI_PATH + "\" qi-error --config \"" + cfg.string() + "\" --out \"" +
                            out.string() + "\"";
    CHECK(std::system(cmd.c_str()) == 0);
    const auto csv = parse_csv(slurp(out));
    CHECK(csv.rows.size() == 1);

    const auto bad = tmp.write("bad.yaml", "scenario: {lambda: 1.5}\n");
    const std::string cmd2 = std::string("\"") + QRAD_CLI_PATH + "\" qi-error --config \"" + bad.string() + "\" 2>/dev/null";
    const int status = std::system(cmd2.c_str());
    CHECK(WEXITSTATUS(status) == 2);
}
