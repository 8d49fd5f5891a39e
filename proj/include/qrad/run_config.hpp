#pragma once

// Run configuration for the qrad CLI. The on-disk form is a YAML document;
// see docs/config.md for the grammar. Every physical key carries its SI unit
// suffix (c_g_F, f_pump_Hz, power_dBm, ...).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrad/jtwpa.hpp"
#include "qrad/qi_detection.hpp"
#include "qrad/radar_link.hpp"

namespace qrad::cli {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, int line, const std::string& message);

    const std::string& field() const noexcept { return field_; }
    int line() const noexcept { return line_; }  // 1-based, 0 when unknown

private:
    std::string field_;
    int line_;
};

enum class GridScale { linear, log };

struct GridSpec {
    std::string variable;
    double start = 0.0;
    double stop = 0.0;
    std::size_t points = 1;
    GridScale scale = GridScale::linear;

    std::vector<double> values() const;
};

struct DeviceConfig {
    jtwpa::SquidCellParams cell = jtwpa::reference_device();
    std::optional<double> kappa;  // calibrated when absent
    jtwpa::InputLine line;
    jtwpa::BiasMapping bias;
    int steps_per_cell = 1;
    bool kerr_correction = false;
};

struct CalibrationConfig {
    double target_gain_db = 25.0;
    double pump_power_dbm = -65.0;
    double f_pump = 13.4e9;
    double f_signal = 9.0e9;
    double phi_dc = 1.5707963267948966;
    double signal_power_dbm = -120.0;
};

struct BiasConfig {
    double f_pump = 6.75e9;
    double f_signal = 3.3e9;
    double signal_power_dbm = -110.0;
    std::vector<double> pump_powers_dbm{-90.0, -85.0, -80.0};
    GridSpec grid{"bias_A", -2.5e-3, 2.5e-3, 101, GridScale::linear};
    std::optional<double> floor_dbm;
    std::optional<double> target_depth_db = 10.0;
};

struct GainConfig {
    double f_signal = 9.0e9;
    double f_pump_non_degenerate = 13.4e9;
    double phi_dc = 1.5707963267948966;
    double signal_power_dbm = -120.0;
    GridSpec grid{"pump_dBm", -95.0, -65.0, 31, GridScale::linear};
    bool include_zero = true;
    std::vector<jtwpa::Regime> regimes{jtwpa::Regime::non_degenerate, jtwpa::Regime::degenerate};
};

struct StageConfig {
    double gain_db = 30.0;
    double noise_temperature_k = 5.0;
};

struct LinkConfig {
    double bandwidth = 10.0e9;
    double integration_time = 1.0;
    double center_frequency = 9.0e9;
    double photons_per_mode = 1.0;
    double jpa_bandwidth = link::kJpaReferenceBandwidth;
    std::vector<StageConfig> stages{{30.0, 5.0}};
    link::Source source = link::Source::quantum;
};

struct MonteCarloConfig {
    std::int64_t trials = 100000;
    std::optional<std::uint64_t> seed;
    qi::Sampling sampling = qi::Sampling::chi_square;
    double phase = 0.0;
};

struct RunConfig {
    qi::QIScenario scenario{0.5, 0.1, 20.0, 0.5, 1, false};
    std::optional<GridSpec> sweep;
    DeviceConfig device;
    CalibrationConfig calibration;
    BiasConfig bias;
    GainConfig gain;
    LinkConfig link;
    MonteCarloConfig montecarlo;
};

RunConfig parse_config(const std::string& yaml_text);
RunConfig load_config(const std::filesystem::path& path);

// Canonical text of every resolved value except the seed; equal for
// semantically equal configs.
std::string canonical_form(const RunConfig& config);

// 16 hex digits of FNV-1a over canonical_form.
std::string config_hash(const RunConfig& config);

}  // namespace qrad::cli
