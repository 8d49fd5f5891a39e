#include "qrad/run_config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "qrad/errors.hpp"
#include "qrad/sweep_result.hpp"

namespace qrad::cli {

namespace {

std::string compose(const std::string& field, int line, const std::string& message)
{
    std::ostringstream out;
    out << "config error";
    if (line > 0)
        out << " at line " << line;
    if (!field.empty())
        out << " (field '" << field << "')";
    out << ": " << message;
    return out.str();
}

int line_of(const YAML::Node& node)
{
    const auto mark = node.Mark();
    return mark.line >= 0 ? mark.line + 1 : 0;
}

// A mapping node whose keys are consumed one by one; leftovers are typos.
class Section {
public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path))
    {
        if (node_ && !node_.IsNull() && !node_.IsMap())
            throw ConfigError(path_, line_of(node_), "expected a mapping");
    }

    bool present() const { return node_ && node_.IsMap(); }

    bool has(const std::string& key) const { return present() && node_[key]; }

    YAML::Node raw(const std::string& key)
    {
        used_.insert(key);
        return present() ? node_[key] : YAML::Node(YAML::NodeType::Undefined);
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    template <typename T>
    void read(const std::string& key, T& out)
    {
        const YAML::Node value = raw(key);
        if (!value)
            return;
        try {
            out = value.as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(field(key), line_of(value), "cannot read value '" + value.Scalar() + "'");
        }
    }

    template <typename T>
    void read(const std::string& key, std::optional<T>& out)
    {
        const YAML::Node value = raw(key);
        if (!value)
            return;
        if (value.IsNull()) {
            out.reset();
            return;
        }
        T v{};
        read(key, v);
        out = v;
    }

    Section child(const std::string& key) { return Section(raw(key), field(key)); }

    int line(const std::string& key) const
    {
        if (present() && node_[key])
            return line_of(node_[key]);
        return present() ? line_of(node_) : 0;
    }

    void reject_unknown() const
    {
        if (!present())
            return;
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!used_.count(key))
                throw ConfigError(field(key), line_of(kv.first), "unknown key");
        }
    }

private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> used_;
};

void require(bool ok, const Section& s, const std::string& key, const std::string& message)
{
    if (!ok)
        throw ConfigError(s.field(key), s.line(key), message);
}

void check_probability(const Section& s, const std::string& key, double v)
{
    require(std::isfinite(v) && v >= 0.0 && v <= 1.0, s, key, "must lie in [0, 1]");
}

void check_positive(const Section& s, const std::string& key, double v)
{
    require(std::isfinite(v) && v > 0.0, s, key, "must be finite and > 0");
}

GridScale parse_scale(Section& s)
{
    std::string scale = "linear";
    s.read("scale", scale);
    if (scale == "linear")
        return GridScale::linear;
    if (scale == "log")
        return GridScale::log;
    throw ConfigError(s.field("scale"), s.line("scale"), "expected 'linear' or 'log'");
}

void read_grid(Section& s, GridSpec& grid, bool with_variable)
{
    if (with_variable) {
        s.read("variable", grid.variable);
        require(!grid.variable.empty(), s, "variable", "sweep needs a variable");
    }
    s.read("start", grid.start);
    s.read("stop", grid.stop);
    std::int64_t points = static_cast<std::int64_t>(grid.points);
    s.read("points", points);
    require(points >= 1, s, "points", "must be >= 1");
    grid.points = static_cast<std::size_t>(points);
    if (s.has("scale"))
        grid.scale = parse_scale(s);
    require(std::isfinite(grid.start) && std::isfinite(grid.stop), s, "start", "grid bounds must be finite");
    if (grid.scale == GridScale::log)
        require(grid.start > 0.0 && grid.stop > 0.0, s, "start", "log grid bounds must be > 0");
    s.reject_unknown();
}

void parse_scenario(Section s, qi::QIScenario& scn)
{
    s.read("eta", scn.eta);
    s.read("n_s", scn.n_s);
    s.read("n_b", scn.n_b);
    s.read("lambda", scn.lambda_prior);
    s.read("modes", scn.modes);
    s.read("half_prefactor", scn.half_prefactor);
    check_probability(s, "eta", scn.eta);
    require(std::isfinite(scn.n_s) && scn.n_s >= 0.0, s, "n_s", "must be finite and >= 0");
    require(std::isfinite(scn.n_b) && scn.n_b >= 0.0, s, "n_b", "must be finite and >= 0");
    check_probability(s, "lambda", scn.lambda_prior);
    require(scn.modes >= 1, s, "modes", "must be >= 1");
    s.reject_unknown();
}

void parse_device(Section s, DeviceConfig& dev)
{
    auto& cell = dev.cell;
    s.read("c_g_F", cell.c_g);
    s.read("l_g_H", cell.l_g);
    s.read("c_j_F", cell.c_j);
    s.read("i_c_A", cell.i_c);
    std::int64_t cells = static_cast<std::int64_t>(cell.n_cells);
    s.read("n_cells", cells);
    require(cells >= 1, s, "n_cells", "must be >= 1");
    cell.n_cells = static_cast<std::size_t>(cells);
    s.read("non_hysteretic", cell.non_hysteretic);
    s.read("kappa", dev.kappa);
    s.read("z_ref_ohm", dev.line.z_ref);
    s.read("v0_V", dev.line.v0);
    s.read("mutual_coupling_H", dev.bias.mutual_coupling);
    s.read("phi_offset_rad", dev.bias.phi_offset);
    s.read("steps_per_cell", dev.steps_per_cell);
    s.read("kerr_correction", dev.kerr_correction);

    const std::pair<const char*, double> positive[] = {
        {"c_g_F", cell.c_g}, {"l_g_H", cell.l_g}, {"c_j_F", cell.c_j}, {"i_c_A", cell.i_c},
        {"z_ref_ohm", dev.line.z_ref}, {"v0_V", dev.line.v0}, {"mutual_coupling_H", dev.bias.mutual_coupling}};
    for (const auto& [key, v] : positive)
        check_positive(s, key, v);
    require(std::isfinite(dev.bias.phi_offset), s, "phi_offset_rad", "must be finite");
    require(dev.steps_per_cell >= 1, s, "steps_per_cell", "must be >= 1");
    if (dev.kappa)
        require(std::isfinite(*dev.kappa) && *dev.kappa >= 0.0, s, "kappa", "must be finite and >= 0");
    try {
        jtwpa::validate(cell);
    } catch (const DomainError& e) {
        throw ConfigError(s.field("i_c_A"), s.line("i_c_A"), e.what());
    }
    s.reject_unknown();
}

void parse_calibration(Section s, CalibrationConfig& cal)
{
    s.read("target_gain_dB", cal.target_gain_db);
    s.read("pump_power_dBm", cal.pump_power_dbm);
    s.read("f_pump_Hz", cal.f_pump);
    s.read("f_signal_Hz", cal.f_signal);
    s.read("phi_dc_rad", cal.phi_dc);
    s.read("signal_power_dBm", cal.signal_power_dbm);
    require(std::isfinite(cal.target_gain_db) && cal.target_gain_db >= 0.0, s, "target_gain_dB", "must be >= 0");
    check_positive(s, "f_pump_Hz", cal.f_pump);
    check_positive(s, "f_signal_Hz", cal.f_signal);
    s.reject_unknown();
}

void parse_bias(Section s, BiasConfig& bias)
{
    s.read("f_pump_Hz", bias.f_pump);
    s.read("f_signal_Hz", bias.f_signal);
    s.read("signal_power_dBm", bias.signal_power_dbm);
    s.read("pump_powers_dBm", bias.pump_powers_dbm);
    s.read("floor_dBm", bias.floor_dbm);
    s.read("target_depth_dB", bias.target_depth_db);
    if (s.has("floor_dBm") && !s.has("target_depth_dB"))
        bias.target_depth_db.reset();
    require(!(bias.floor_dbm && bias.target_depth_db), s, "floor_dBm",
            "set either floor_dBm or target_depth_dB, not both");
    require(!bias.pump_powers_dbm.empty(), s, "pump_powers_dBm", "needs at least one pump power");
    check_positive(s, "f_pump_Hz", bias.f_pump);
    check_positive(s, "f_signal_Hz", bias.f_signal);
    require(bias.f_signal < bias.f_pump, s, "f_signal_Hz", "must lie below the pump frequency");
    if (s.has("grid")) {
        Section g = s.child("grid");
        read_grid(g, bias.grid, false);
    } else {
        s.raw("grid");
    }
    s.reject_unknown();
}

void parse_gain(Section s, GainConfig& gain)
{
    s.read("f_signal_Hz", gain.f_signal);
    s.read("f_pump_non_degenerate_Hz", gain.f_pump_non_degenerate);
    s.read("phi_dc_rad", gain.phi_dc);
    s.read("signal_power_dBm", gain.signal_power_dbm);
    s.read("include_zero", gain.include_zero);
    std::vector<std::string> regimes;
    s.read("regimes", regimes);
    if (!regimes.empty()) {
        gain.regimes.clear();
        for (const auto& r : regimes) {
            if (r == "degenerate")
                gain.regimes.push_back(jtwpa::Regime::degenerate);
            else if (r == "non-degenerate")
                gain.regimes.push_back(jtwpa::Regime::non_degenerate);
            else
                throw ConfigError(s.field("regimes"), s.line("regimes"),
                                  "unknown regime '" + r + "' (degenerate | non-degenerate)");
        }
    }
    check_positive(s, "f_signal_Hz", gain.f_signal);
    check_positive(s, "f_pump_non_degenerate_Hz", gain.f_pump_non_degenerate);
    if (s.has("grid")) {
        Section g = s.child("grid");
        read_grid(g, gain.grid, false);
    } else {
        s.raw("grid");
    }
    s.reject_unknown();
}

void parse_link(Section s, LinkConfig& link)
{
    s.read("bandwidth_Hz", link.bandwidth);
    s.read("integration_time_s", link.integration_time);
    s.read("center_frequency_Hz", link.center_frequency);
    s.read("photons_per_mode", link.photons_per_mode);
    s.read("jpa_bandwidth_Hz", link.jpa_bandwidth);
    check_positive(s, "bandwidth_Hz", link.bandwidth);
    check_positive(s, "integration_time_s", link.integration_time);
    check_positive(s, "center_frequency_Hz", link.center_frequency);
    check_positive(s, "photons_per_mode", link.photons_per_mode);
    check_positive(s, "jpa_bandwidth_Hz", link.jpa_bandwidth);

    std::string source = "quantum";
    s.read("source", source);
    if (source == "quantum")
        link.source = link::Source::quantum;
    else if (source == "classical")
        link.source = link::Source::classical;
    else
        throw ConfigError(s.field("source"), s.line("source"), "expected 'quantum' or 'classical'");

    const YAML::Node stages = s.raw("stages");
    if (stages) {
        if (!stages.IsSequence() || stages.size() == 0)
            throw ConfigError(s.field("stages"), line_of(stages), "expected a non-empty list of stages");
        link.stages.clear();
        for (std::size_t k = 0; k < stages.size(); ++k) {
            Section st(stages[k], s.field("stages") + "[" + std::to_string(k) + "]");
            StageConfig stage;
            st.read("gain_dB", stage.gain_db);
            st.read("noise_temperature_K", stage.noise_temperature_k);
            require(std::isfinite(stage.gain_db), st, "gain_dB", "must be finite");
            require(std::isfinite(stage.noise_temperature_k) && stage.noise_temperature_k >= 0.0, st,
                    "noise_temperature_K", "must be >= 0");
            st.reject_unknown();
            link.stages.push_back(stage);
        }
    }
    s.reject_unknown();
}

void parse_montecarlo(Section s, MonteCarloConfig& mc)
{
    s.read("trials", mc.trials);
    s.read("seed", mc.seed);
    s.read("phase_rad", mc.phase);
    std::string sampling = "chi-square";
    s.read("sampling", sampling);
    if (sampling == "chi-square")
        mc.sampling = qi::Sampling::chi_square;
    else if (sampling == "per-mode")
        mc.sampling = qi::Sampling::per_mode;
    else
        throw ConfigError(s.field("sampling"), s.line("sampling"), "expected 'chi-square' or 'per-mode'");
    require(mc.trials >= qi::kMinTrials, s, "trials", "must be >= 1000");
    require(std::isfinite(mc.phase), s, "phase_rad", "must be finite");
    s.reject_unknown();
}

void put(std::ostringstream& out, const std::string& key, double v) { out << key << '=' << format_double(v) << '\n'; }

void put(std::ostringstream& out, const std::string& key, const std::string& v) { out << key << '=' << v << '\n'; }

void put_grid(std::ostringstream& out, const std::string& prefix, const GridSpec& g)
{
    put(out, prefix + ".variable", g.variable);
    put(out, prefix + ".start", g.start);
    put(out, prefix + ".stop", g.stop);
    put(out, prefix + ".points", std::to_string(g.points));
    put(out, prefix + ".scale", g.scale == GridScale::log ? "log" : "linear");
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : "none"; }

}  // namespace

ConfigError::ConfigError(std::string field, int line, const std::string& message)
    : std::runtime_error(compose(field, line, message)), field_(std::move(field)), line_(line)
{
}

std::vector<double> GridSpec::values() const
{
    std::vector<double> out(points);
    if (points == 1) {
        out[0] = start;
        return out;
    }
    const double span = static_cast<double>(points - 1);
    for (std::size_t k = 0; k < points; ++k) {
        // Antisymmetric index so that grids symmetric about zero are exactly symmetric.
        const double u = (2.0 * static_cast<double>(k) - span) / span;
        if (scale == GridScale::log) {
            const double lo = std::log10(start), hi = std::log10(stop);
            out[k] = std::pow(10.0, 0.5 * (lo + hi) + 0.5 * (hi - lo) * u);
        } else {
            out[k] = 0.5 * (start + stop) + 0.5 * (stop - start) * u;
        }
    }
    out.front() = start;
    out.back() = stop;
    return out;
}

RunConfig parse_config(const std::string& yaml_text)
{
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("", e.mark.line + 1, e.msg);
    }

    RunConfig cfg;
    Section top(root, "");
    parse_scenario(top.child("scenario"), cfg.scenario);
    if (top.has("sweep")) {
        Section s = top.child("sweep");
        GridSpec grid;
        read_grid(s, grid, true);
        cfg.sweep = grid;
    } else {
        top.raw("sweep");
    }
    parse_device(top.child("device"), cfg.device);
    parse_calibration(top.child("calibration"), cfg.calibration);
    parse_bias(top.child("bias"), cfg.bias);
    parse_gain(top.child("gain"), cfg.gain);
    parse_link(top.child("link"), cfg.link);
    parse_montecarlo(top.child("montecarlo"), cfg.montecarlo);
    top.reject_unknown();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("", 0, "cannot open config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string canonical_form(const RunConfig& c)
{
    std::ostringstream out;
    const auto& s = c.scenario;
    put(out, "scenario.eta", s.eta);
    put(out, "scenario.n_s", s.n_s);
    put(out, "scenario.n_b", s.n_b);
    put(out, "scenario.lambda", s.lambda_prior);
    put(out, "scenario.modes", std::to_string(s.modes));
    put(out, "scenario.half_prefactor", s.half_prefactor ? "true" : "false");
    if (c.sweep)
        put_grid(out, "sweep", *c.sweep);
    else
        put(out, "sweep", "none");

    const auto& d = c.device;
    put(out, "device.c_g_F", d.cell.c_g);
    put(out, "device.l_g_H", d.cell.l_g);
    put(out, "device.c_j_F", d.cell.c_j);
    put(out, "device.i_c_A", d.cell.i_c);
    put(out, "device.n_cells", std::to_string(d.cell.n_cells));
    put(out, "device.non_hysteretic", d.cell.non_hysteretic ? "true" : "false");
    put(out, "device.kappa", opt(d.kappa));
    put(out, "device.z_ref_ohm", d.line.z_ref);
    put(out, "device.v0_V", d.line.v0);
    put(out, "device.mutual_coupling_H", d.bias.mutual_coupling);
    put(out, "device.phi_offset_rad", d.bias.phi_offset);
    put(out, "device.steps_per_cell", std::to_string(d.steps_per_cell));
    put(out, "device.kerr_correction", d.kerr_correction ? "true" : "false");

    const auto& cal = c.calibration;
    put(out, "calibration.target_gain_dB", cal.target_gain_db);
    put(out, "calibration.pump_power_dBm", cal.pump_power_dbm);
    put(out, "calibration.f_pump_Hz", cal.f_pump);
    put(out, "calibration.f_signal_Hz", cal.f_signal);
    put(out, "calibration.phi_dc_rad", cal.phi_dc);
    put(out, "calibration.signal_power_dBm", cal.signal_power_dbm);

    const auto& b = c.bias;
    put(out, "bias.f_pump_Hz", b.f_pump);
    put(out, "bias.f_signal_Hz", b.f_signal);
    put(out, "bias.signal_power_dBm", b.signal_power_dbm);
    for (std::size_t k = 0; k < b.pump_powers_dbm.size(); ++k)
        put(out, "bias.pump_powers_dBm[" + std::to_string(k) + "]", b.pump_powers_dbm[k]);
    put_grid(out, "bias.grid", b.grid);
    put(out, "bias.floor_dBm", opt(b.floor_dbm));
    put(out, "bias.target_depth_dB", opt(b.target_depth_db));

    const auto& g = c.gain;
    put(out, "gain.f_signal_Hz", g.f_signal);
    put(out, "gain.f_pump_non_degenerate_Hz", g.f_pump_non_degenerate);
    put(out, "gain.phi_dc_rad", g.phi_dc);
    put(out, "gain.signal_power_dBm", g.signal_power_dbm);
    put_grid(out, "gain.grid", g.grid);
    put(out, "gain.include_zero", g.include_zero ? "true" : "false");
    for (std::size_t k = 0; k < g.regimes.size(); ++k)
        put(out, "gain.regimes[" + std::to_string(k) + "]", jtwpa::to_string(g.regimes[k]));

    const auto& l = c.link;
    put(out, "link.bandwidth_Hz", l.bandwidth);
    put(out, "link.integration_time_s", l.integration_time);
    put(out, "link.center_frequency_Hz", l.center_frequency);
    put(out, "link.photons_per_mode", l.photons_per_mode);
    put(out, "link.jpa_bandwidth_Hz", l.jpa_bandwidth);
    put(out, "link.source", l.source == link::Source::quantum ? "quantum" : "classical");
    for (std::size_t k = 0; k < l.stages.size(); ++k) {
        const std::string p = "link.stages[" + std::to_string(k) + "]";
        put(out, p + ".gain_dB", l.stages[k].gain_db);
        put(out, p + ".noise_temperature_K", l.stages[k].noise_temperature_k);
    }

    const auto& mc = c.montecarlo;
    put(out, "montecarlo.trials", std::to_string(mc.trials));
    put(out, "montecarlo.sampling", mc.sampling == qi::Sampling::chi_square ? "chi-square" : "per-mode");
    put(out, "montecarlo.phase_rad", mc.phase);
    return out.str();
}

std::string config_hash(const RunConfig& config)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_form(config)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

}  // namespace qrad::cli
