#include "qrad/commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "qrad/errors.hpp"
#include "qrad/units.hpp"

#ifndef QRAD_VERSION
#define QRAD_VERSION "unknown"
#endif

namespace qrad::cli {

namespace {

using jtwpa::Regime;

std::string fmt(double v) { return format_double(v); }

std::string sweep_variable(const RunConfig& cfg, const std::vector<std::string>& allowed, const std::string& fallback)
{
    if (!cfg.sweep)
        return fallback;
    for (const auto& name : allowed)
        if (cfg.sweep->variable == name)
            return name;
    std::string list;
    for (const auto& name : allowed)
        list += (list.empty() ? "" : ", ") + name;
    throw ConfigError("sweep.variable", 0, "'" + cfg.sweep->variable + "' is not sweepable here; expected one of " + list);
}

std::vector<double> grid_or(const RunConfig& cfg, double single)
{
    if (!cfg.sweep)
        return {single};
    return cfg.sweep->values();
}

// Grid values are rounded to the nearest mode count.
std::int64_t as_modes(double v)
{
    if (!(v >= 0.5) || v > 9.0e18)
        throw DomainError("mode count must be >= 1, got " + fmt(v));
    return std::llround(v);
}

void set_variable(qi::QIScenario& scn, const std::string& var, double v)
{
    if (var == "eta")
        scn.eta = v;
    else if (var == "n_s")
        scn.n_s = v;
    else if (var == "n_b")
        scn.n_b = v;
    else if (var == "modes")
        scn.modes = as_modes(v);
}

int sweep_exit_code(std::size_t failures, std::size_t total)
{
    if (total == 0 || failures == 0)
        return kSuccess;
    const double ok = static_cast<double>(total - failures) / static_cast<double>(total);
    return ok >= kSweepSuccessFraction ? kSuccess : kPartialFailure;
}

jtwpa::CmeOptions device_cme(const RunConfig& cfg, double kappa)
{
    jtwpa::CmeOptions o;
    o.kappa = kappa;
    o.steps_per_cell = cfg.device.steps_per_cell;
    o.kerr_correction = cfg.device.kerr_correction;
    return o;
}

void add_meta_device(SweepResult& r, const RunConfig& cfg, double kappa)
{
    r.set_meta("kappa", fmt(kappa));
    r.set_meta("kappa_source", cfg.device.kappa ? "config" : "calibrated");
    r.set_meta("beta_L", fmt(jtwpa::beta_l(cfg.device.cell)));
}

struct Fit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    bool valid = false;
};

Fit least_squares(const std::vector<double>& x, const std::vector<double>& y)
{
    Fit f;
    const std::size_t n = x.size();
    if (n < 2)
        return f;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0)
        return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    f.valid = true;
    return f;
}

}  // namespace

double resolve_kappa(const RunConfig& cfg)
{
    if (cfg.device.kappa)
        return *cfg.device.kappa;
    const CalibrationConfig& cal = cfg.calibration;
    jtwpa::PumpConfig pump;
    pump.f_pump = cal.f_pump;
    pump.phi_dc = cal.phi_dc;
    pump.regime = Regime::non_degenerate;
    pump.a_pump = cfg.device.line.amplitude(units::dbm_to_watts(cal.pump_power_dbm));
    const double a_signal = cfg.device.line.amplitude(units::dbm_to_watts(cal.signal_power_dbm));
    return jtwpa::calibrate_coupling(cfg.device.cell, cal.target_gain_db, pump, cal.f_signal, a_signal,
                                     device_cme(cfg, 1.0));
}

CommandOutcome cmd_qi_error(const RunConfig& cfg)
{
    const std::string var = sweep_variable(cfg, {"eta", "n_s", "n_b", "modes"}, "n_b");
    const std::vector<double> xs = grid_or(cfg, cfg.scenario.n_b);

    CommandOutcome out;
    SweepResult& r = out.result;
    auto& c_var = r.add_column(var);
    auto& c_cl = r.add_column("p_cl");
    auto& c_tmsv = r.add_column("p_tmsv");
    auto& c_e_cl = r.add_column("exponent_cl");
    auto& c_e_tmsv = r.add_column("exponent_tmsv");
    auto& c_adv = r.add_column("advantage_dB");

    for (double x : xs) {
        qi::QIScenario scn = cfg.scenario;
        set_variable(scn, var, x);
        const qi::ErrorReport cl = qi::classical_report(scn);
        const qi::ErrorReport q = qi::tmsv_report(scn);
        if (var == "modes")
            c_var.values.emplace_back(scn.modes);
        else
            c_var.values.emplace_back(x);
        c_cl.values.emplace_back(cl.p_error);
        c_tmsv.values.emplace_back(q.p_error);
        c_e_cl.values.emplace_back(cl.exponent);
        c_e_tmsv.values.emplace_back(q.exponent);
        c_adv.values.emplace_back(qi::advantage_db(scn.n_b));
    }
    r.set_meta("half_prefactor", cfg.scenario.half_prefactor ? "true" : "false");
    return out;
}

CommandOutcome cmd_bias_sweep(const RunConfig& cfg)
{
    const BiasConfig& bc = cfg.bias;
    if (bc.pump_powers_dbm.empty())
        throw ConfigError("bias.pump_powers_dBm", 0, "needs at least one pump power");
    const double kappa = resolve_kappa(cfg);
    const std::vector<double> biases = bc.grid.values();

    jtwpa::BiasSweepOptions opts;
    opts.line = cfg.device.line;
    opts.cme = device_cme(cfg, kappa);

    jtwpa::PumpConfig pump;
    pump.f_pump = bc.f_pump;
    pump.regime = Regime::non_degenerate;
    const double signal_w = units::dbm_to_watts(bc.signal_power_dbm);

    // The floor comes from the strongest pump and is shared by every curve.
    std::size_t ref = 0;
    for (std::size_t k = 1; k < bc.pump_powers_dbm.size(); ++k)
        if (bc.pump_powers_dbm[k] > bc.pump_powers_dbm[ref])
            ref = k;

    auto run = [&](double pump_dbm, const jtwpa::BiasSweepOptions& o) {
        jtwpa::PumpConfig p = pump;
        p.a_pump = cfg.device.line.amplitude(units::dbm_to_watts(pump_dbm));
        return jtwpa::bias_sweep_idler(cfg.device.cell, p, bc.f_signal, signal_w, biases, cfg.device.bias, o);
    };

    jtwpa::BiasSweepOptions ref_opts = opts;
    ref_opts.floor_dbm = bc.floor_dbm;
    ref_opts.target_depth_db = bc.floor_dbm ? std::nullopt : bc.target_depth_db;
    std::vector<jtwpa::BiasSweep> sweeps(bc.pump_powers_dbm.size());
    sweeps[ref] = run(bc.pump_powers_dbm[ref], ref_opts);

    jtwpa::BiasSweepOptions other_opts = opts;
    other_opts.floor_dbm = sweeps[ref].floor_dbm;
    for (std::size_t k = 0; k < sweeps.size(); ++k)
        if (k != ref)
            sweeps[k] = run(bc.pump_powers_dbm[k], other_opts);

    CommandOutcome out;
    std::size_t failures = 0, total = 0;
    for (std::size_t k = 0; k < sweeps.size(); ++k) {
        SweepResult part = sweeps[k].to_sweep_result();
        SweepResult tagged;
        auto& c = tagged.add_column("pump_dBm");
        c.values.assign(part.rows(), Cell{bc.pump_powers_dbm[k]});
        for (const Column& col : part.columns())
            tagged.add_column(col.name).values = col.values;
        if (k == 0)
            out.result = std::move(tagged);
        else
            out.result.append_rows(tagged);
        failures += sweeps[k].failures;
        total += sweeps[k].points.size();

        const std::string key = "curve_" + std::to_string(k);
        out.result.set_meta(key + "_pump_dBm", fmt(bc.pump_powers_dbm[k]));
        out.result.set_meta(key + "_modulation_depth_dB", fmt(sweeps[k].modulation_depth_db));
        out.result.set_meta(key + "_min_bias_A", fmt(sweeps[k].min_bias));
        out.result.set_meta(key + "_min_bias_phase_rad", fmt(sweeps[k].min_bias_phase));
    }
    out.result.set_meta("floor_dBm", fmt(sweeps[ref].floor_dbm));
    out.result.set_meta("floor_reference_pump_dBm", fmt(bc.pump_powers_dbm[ref]));
    add_meta_device(out.result, cfg, kappa);
    out.result.set_meta("failed_points", std::to_string(failures));
    out.exit_code = sweep_exit_code(failures, total);
    return out;
}

CommandOutcome cmd_gain_sweep(const RunConfig& cfg)
{
    const GainConfig& gc = cfg.gain;
    if (gc.regimes.empty())
        throw ConfigError("gain.regimes", 0, "needs at least one regime");
    const double kappa = resolve_kappa(cfg);

    std::vector<double> powers;
    if (gc.include_zero)
        powers.push_back(0.0);
    for (double dbm : gc.grid.values())
        powers.push_back(units::dbm_to_watts(dbm));

    CommandOutcome out;
    std::size_t failures = 0, total = 0;
    bool first = true;
    for (Regime regime : gc.regimes) {
        jtwpa::GainSweepSpec spec;
        spec.regime = regime;
        spec.f_signal = gc.f_signal;
        spec.f_pump_non_degenerate = gc.f_pump_non_degenerate;
        spec.phi_dc = gc.phi_dc;
        spec.signal_power_w = units::dbm_to_watts(gc.signal_power_dbm);
        spec.line = cfg.device.line;
        spec.cme = device_cme(cfg, kappa);
        const jtwpa::GainSweep sweep = jtwpa::gain_vs_pump_power(cfg.device.cell, spec, powers);
        const SweepResult part = sweep.to_sweep_result();
        if (first)
            out.result = part;
        else
            out.result.append_rows(part);
        first = false;
        for (const auto& [k, v] : part.metadata())
            out.result.set_meta(k, v);
        for (const auto& p : sweep.points)
            failures += p.ok ? 0 : 1;
        total += sweep.points.size();

    }
    add_meta_device(out.result, cfg, kappa);
    out.result.set_meta("calibration_target_dB", fmt(cfg.calibration.target_gain_db));
    out.result.set_meta("calibration_pump_dBm", fmt(cfg.calibration.pump_power_dbm));
    out.result.set_meta("failed_points", std::to_string(failures));
    out.exit_code = sweep_exit_code(failures, total);
    return out;
}

CommandOutcome cmd_link(const RunConfig& cfg)
{
    const LinkConfig& lc = cfg.link;
    const std::string var = sweep_variable(cfg, {"bandwidth_Hz", "integration_time_s"}, "bandwidth_Hz");
    const std::vector<double> xs = grid_or(cfg, var == "bandwidth_Hz" ? lc.bandwidth : lc.integration_time);

    const link::LinkBudget jpa =
        link::make_link_budget(lc.jpa_bandwidth, lc.integration_time, lc.center_frequency, lc.photons_per_mode);

    CommandOutcome out;
    SweepResult& r = out.result;
    auto& c_b = r.add_column("bandwidth_Hz");
    auto& c_t = r.add_column("integration_time_s");
    auto& c_m = r.add_column("modes");
    auto& c_pw = r.add_column("transmit_power_W");
    auto& c_pdbm = r.add_column("transmit_power_dBm");
    auto& c_ratio = r.add_column("power_ratio_vs_jpa");
    auto& c_mratio = r.add_column("mode_ratio_vs_jpa");
    auto& c_cl = r.add_column("p_cl");
    auto& c_tmsv = r.add_column("p_tmsv");
    auto& c_e_cl = r.add_column("exponent_cl");
    auto& c_e_tmsv = r.add_column("exponent_tmsv");
    auto& c_sel = r.add_column("p_error");

    for (double x : xs) {
        const double b = var == "bandwidth_Hz" ? x : lc.bandwidth;
        const double t = var == "integration_time_s" ? x : lc.integration_time;
        const link::LinkBudget budget = link::make_link_budget(b, t, lc.center_frequency, lc.photons_per_mode);
        const link::LinkErrorReport rep = link::end_to_end_error(cfg.scenario, budget, lc.source);
        c_b.values.emplace_back(b);
        c_t.values.emplace_back(t);
        c_m.values.emplace_back(budget.modes);
        c_pw.values.emplace_back(budget.transmit_power_w);
        c_pdbm.values.emplace_back(budget.transmit_power_dbm);
        c_ratio.values.emplace_back(link::transmit_power_ratio(budget, jpa));
        c_mratio.values.emplace_back(static_cast<double>(budget.modes) / static_cast<double>(jpa.modes));
        c_cl.values.emplace_back(rep.classical.p_error);
        c_tmsv.values.emplace_back(rep.quantum.p_error);
        c_e_cl.values.emplace_back(rep.classical.exponent);
        c_e_tmsv.values.emplace_back(rep.quantum.exponent);
        c_sel.values.emplace_back(rep.selected_report().p_error);
    }

    std::vector<link::AmplifierStage> stages;
    for (const StageConfig& s : lc.stages)
        stages.push_back(link::AmplifierStage::from_db(s.gain_db, s.noise_temperature_k));
    r.set_meta("source", lc.source == link::Source::quantum ? "quantum" : "classical");
    r.set_meta("jpa_bandwidth_Hz", fmt(jpa.bandwidth));
    r.set_meta("jpa_modes", std::to_string(jpa.modes));
    r.set_meta("jpa_transmit_power_W", fmt(jpa.transmit_power_w));
    if (!stages.empty()) {
        const link::CascadeResult cascade = link::friis_cascade(stages);
        r.set_meta("cascade_gain_dB", fmt(units::linear_to_db(cascade.total_gain)));
        r.set_meta("cascade_noise_temperature_K", fmt(cascade.noise_temperature));
    }
    return out;
}

CommandOutcome cmd_montecarlo(const RunConfig& cfg)
{
    const MonteCarloConfig& mc = cfg.montecarlo;
    if (!mc.seed)
        throw ConfigError("montecarlo.seed", 0, "Monte-Carlo runs need a seed (config or --seed)");
    const std::string var = sweep_variable(cfg, {"modes", "eta", "n_s", "n_b"}, "modes");
    const std::vector<double> xs = grid_or(cfg, static_cast<double>(cfg.scenario.modes));

    CommandOutcome out;
    SweepResult& r = out.result;
    auto& c_var = r.add_column(var);
    auto& c_pf = r.add_column("p_false");
    auto& c_pm = r.add_column("p_miss");
    auto& c_pe = r.add_column("p_error");
    auto& c_lo = r.add_column("p_error_lo");
    auto& c_hi = r.add_column("p_error_hi");
    auto& c_bound = r.add_column("p_tmsv");
    auto& c_ok = r.add_column("bound_ok");
    auto& c_warn = r.add_column("low_count_warning");

    std::vector<double> fit_x, fit_y;
    std::uint64_t row = 0;
    for (double x : xs) {
        qi::QIScenario scn = cfg.scenario;
        set_variable(scn, var, x);
        qi::MonteCarloOptions o;
        o.trials = mc.trials;
        o.seed = *mc.seed + row++;
        o.sampling = mc.sampling;
        o.phase = mc.phase;
        const qi::MonteCarloReport rep = qi::monte_carlo_phase_conjugate(scn, o);
        const double bound = qi::p_error_tmsv(scn);

        if (var == "modes")
            c_var.values.emplace_back(scn.modes);
        else
            c_var.values.emplace_back(x);
        c_pf.values.emplace_back(rep.estimate.p_false);
        c_pm.values.emplace_back(rep.estimate.p_miss);
        c_pe.values.emplace_back(rep.estimate.p_error);
        c_lo.values.emplace_back(rep.p_error_ci.lo);
        c_hi.values.emplace_back(rep.p_error_ci.hi);
        c_bound.values.emplace_back(bound);
        c_ok.values.emplace_back(std::int64_t{rep.p_error_ci.hi >= bound ? 1 : 0});
        c_warn.values.emplace_back(std::int64_t{rep.low_count_warning ? 1 : 0});
        if (rep.estimate.p_error > 0.0) {
            fit_x.push_back(x);
            fit_y.push_back(std::log(rep.estimate.p_error));
        }
    }

    r.set_meta("trials", std::to_string(mc.trials));
    r.set_meta("sampling", mc.sampling == qi::Sampling::chi_square ? "chi-square" : "per-mode");
    r.set_meta("phase_rad", fmt(mc.phase));
    const Fit fit = least_squares(fit_x, fit_y);
    if (fit.valid) {
        r.set_meta("log_p_error_slope", fmt(fit.slope));
        r.set_meta("log_p_error_intercept", fmt(fit.intercept));
        r.set_meta("log_p_error_r2", fmt(fit.r2));
    }
    return out;
}

namespace {

SweepResult with_header(const SweepResult& body, const std::string& command, const RunConfig& cfg)
{
    SweepResult r;
    r.set_meta("command", command);
    r.set_meta("config_hash", config_hash(cfg));
    r.set_meta("tool_version", QRAD_VERSION);
    r.set_meta("seed", cfg.montecarlo.seed ? std::to_string(*cfg.montecarlo.seed) : "none");
    for (const auto& [k, v] : body.metadata())
        r.set_meta(k, v);
    for (const Column& c : body.columns())
        r.add_column(c.name).values = c.values;
    return r;
}

void apply_points(RunConfig& cfg, const std::string& command, std::size_t points)
{
    if (points < 1)
        throw ConfigError("--points", 0, "must be >= 1");
    if (command == "bias-sweep")
        cfg.bias.grid.points = points;
    else if (command == "gain-sweep")
        cfg.gain.grid.points = points;
    else if (cfg.sweep)
        cfg.sweep->points = points;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Quantum-illumination radar and traveling-wave amplifier simulator", "qrad"};
    app.set_version_flag("--version", QRAD_VERSION);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> points;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"qi-error", "classical and TMSV error probabilities over one scenario variable"},
        {"bias-sweep", "idler output power against flux-bias current"},
        {"gain-sweep", "pump-on/off gain against pump power, both regimes"},
        {"link", "mode count, transmit power and end-to-end error"},
        {"montecarlo", "simulated phase-conjugate receiver against the closed-form bound"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "YAML run configuration")->required();
        sub->add_option("--out", out_path, "CSV output path (stdout when omitted)");
        sub->add_option("--seed", seed, "RNG seed, overrides the config");
        sub->add_option("--points", points, "grid points, overrides the config");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kConfigError;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        RunConfig cfg = load_config(config_path);
        if (seed)
            cfg.montecarlo.seed = *seed;
        if (points)
            apply_points(cfg, command, *points);

        CommandOutcome outcome;
        if (command == "qi-error")
            outcome = cmd_qi_error(cfg);
        else if (command == "bias-sweep")
            outcome = cmd_bias_sweep(cfg);
        else if (command == "gain-sweep")
            outcome = cmd_gain_sweep(cfg);
        else if (command == "link")
            outcome = cmd_link(cfg);
        else
            outcome = cmd_montecarlo(cfg);

        const SweepResult result = with_header(outcome.result, command, cfg);
        if (out_path.empty())
            out << to_csv(result);
        else
            write_csv_atomic(result, out_path);
        if (outcome.exit_code == kPartialFailure)
            err << "qrad: fewer than " << kSweepSuccessFraction * 100.0 << "% of sweep points succeeded\n";
        return outcome.exit_code;
    } catch (const ConfigError& e) {
        err << "qrad: " << e.what() << '\n';
        return kConfigError;
    } catch (const DomainError& e) {
        err << "qrad: invalid parameter: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "qrad: numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    }
}

}  // namespace qrad::cli
