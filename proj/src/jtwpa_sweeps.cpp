#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "parallel.hpp"
#include "qrad/errors.hpp"
#include "qrad/jtwpa.hpp"
#include "qrad/units.hpp"

namespace qrad::jtwpa {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Short status token for CSV output.
std::string failure_code(const std::exception& e)
{
    if (dynamic_cast<const PumpDepletedError*>(&e))
        return "depleted";
    if (dynamic_cast<const IntegrationDivergedError*>(&e))
        return "diverged";
    if (dynamic_cast<const EvanescentBandError*>(&e))
        return "out_of_band";
    if (dynamic_cast<const UnsupportedRegimeError*>(&e))
        return "unsupported_regime";
    return "error";
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = std::numeric_limits<double>::quiet_NaN();
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    LinearFit fit;
    const auto n = static_cast<double>(x.size());
    if (x.size() < 3)
        return fit;
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        return fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = sxy * sxy / (sxx * syy);
    return fit;
}

}  // namespace

double calibrate_coupling(const SquidCellParams& params, double target_db, const PumpConfig& pump, double f_signal,
                          double a_signal_in, const CmeOptions& opts)
{
    if (!(target_db >= 0.0) || !std::isfinite(target_db))
        throw DomainError("target gain must be finite and >= 0 dB");
    if (target_db == 0.0)
        return 0.0;

    const double c3 = mixing_coefficients(params, pump.phi_dc).c3;
    const double drive = std::abs(c3) * pump.a_pump * static_cast<double>(params.n_cells);
    if (drive == 0.0)
        throw InfeasibleError("no three-wave coupling at this bias or pump amplitude; gain stays at 0 dB", 0.0);

    struct Probe {
        bool past_target = false;  // gain >= target, or the run left the supported regime
        double gain_db = 0.0;
        bool ok = false;
    };
    auto probe = [&](double kappa) {
        CmeOptions o = opts;
        o.kappa = kappa;
        Probe p;
        try {
            p.gain_db = pump_on_off_gain(params, pump, f_signal, a_signal_in, o);
            p.ok = true;
            p.past_target = p.gain_db >= target_db;
        } catch (const PumpDepletedError&) {
            p.past_target = true;
        } catch (const IntegrationDivergedError&) {
            p.past_target = true;
        }
        return p;
    };

    // Phase-matched undepleted estimate for the initial bracket.
    const double estimate = std::acosh(std::sqrt(units::db_to_linear(target_db))) / drive;
    double lo = 0.0;
    double best = 0.0;
    double hi = estimate;
    Probe at_hi = probe(hi);
    for (int k = 0; k < 60 && !at_hi.past_target; ++k) {
        lo = hi;
        best = at_hi.gain_db;
        hi *= 2.0;
        at_hi = probe(hi);
    }
    if (!at_hi.past_target)
        throw InfeasibleError("target gain not reached while expanding the coupling bracket", best);
    if (at_hi.ok && std::abs(at_hi.gain_db - target_db) <= kCalibrationTolerance / 50.0)
        return hi;

    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const Probe p = probe(mid);
        if (p.ok && std::abs(p.gain_db - target_db) <= kCalibrationTolerance / 50.0)
            return mid;
        if (p.past_target) {
            hi = mid;
        } else {
            lo = mid;
            best = p.gain_db;
        }
        if (hi - lo <= 1e-15 * hi)
            break;
    }

    const Probe final = probe(lo);
    if (final.ok && std::abs(final.gain_db - target_db) <= kCalibrationTolerance)
        return lo;
    std::ostringstream msg;
    msg << "target gain " << target_db << " dB unreachable below the pump-depletion guard; best " << best << " dB";
    throw InfeasibleError(msg.str(), best);
}

BiasSweep bias_sweep_idler(const SquidCellParams& params, const PumpConfig& pump, double f_signal,
                           double signal_power_w, const std::vector<double>& biases, const BiasMapping& mapping,
                           const BiasSweepOptions& opts)
{
    if (biases.empty())
        throw DomainError("bias grid is empty");
    for (double b : biases)
        if (!std::isfinite(b))
            throw DomainError("bias grid has non-finite entries");
    if (pump.regime != Regime::non_degenerate)
        throw UnsupportedRegimeError("idler bias sweep needs the non-degenerate regime");

    const double a_signal = opts.line.amplitude(signal_power_w);
    BiasSweep sweep;
    sweep.points.resize(biases.size());

    detail::parallel_chunks(biases.size(), opts.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            BiasPoint& pt = sweep.points[k];
            pt.bias = biases[k];
            pt.bias_phase = mapping.bias_phase(pt.bias);
            pt.phi_dc = mapping.phi_dc(pt.bias);
            PumpConfig at = pump;
            at.phi_dc = pt.phi_dc;
            try {
                const auto profile = cme_propagate(params, at, f_signal, a_signal, opts.cme);
                pt.idler_raw_dbm = units::watts_to_dbm(opts.line.power(std::abs(profile.output().idler)));
            } catch (const std::exception& e) {
                pt.ok = false;
                pt.error = failure_code(e);
                pt.idler_raw_dbm = std::numeric_limits<double>::quiet_NaN();
            }
        }
    });

    double peak = kNegInf;
    for (const auto& pt : sweep.points) {
        if (pt.ok)
            peak = std::max(peak, pt.idler_raw_dbm);
        else
            ++sweep.failures;
    }

    if (opts.target_depth_db)
        sweep.floor_dbm = peak - *opts.target_depth_db;
    else if (opts.floor_dbm)
        sweep.floor_dbm = *opts.floor_dbm;
    else
        sweep.floor_dbm = kNegInf;

    double lowest = std::numeric_limits<double>::infinity();
    std::size_t argmin = sweep.points.size();
    for (std::size_t k = 0; k < sweep.points.size(); ++k) {
        auto& pt = sweep.points[k];
        if (!pt.ok) {
            pt.idler_dbm = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        pt.at_floor = pt.idler_raw_dbm <= sweep.floor_dbm;
        pt.idler_dbm = std::max(pt.idler_raw_dbm, sweep.floor_dbm);
        if (pt.idler_raw_dbm < lowest) {
            lowest = pt.idler_raw_dbm;
            argmin = k;
        }
    }
    if (argmin == sweep.points.size()) {
        sweep.modulation_depth_db = std::numeric_limits<double>::quiet_NaN();
        sweep.min_bias = sweep.min_bias_phase = std::numeric_limits<double>::quiet_NaN();
        return sweep;
    }

    double top = kNegInf;
    double bottom = std::numeric_limits<double>::infinity();
    for (const auto& pt : sweep.points) {
        if (!pt.ok)
            continue;
        top = std::max(top, pt.idler_dbm);
        bottom = std::min(bottom, pt.idler_dbm);
    }
    sweep.modulation_depth_db = top - bottom;

    // The idler vanishes where c3 does; refine the grid minimum to that root.
    auto c3_at = [&](double bias) { return mixing_coefficients(params, mapping.phi_dc(bias)).c3; };
    double root = sweep.points[argmin].bias;
    const double c_min = c3_at(root);
    if (c_min != 0.0) {
        for (std::size_t nb : {argmin - 1, argmin + 1}) {
            if (nb >= sweep.points.size() || !sweep.points[nb].ok)
                continue;
            double a = root;
            double b = sweep.points[nb].bias;
            double fa = c_min;
            if (std::signbit(fa) == std::signbit(c3_at(b)))
                continue;
            for (int iter = 0; iter < 200 && a != b; ++iter) {
                const double mid = 0.5 * (a + b);
                if (mid == a || mid == b)
                    break;
                const double fm = c3_at(mid);
                if (fm == 0.0) {
                    a = b = mid;
                    break;
                }
                if (std::signbit(fm) == std::signbit(fa)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            root = 0.5 * (a + b);
            break;
        }
    }
    sweep.min_bias = root;
    sweep.min_bias_phase = mapping.bias_phase(root);
    return sweep;
}

SweepResult BiasSweep::to_sweep_result() const
{
    SweepResult r;
    auto& bias = r.add_column("bias_A").values;
    auto& phase = r.add_column("bias_phase_rad").values;
    auto& phi = r.add_column("phi_dc_rad").values;
    auto& raw = r.add_column("idler_raw_dBm").values;
    auto& idler = r.add_column("idler_dBm").values;
    auto& floor = r.add_column("at_floor").values;
    auto& status = r.add_column("status").values;
    for (const auto& pt : points) {
        bias.emplace_back(pt.bias);
        phase.emplace_back(pt.bias_phase);
        phi.emplace_back(pt.phi_dc);
        raw.emplace_back(pt.idler_raw_dbm);
        idler.emplace_back(pt.idler_dbm);
        floor.emplace_back(std::int64_t{pt.at_floor ? 1 : 0});
        status.emplace_back(pt.ok ? std::string("ok") : pt.error);
    }
    r.set_meta("floor_dBm", format_double(floor_dbm));
    r.set_meta("modulation_depth_dB", format_double(modulation_depth_db));
    r.set_meta("min_bias_A", format_double(min_bias));
    r.set_meta("min_bias_phase_rad", format_double(min_bias_phase));
    return r;
}

PumpConfig gain_sweep_pump(const GainSweepSpec& spec, double power_w)
{
    PumpConfig pump;
    pump.regime = spec.regime;
    pump.f_pump = spec.regime == Regime::degenerate ? 2.0 * spec.f_signal : spec.f_pump_non_degenerate;
    pump.a_pump = spec.line.amplitude(power_w);
    pump.phi_dc = spec.phi_dc;
    return pump;
}

GainSweep gain_vs_pump_power(const SquidCellParams& params, const GainSweepSpec& spec,
                             const std::vector<double>& powers_w)
{
    if (powers_w.empty())
        throw DomainError("pump power grid is empty");
    for (double p : powers_w)
        if (!(p >= 0.0) || !std::isfinite(p))
            throw DomainError("pump powers must be finite and >= 0 W");

    GainSweep sweep;
    sweep.regime = spec.regime;
    sweep.f_signal = spec.f_signal;
    sweep.f_pump = gain_sweep_pump(spec, 0.0).f_pump;
    sweep.points.resize(powers_w.size());
    const double a_signal = spec.line.amplitude(spec.signal_power_w);

    detail::parallel_chunks(powers_w.size(), spec.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            GainPoint& pt = sweep.points[k];
            pt.power_w = powers_w[k];
            const PumpConfig pump = gain_sweep_pump(spec, pt.power_w);
            pt.a_pump = pump.a_pump;
            try {
                pt.gain_db = pump_on_off_gain(params, pump, spec.f_signal, a_signal, spec.cme);
            } catch (const std::exception& e) {
                pt.ok = false;
                pt.error = failure_code(e);
                pt.gain_db = std::numeric_limits<double>::quiet_NaN();
            }
        }
    });

    double p_min = std::numeric_limits<double>::infinity();
    for (const auto& pt : sweep.points)
        if (pt.ok && pt.power_w > 0.0)
            p_min = std::min(p_min, pt.power_w);
    std::vector<double> x, y;
    for (const auto& pt : sweep.points) {
        if (pt.ok && pt.power_w > 0.0 && pt.power_w <= 10.0 * p_min * (1.0 + 1e-12)) {
            x.push_back(pt.power_w);
            y.push_back(units::db_to_linear(pt.gain_db) - 1.0);
        }
    }
    const LinearFit fit = fit_line(x, y);
    sweep.low_gain_slope = fit.slope;
    sweep.low_gain_r2 = fit.r2;
    return sweep;
}

SweepResult GainSweep::to_sweep_result() const
{
    SweepResult r;
    auto& regime_col = r.add_column("regime").values;
    auto& fp = r.add_column("f_pump_Hz").values;
    auto& fs = r.add_column("f_signal_Hz").values;
    auto& watts = r.add_column("pump_W").values;
    auto& dbm = r.add_column("pump_dBm").values;
    auto& amp = r.add_column("a_pump").values;
    auto& gain = r.add_column("gain_dB").values;
    auto& status = r.add_column("status").values;
    for (const auto& pt : points) {
        regime_col.emplace_back(to_string(regime));
        fp.emplace_back(f_pump);
        fs.emplace_back(f_signal);
        watts.emplace_back(pt.power_w);
        dbm.emplace_back(units::watts_to_dbm(pt.power_w));
        amp.emplace_back(pt.a_pump);
        gain.emplace_back(pt.gain_db);
        status.emplace_back(pt.ok ? std::string("ok") : pt.error);
    }
    const std::string prefix = regime == Regime::degenerate ? "degenerate" : "non_degenerate";
    r.set_meta(prefix + "_low_gain_slope_per_W", format_double(low_gain_slope));
    r.set_meta(prefix + "_low_gain_r2", format_double(low_gain_r2));
    return r;
}

}  // namespace qrad::jtwpa
