#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "qrad/constants.hpp"
#include "qrad/errors.hpp"
#include "qrad/jtwpa.hpp"
#include "qrad/units.hpp"

namespace qrad::jtwpa {

namespace {

using cplx = std::complex<double>;
using State = std::array<cplx, 3>;  // pump, signal, idler

constexpr cplx I{0.0, 1.0};

State operator+(const State& a, const State& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
State operator*(double s, const State& a) { return {s * a[0], s * a[1], s * a[2]}; }

bool finite(const State& y)
{
    return std::all_of(y.begin(), y.end(), [](const cplx& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

// Right-hand side of the three-wave-mixing equations. Coupling weights
// w_j = f_j / sqrt(f_s f_i) make |A|^2 a power and keep w_s w_i = 1, so the
// undepleted gain exponent is g * |A_p| irrespective of the frequency split.
struct ThreeWaveMixing {
    double g = 0.0;
    double dk = 0.0;
    double w_p = 1.0, w_s = 1.0, w_i = 1.0;
    bool degenerate = false;

    State operator()(double n, const State& y) const
    {
        const cplx e = std::polar(1.0, dk * n);
        const cplx& ap = y[0];
        const cplx& as = y[1];
        const cplx& ai = y[2];
        if (degenerate) {
            // One field; each pump photon converts into two signal photons.
            const cplx ds = I * g * ap * std::conj(as) * e;
            const cplx dp = I * g * (0.5 * w_p) * as * as * std::conj(e);
            return {dp, ds, ds};
        }
        return {I * g * w_p * as * ai * std::conj(e),
                I * g * w_s * ap * std::conj(ai) * e,
                I * g * w_i * ap * std::conj(as) * e};
    }
};

State rk4_step(const ThreeWaveMixing& f, double n, const State& y, double h)
{
    const State k1 = f(n, y);
    const State k2 = f(n + 0.5 * h, y + (0.5 * h) * k1);
    const State k3 = f(n + 0.5 * h, y + (0.5 * h) * k2);
    const State k4 = f(n + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void check_band(const SquidCellParams& params, double phi_dc, double f, const char* tone)
{
    const double cutoff = cutoff_frequency(params, phi_dc);
    if (!(f > 0.0) || f >= cutoff) {
        std::ostringstream msg;
        msg << tone << " frequency " << f << " Hz outside the propagating band (0, " << cutoff << ") Hz";
        throw EvanescentBandError(msg.str(), cutoff);
    }
}

double output_signal_power(const FieldProfile& p) { return std::norm(p.output().signal); }

}  // namespace

std::string to_string(Regime regime)
{
    return regime == Regime::degenerate ? "degenerate" : "non-degenerate";
}

Frequencies mixing_frequencies(const PumpConfig& pump, double f_signal)
{
    if (!(pump.f_pump > 0.0) || !(f_signal > 0.0))
        throw DomainError("pump and signal frequencies must be > 0");
    Frequencies f{pump.f_pump, f_signal, pump.f_pump - f_signal};
    if (pump.regime == Regime::degenerate) {
        if (std::abs(pump.f_pump - 2.0 * f_signal) > 1e-12 * pump.f_pump)
            throw UnsupportedRegimeError("degenerate regime needs f_pump = 2 f_signal");
        f.idler = f.signal;
    }
    if (!(f.idler > 0.0))
        throw DomainError("signal frequency must lie below the pump frequency");
    return f;
}

double phase_mismatch(const SquidCellParams& params, const PumpConfig& pump, double f_signal)
{
    const Frequencies f = mixing_frequencies(pump, f_signal);
    check_band(params, pump.phi_dc, f.pump, "pump");
    check_band(params, pump.phi_dc, f.signal, "signal");
    check_band(params, pump.phi_dc, f.idler, "idler");
    return dispersion(params, pump.phi_dc, f.pump) - dispersion(params, pump.phi_dc, f.signal) -
           dispersion(params, pump.phi_dc, f.idler);
}

FieldProfile cme_propagate(const SquidCellParams& params, const PumpConfig& pump, double f_signal,
                           double a_signal_in, const CmeOptions& opts)
{
    validate(params);
    if (!(pump.a_pump >= 0.0) || !std::isfinite(pump.a_pump))
        throw DomainError("pump amplitude must be finite and >= 0");
    if (!(a_signal_in >= 0.0) || !std::isfinite(a_signal_in))
        throw DomainError("signal amplitude must be finite and >= 0");
    if (opts.steps_per_cell < 1)
        throw DomainError("steps_per_cell must be >= 1");

    FieldProfile profile;
    profile.regime = pump.regime;
    profile.frequencies = mixing_frequencies(pump, f_signal);
    const Frequencies& nu = profile.frequencies;

    double dk = phase_mismatch(params, pump, f_signal);
    const MixingCoefficients mix = mixing_coefficients(params, pump.phi_dc);
    if (opts.kerr_correction) {
        // Pump self-phase minus cross-phase on signal and idler.
        const double kp = dispersion(params, pump.phi_dc, nu.pump);
        const double ks = dispersion(params, pump.phi_dc, nu.signal);
        const double ki = dispersion(params, pump.phi_dc, nu.idler);
        dk += mix.c4 * pump.a_pump * pump.a_pump / 8.0 * (kp - 2.0 * (ks + ki));
    }
    if (opts.force_phase_match)
        dk = 0.0;
    profile.phase_mismatch = dk;

    if (pump.a_pump > 0.0 && a_signal_in >= 0.1 * pump.a_pump)
        profile.warnings.push_back("signal amplitude is not small against the pump; depletion likely");

    ThreeWaveMixing rhs;
    rhs.g = opts.kappa * mix.c3;
    rhs.dk = dk;
    rhs.degenerate = pump.regime == Regime::degenerate;
    const double norm = std::sqrt(nu.signal * nu.idler);
    rhs.w_p = nu.pump / norm;
    rhs.w_s = nu.signal / norm;
    rhs.w_i = nu.idler / norm;

    const cplx signal_in = std::polar(a_signal_in, opts.signal_phase);
    State y{cplx(pump.a_pump, 0.0), signal_in, rhs.degenerate ? signal_in : cplx{}};

    const std::size_t cells = params.n_cells;
    const int sub = opts.steps_per_cell;
    const double h = 1.0 / sub;
    const double pump_floor = opts.depletion_guard * pump.a_pump * pump.a_pump;

    profile.positions.reserve(cells + 1);
    profile.amplitudes.reserve(cells + 1);
    profile.positions.push_back(0.0);
    profile.amplitudes.push_back({y[0], y[1], y[2]});

    for (std::size_t cell = 0; cell < cells; ++cell) {
        for (int s = 0; s < sub; ++s) {
            const double n = static_cast<double>(cell) + s * h;
            State next = rk4_step(rhs, n, y, h);
            if (!finite(next)) {
                std::ostringstream msg;
                msg << "coupled-mode integration diverged after position " << n;
                throw IntegrationDivergedError(msg.str(), n);
            }
            y = next;
            if (pump.a_pump > 0.0 && std::norm(y[0]) < pump_floor) {
                const double at = n + h;
                std::ostringstream msg;
                msg << "pump depleted below " << opts.depletion_guard * 100.0 << "% of its input power at cell " << at;
                throw PumpDepletedError(msg.str(), at);
            }
        }
        profile.positions.push_back(static_cast<double>(cell + 1));
        profile.amplitudes.push_back({y[0], y[1], rhs.degenerate ? y[1] : y[2]});
    }
    return profile;
}

double manley_rowe_residual(const FieldProfile& profile)
{
    const FieldSample& in = profile.input();
    const FieldSample& out = profile.output();
    const Frequencies& nu = profile.frequencies;

    const double dn_p = -(std::norm(out.pump) - std::norm(in.pump)) / nu.pump;
    const double dn_s = (std::norm(out.signal) - std::norm(in.signal)) / nu.signal;
    double dn_i = (std::norm(out.idler) - std::norm(in.idler)) / nu.idler;
    double dn_pump_pairs = dn_p;
    if (profile.regime == Regime::degenerate) {
        // Signal and idler share one field: two photons per pump photon.
        dn_i = dn_s;
        dn_pump_pairs = 2.0 * dn_p;
    }

    // Floor the scale at the rounding level of the stored photon fluxes.
    const double flux_scale = std::max({std::norm(in.pump) / nu.pump, std::norm(in.signal) / nu.signal,
                                        std::norm(in.idler) / nu.idler});
    const double scale = std::max({std::abs(dn_s), std::abs(dn_i), std::abs(dn_pump_pairs), 1e-14 * flux_scale,
                                   std::numeric_limits<double>::min()});
    return std::max({std::abs(dn_s - dn_i), std::abs(dn_s - dn_pump_pairs), std::abs(dn_i - dn_pump_pairs)}) / scale;
}

double pump_on_off_gain(const SquidCellParams& params, const PumpConfig& pump, double f_signal, double a_signal_in,
                        const CmeOptions& opts)
{
    if (!(a_signal_in > 0.0))
        throw DomainError("pump-on/off gain needs a nonzero signal");
    PumpConfig off = pump;
    off.a_pump = 0.0;
    const double on_power = output_signal_power(cme_propagate(params, pump, f_signal, a_signal_in, opts));
    const double off_power = output_signal_power(cme_propagate(params, off, f_signal, a_signal_in, opts));
    return units::linear_to_db(on_power / off_power);
}

StepCheckedGain pump_on_off_gain_checked(const SquidCellParams& params, const PumpConfig& pump, double f_signal,
                                         double a_signal_in, const CmeOptions& opts)
{
    StepCheckedGain r;
    r.gain_db = pump_on_off_gain(params, pump, f_signal, a_signal_in, opts);
    CmeOptions fine = opts;
    fine.steps_per_cell = 2 * opts.steps_per_cell;
    r.halved_step_gain_db = pump_on_off_gain(params, pump, f_signal, a_signal_in, fine);
    r.delta_db = r.halved_step_gain_db - r.gain_db;
    r.flagged = !(std::abs(r.delta_db) < kStepHalvingTolerance);
    return r;
}

double undepleted_gain(double coupling, double dk, double cells)
{
    const double g2 = coupling * coupling;
    const double gamma2 = g2 - 0.25 * dk * dk;
    if (g2 == 0.0)
        return 1.0;
    if (gamma2 > 0.0) {
        const double gamma = std::sqrt(gamma2);
        const double s = std::sinh(gamma * cells);
        return 1.0 + g2 / gamma2 * s * s;
    }
    if (gamma2 == 0.0)
        return 1.0 + g2 * cells * cells;
    const double mu = std::sqrt(-gamma2);
    const double s = std::sin(mu * cells);
    return 1.0 + g2 / (-gamma2) * s * s;
}

QuadratureGains dpa_quadrature_gains(const SquidCellParams& params, const PumpConfig& pump, double f_signal,
                                     double theta, double a_signal_in, const CmeOptions& opts)
{
    if (pump.regime != Regime::degenerate)
        throw UnsupportedRegimeError("quadrature gains need the degenerate regime");
    if (!(a_signal_in > 0.0))
        throw DomainError("quadrature gains need a nonzero probe signal");

    auto homodyne_db = [&](double phase) {
        CmeOptions probe = opts;
        probe.signal_phase = phase;
        const auto profile = cme_propagate(params, pump, f_signal, a_signal_in, probe);
        const double x = (profile.output().signal * std::polar(1.0, -phase)).real() / a_signal_in;
        return units::linear_to_db(x * x);
    };
    return {homodyne_db(theta), homodyne_db(theta + 0.5 * constants::pi)};
}

}  // namespace qrad::jtwpa
