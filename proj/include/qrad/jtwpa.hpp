#pragma once

// rf-SQUID traveling-wave parametric amplifier: cell electrics, LC-ladder
// dispersion, flux-tunable mixing strengths, three-wave-mixing coupled-mode
// propagation and the bias/pump sweeps built on it.

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qrad/sweep_result.hpp"

namespace qrad::jtwpa {

struct SquidCellParams {
    double c_g = 13.0e-15;   // ground capacitance, F
    double l_g = 45.0e-12;   // geometric inductance, H
    double c_j = 25.8e-15;   // junction capacitance, F
    double i_c = 1.5e-6;     // junction critical current, A
    std::size_t n_cells = 990;
    bool non_hysteretic = true;  // when set, validation rejects beta_L >= 1
};

// Fabricated device: 990 cells, C_g 13.0 fF, L_g 45 pH, C_J 25.8 fF, I_c 1.5 uA.
SquidCellParams reference_device();

void validate(const SquidCellParams& params);

double josephson_inductance(double i_c);
double beta_l(const SquidCellParams& params);
bool is_hysteretic(const SquidCellParams& params);

// l_g / (1 + beta_L cos phi). Requires beta_L < 1.
double cell_inductance(const SquidCellParams& params, double phi_dc);

struct MixingCoefficients {
    double c3 = 0.0;  // three-wave, odd in phi_dc
    double c4 = 0.0;  // four-wave (Kerr), even in phi_dc
};

// beta sin(phi) / (1 + beta cos phi)^2 and beta cos(phi) / (1 + beta cos phi)^2.
MixingCoefficients mixing_coefficients(const SquidCellParams& params, double phi_dc);

// Wavenumber in radians per cell: 2 asin(pi f sqrt(L_eff C_g)).
double dispersion(const SquidCellParams& params, double phi_dc, double f);
double characteristic_impedance(const SquidCellParams& params, double phi_dc);
double cutoff_frequency(const SquidCellParams& params, double phi_dc);
double plasma_frequency(const SquidCellParams& params);

enum class Regime { degenerate, non_degenerate };

std::string to_string(Regime regime);

struct PumpConfig {
    double f_pump = 13.4e9;  // Hz
    double a_pump = 0.0;     // input phase amplitude
    double phi_dc = 0.0;     // DC flux phase, rad, offsets included
    Regime regime = Regime::non_degenerate;
};

struct CmeOptions {
    double kappa = 1.0;          // coupling scale, g3 = kappa * c3
    int steps_per_cell = 1;
    bool force_phase_match = false;
    bool kerr_correction = false;  // adds the pump-induced Kerr phase mismatch
    double depletion_guard = 0.5;  // abort when |A_p|^2 falls below this fraction of its input
    double signal_phase = 0.0;     // phase of the injected signal, rad
};

struct Frequencies {
    double pump = 0.0;
    double signal = 0.0;
    double idler = 0.0;
};

struct FieldSample {
    std::complex<double> pump;
    std::complex<double> signal;
    std::complex<double> idler;  // equals signal in the degenerate regime
};

struct FieldProfile {
    std::vector<double> positions;  // cell index 0..n_cells
    std::vector<FieldSample> amplitudes;
    Frequencies frequencies;
    Regime regime = Regime::non_degenerate;
    double phase_mismatch = 0.0;  // rad per cell
    std::vector<std::string> warnings;

    const FieldSample& input() const { return amplitudes.front(); }
    const FieldSample& output() const { return amplitudes.back(); }
};

// Frequency bookkeeping for a pump/signal pair; idler = pump - signal.
Frequencies mixing_frequencies(const PumpConfig& pump, double f_signal);

// Phase mismatch k_p - k_s - k_i per cell (k_p - 2 k_s when degenerate).
double phase_mismatch(const SquidCellParams& params, const PumpConfig& pump, double f_signal);

// Integrates the three-wave-mixing coupled-mode equations along the line with
// classical fourth-order Runge-Kutta, one step per cell by default. Amplitudes
// are power-normalised: |A|^2 changes obey Manley-Rowe,
//   dP_s / f_s = dP_i / f_i = -dP_p / f_p.
FieldProfile cme_propagate(const SquidCellParams& params, const PumpConfig& pump, double f_signal,
                           double a_signal_in, const CmeOptions& opts = {});

// Largest relative mismatch among the Manley-Rowe photon-flux changes of a run.
double manley_rowe_residual(const FieldProfile& profile);

// 10 log10 of output signal power with the pump on over the same with it off.
double pump_on_off_gain(const SquidCellParams& params, const PumpConfig& pump, double f_signal,
                        double a_signal_in, const CmeOptions& opts = {});

struct StepCheckedGain {
    double gain_db = 0.0;
    double halved_step_gain_db = 0.0;
    double delta_db = 0.0;
    bool flagged = false;  // |delta| >= 0.01 dB
};

inline constexpr double kStepHalvingTolerance = 0.01;

StepCheckedGain pump_on_off_gain_checked(const SquidCellParams& params, const PumpConfig& pump,
                                         double f_signal, double a_signal_in, const CmeOptions& opts = {});

// Analytic signal gain with undepleted pump: 1 + (g/Gamma)^2 sinh^2(Gamma n),
// Gamma = sqrt(g^2 - (dk/2)^2), g = kappa c3 a_pump. Reduces to cosh^2(g n) at dk = 0.
double undepleted_gain(double coupling, double phase_mismatch, double cells);

struct QuadratureGains {
    double amp_db = 0.0;    // quadrature at theta
    double deamp_db = 0.0;  // quadrature at theta + pi/2
};

// Input phase of the amplified quadrature for a real pump at phase match.
inline constexpr double kAmplifiedQuadrature = 0.7853981633974483;  // pi/4

// Homodyne gains of quadratures theta and theta + pi/2 in the degenerate regime:
// inject A = a e^{i theta'} and measure (Re(A_out e^{-i theta'}) / a)^2.
QuadratureGains dpa_quadrature_gains(const SquidCellParams& params, const PumpConfig& pump, double f_signal,
                                     double theta, double a_signal_in = 1e-6, const CmeOptions& opts = {});

// Maps line power to dimensionless phase amplitude, a = sqrt(P Z_ref) / V0.
struct InputLine {
    double z_ref = 50.0;  // ohm
    double v0 = 1.0e-3;   // V

    double amplitude(double watts) const;
    double power(double amplitude) const;
};

// Bisection on kappa until the pump-on/off gain matches target within 0.05 dB.
// Throws InfeasibleError carrying the best gain reached when the target is
// beyond the depletion guard.
double calibrate_coupling(const SquidCellParams& params, double target_db, const PumpConfig& pump,
                          double f_signal, double a_signal_in, const CmeOptions& opts = {});

inline constexpr double kCalibrationTolerance = 0.05;

// I_DC -> phase 2 pi M_c I / Phi_0, plus the trapped-flux offset.
struct BiasMapping {
    double mutual_coupling = 3.291e-13;  // H; ~1 rad per mA
    double phi_offset = 0.0;             // rad

    double bias_phase(double current) const;
    double phi_dc(double current) const { return bias_phase(current) + phi_offset; }
};

struct BiasSweepOptions {
    std::optional<double> floor_dbm;
    std::optional<double> target_depth_db;  // floor = peak - depth when set
    InputLine line;
    CmeOptions cme;
    unsigned threads = 0;
};

struct BiasPoint {
    double bias = 0.0;        // A
    double bias_phase = 0.0;  // rad, offset excluded
    double phi_dc = 0.0;      // rad, offset included
    double idler_raw_dbm = 0.0;
    double idler_dbm = 0.0;   // max(floor, raw)
    bool at_floor = false;
    bool ok = true;
    std::string error;
};

struct BiasSweep {
    std::vector<BiasPoint> points;
    double floor_dbm = 0.0;
    double modulation_depth_db = 0.0;
    double min_bias = 0.0;        // A, root of c3 next to the lowest raw idler point
    double min_bias_phase = 0.0;  // rad
    std::size_t failures = 0;

    SweepResult to_sweep_result() const;
};

// Idler output power across a bias grid; pump.phi_dc is replaced per point.
BiasSweep bias_sweep_idler(const SquidCellParams& params, const PumpConfig& pump, double f_signal,
                           double signal_power_w, const std::vector<double>& biases, const BiasMapping& mapping,
                           const BiasSweepOptions& opts = {});

struct GainSweepSpec {
    Regime regime = Regime::non_degenerate;
    double f_signal = 9.0e9;
    double f_pump_non_degenerate = 13.4e9;  // degenerate pump is 2 f_signal
    double phi_dc = 1.5707963267948966;     // pure three-wave point
    double signal_power_w = 1e-15;
    InputLine line;
    CmeOptions cme;
    unsigned threads = 0;
};

struct GainPoint {
    double power_w = 0.0;
    double a_pump = 0.0;
    double gain_db = 0.0;
    bool ok = true;
    std::string error;
};

struct GainSweep {
    Regime regime = Regime::non_degenerate;
    double f_pump = 0.0;
    double f_signal = 0.0;
    std::vector<GainPoint> points;
    // Linear fit of (G - 1) against pump power over the first decade of nonzero powers.
    double low_gain_slope = 0.0;
    double low_gain_r2 = 0.0;

    SweepResult to_sweep_result() const;
};

PumpConfig gain_sweep_pump(const GainSweepSpec& spec, double power_w);

GainSweep gain_vs_pump_power(const SquidCellParams& params, const GainSweepSpec& spec,
                             const std::vector<double>& powers_w);

}  // namespace qrad::jtwpa
