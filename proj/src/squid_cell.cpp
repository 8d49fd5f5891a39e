#include <cmath>
#include <sstream>

#include "qrad/constants.hpp"
#include "qrad/errors.hpp"
#include "qrad/jtwpa.hpp"

namespace qrad::jtwpa {

namespace {

using constants::flux_quantum;
using constants::pi;

void require_single_valued(const SquidCellParams& params)
{
    const double beta = beta_l(params);
    if (beta >= 1.0) {
        std::ostringstream msg;
        msg << "beta_L = " << beta << " >= 1: hysteretic cell, flux response is multivalued";
        throw UnsupportedRegimeError(msg.str());
    }
}

}  // namespace

SquidCellParams reference_device() { return SquidCellParams{}; }

void validate(const SquidCellParams& params)
{
    const bool positive = params.c_g > 0.0 && params.l_g > 0.0 && params.c_j > 0.0 && params.i_c > 0.0 &&
                          std::isfinite(params.c_g) && std::isfinite(params.l_g) && std::isfinite(params.c_j) &&
                          std::isfinite(params.i_c);
    if (!positive)
        throw DomainError("cell capacitances, inductance and critical current must be finite and > 0");
    if (params.n_cells < 1)
        throw DomainError("line needs at least one cell");
    if (params.non_hysteretic && beta_l(params) >= 1.0) {
        std::ostringstream msg;
        msg << "cells labelled non-hysteretic but beta_L = " << beta_l(params) << " >= 1";
        throw DomainError(msg.str());
    }
}

double josephson_inductance(double i_c)
{
    if (!(i_c > 0.0) || !std::isfinite(i_c))
        throw DomainError("critical current must be finite and > 0");
    return flux_quantum / (2.0 * pi * i_c);
}

double beta_l(const SquidCellParams& params) { return params.l_g / josephson_inductance(params.i_c); }

bool is_hysteretic(const SquidCellParams& params) { return beta_l(params) >= 1.0; }

double cell_inductance(const SquidCellParams& params, double phi_dc)
{
    require_single_valued(params);
    return params.l_g / (1.0 + beta_l(params) * std::cos(phi_dc));
}

MixingCoefficients mixing_coefficients(const SquidCellParams& params, double phi_dc)
{
    require_single_valued(params);
    const double beta = beta_l(params);
    const double denom = 1.0 + beta * std::cos(phi_dc);
    const double scale = beta / (denom * denom);
    return {scale * std::sin(phi_dc), scale * std::cos(phi_dc)};
}

double cutoff_frequency(const SquidCellParams& params, double phi_dc)
{
    return 1.0 / (pi * std::sqrt(cell_inductance(params, phi_dc) * params.c_g));
}

double dispersion(const SquidCellParams& params, double phi_dc, double f)
{
    const double cutoff = cutoff_frequency(params, phi_dc);
    if (!(f > 0.0))
        throw DomainError("frequency must be > 0");
    if (f >= cutoff) {
        std::ostringstream msg;
        msg << "frequency " << f << " Hz is at or above the ladder cutoff " << cutoff << " Hz";
        throw EvanescentBandError(msg.str(), cutoff);
    }
    return 2.0 * std::asin(f / cutoff);
}

double characteristic_impedance(const SquidCellParams& params, double phi_dc)
{
    return std::sqrt(cell_inductance(params, phi_dc) / params.c_g);
}

double plasma_frequency(const SquidCellParams& params)
{
    return 1.0 / (2.0 * pi * std::sqrt(josephson_inductance(params.i_c) * params.c_j));
}

double InputLine::amplitude(double watts) const
{
    if (!(watts >= 0.0))
        throw DomainError("line power must be >= 0");
    return std::sqrt(watts * z_ref) / v0;
}

double InputLine::power(double amp) const { return (amp * v0) * (amp * v0) / z_ref; }

double BiasMapping::bias_phase(double current) const
{
    return 2.0 * pi * mutual_coupling * current / constants::flux_quantum;
}

}  // namespace qrad::jtwpa
