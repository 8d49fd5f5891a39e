#include "qrad/qi_detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qrad/errors.hpp"

namespace qrad::qi {

namespace {

bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

ErrorReport report_from_exponent(double exponent, bool half_prefactor)
{
    ErrorReport r;
    r.exponent = exponent;
    double p = std::exp(-exponent);
    if (half_prefactor)
        p *= 0.5;
    if (p > 1.0 || p < 0.0 || !std::isfinite(p)) {
        r.clamped = true;
        p = std::clamp(std::isfinite(p) ? p : 1.0, 0.0, 1.0);
    }
    r.p_error = r.p_false = r.p_miss = p;
    return r;
}

}  // namespace

void validate(const QIScenario& scn)
{
    std::ostringstream msg;
    if (!in_unit_interval(scn.eta))
        msg << "eta must lie in [0, 1], got " << scn.eta;
    else if (!std::isfinite(scn.n_s) || scn.n_s < 0.0)
        msg << "n_s must be finite and >= 0, got " << scn.n_s;
    else if (!std::isfinite(scn.n_b) || scn.n_b < 0.0)
        msg << "n_b must be finite and >= 0, got " << scn.n_b;
    else if (!in_unit_interval(scn.lambda_prior))
        msg << "lambda must lie in [0, 1], got " << scn.lambda_prior;
    else if (scn.modes < 1)
        msg << "modes must be >= 1, got " << scn.modes;
    else
        return;
    throw DomainError(msg.str());
}

double p_error_convex(double lambda_prior, double p_false, double p_miss)
{
    if (!in_unit_interval(lambda_prior) || !in_unit_interval(p_false) || !in_unit_interval(p_miss))
        throw DomainError("prior and probabilities must lie in [0, 1]");
    return lambda_prior * p_false + (1.0 - lambda_prior) * p_miss;
}

double classical_exponent_per_mode(const QIScenario& scn)
{
    validate(scn);
    // sqrt(N+1) - sqrt(N) written as 1/(sqrt(N+1) + sqrt(N)) to avoid cancellation.
    const double gap = 1.0 / (std::sqrt(scn.n_b + 1.0) + std::sqrt(scn.n_b));
    return scn.eta * scn.n_s * gap * gap;
}

double tmsv_exponent_per_mode(const QIScenario& scn)
{
    validate(scn);
    if (scn.n_b <= 0.0)
        throw DomainError("TMSV error formula needs n_b > 0 (it is the N_B >> 1 asymptote); "
                          "use the classical formula, which is exact at n_b = 0");
    return scn.eta * scn.n_s / scn.n_b;
}

ErrorReport classical_report(const QIScenario& scn)
{
    const double exponent = static_cast<double>(scn.modes) * classical_exponent_per_mode(scn);
    return report_from_exponent(exponent, scn.half_prefactor);
}

ErrorReport tmsv_report(const QIScenario& scn)
{
    const double exponent = static_cast<double>(scn.modes) * tmsv_exponent_per_mode(scn);
    return report_from_exponent(exponent, scn.half_prefactor);
}

double p_error_classical(const QIScenario& scn) { return classical_report(scn).p_error; }

double p_error_tmsv(const QIScenario& scn) { return tmsv_report(scn).p_error; }

double advantage_exponent_ratio(double n_b)
{
    if (!(n_b > 0.0) || !std::isfinite(n_b))
        throw DomainError("advantage ratio needs finite n_b > 0");
    const double s = std::sqrt(n_b + 1.0) + std::sqrt(n_b);
    return s * s / n_b;
}

double advantage_db(double n_b) { return 10.0 * std::log10(advantage_exponent_ratio(n_b)); }

std::int64_t required_modes(const QIScenario& scn, double target_pe, bool quantum)
{
    if (!(target_pe > 0.0 && target_pe <= 1.0))
        throw DomainError("target error probability must lie in (0, 1]");
    QIScenario probe = scn;
    probe.modes = 1;
    const double per_mode = quantum ? tmsv_exponent_per_mode(probe) : classical_exponent_per_mode(probe);
    const double prefactor = scn.half_prefactor ? 0.5 : 1.0;
    if (prefactor <= target_pe)
        return 1;
    if (!(per_mode > 0.0))
        throw InfeasibleError("per-mode error exponent is zero (eta * n_s = 0); no mode count reaches the target");

    const double needed = std::log(prefactor / target_pe) / per_mode;
    if (needed > 9.0e18)
        throw InfeasibleError("required mode count overflows a 64-bit integer");
    auto m = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(needed)));

    auto pe = [&](std::int64_t modes) {
        probe.modes = modes;
        return quantum ? p_error_tmsv(probe) : p_error_classical(probe);
    };
    while (pe(m) > target_pe)
        ++m;
    while (m > 1 && pe(m - 1) <= target_pe)
        --m;
    return m;
}

Interval wilson_interval(std::int64_t successes, std::int64_t trials)
{
    if (trials <= 0)
        return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2n = z * z / n;
    const double centre = (p + z2n / 2.0) / (1.0 + z2n);
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2n / (4.0 * n)) / (1.0 + z2n);
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

}  // namespace qrad::qi
