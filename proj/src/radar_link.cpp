#include "qrad/radar_link.hpp"

#include <cmath>
#include <sstream>

#include "qrad/constants.hpp"
#include "qrad/errors.hpp"
#include "qrad/units.hpp"

namespace qrad::link {

std::int64_t independent_modes(double integration_time, double bandwidth)
{
    if (!(integration_time > 0.0) || !(bandwidth > 0.0) || !std::isfinite(integration_time) ||
        !std::isfinite(bandwidth))
        throw DomainError("integration time and bandwidth must be finite and > 0");
    const double product = integration_time * bandwidth;
    if (product >= 9.2e18)
        throw DomainError("time-bandwidth product overflows the mode counter");
    const double nearest = std::round(product);
    const double modes = std::abs(product - nearest) <= 1e-9 * std::max(1.0, product) ? nearest : std::floor(product);
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(modes));
}

double transmit_power(double frequency, double bandwidth, double photons_per_mode)
{
    if (!(frequency > 0.0) || !(bandwidth >= 0.0) || !(photons_per_mode >= 0.0) || !std::isfinite(frequency) ||
        !std::isfinite(bandwidth) || !std::isfinite(photons_per_mode))
        throw DomainError("frequency must be > 0; bandwidth and photons per mode >= 0");
    return photons_per_mode * constants::planck * frequency * bandwidth;
}

double transmit_power_ratio(const LinkBudget& a, const LinkBudget& b)
{
    return (a.bandwidth / b.bandwidth) * (a.center_frequency / b.center_frequency) *
           (a.photons_per_mode / b.photons_per_mode);
}

LinkBudget make_link_budget(double bandwidth, double integration_time, double center_frequency,
                            double photons_per_mode)
{
    LinkBudget link;
    link.bandwidth = bandwidth;
    link.integration_time = integration_time;
    link.center_frequency = center_frequency;
    link.photons_per_mode = photons_per_mode;
    link.modes = independent_modes(integration_time, bandwidth);
    link.transmit_power_w = transmit_power(center_frequency, bandwidth, photons_per_mode);
    link.transmit_power_dbm = units::watts_to_dbm(link.transmit_power_w);
    return link;
}

AmplifierStage AmplifierStage::from_db(double gain_db, double noise_temperature)
{
    return {units::db_to_linear(gain_db), noise_temperature};
}

CascadeResult friis_cascade(const std::vector<AmplifierStage>& stages)
{
    if (stages.empty())
        throw DomainError("Friis cascade needs at least one stage");
    CascadeResult r;
    for (const auto& stage : stages) {
        if (!(stage.gain > 0.0) || !(stage.noise_temperature >= 0.0))
            throw DomainError("stage gain must be > 0 and noise temperature >= 0 K");
        r.noise_temperature += stage.noise_temperature / r.total_gain;
        r.total_gain *= stage.gain;
    }
    return r;
}

LinkErrorReport end_to_end_error(const qi::QIScenario& scenario, const LinkBudget& link, Source source)
{
    qi::QIScenario scn = scenario;
    scn.modes = link.modes;
    LinkErrorReport r;
    r.modes = link.modes;
    r.selected = source;
    r.classical = qi::classical_report(scn);
    r.quantum = qi::tmsv_report(scn);
    return r;
}

}  // namespace qrad::link
