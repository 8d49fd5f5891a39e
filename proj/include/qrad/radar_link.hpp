#pragma once

// Link-budget arithmetic: mode count M = T B, transmit power P = n h nu B,
// Friis noise cascade, and end-to-end detection error at the resulting M.

#include <cstdint>
#include <vector>

#include "qrad/qi_detection.hpp"

namespace qrad::link {

// Reference source bandwidth of a resonant JPA ("tens of MHz" class).
inline constexpr double kJpaReferenceBandwidth = 10.0e6;

struct LinkBudget {
    double bandwidth = 0.0;         // Hz
    double integration_time = 0.0;  // s
    double center_frequency = 0.0;  // Hz
    double photons_per_mode = 1.0;
    std::int64_t modes = 1;
    double transmit_power_w = 0.0;
    double transmit_power_dbm = 0.0;
};

// floor(T B) with a minimum of 1. Products within 1e-9 relative of an integer
// snap to it so decimal inputs such as 1 ms x 10 MHz give exactly 10^4.
std::int64_t independent_modes(double integration_time, double bandwidth);

double transmit_power(double frequency, double bandwidth, double photons_per_mode = 1.0);

// Exact ratio of two transmit powers, computed from the factor ratios.
double transmit_power_ratio(const LinkBudget& a, const LinkBudget& b);

LinkBudget make_link_budget(double bandwidth, double integration_time, double center_frequency,
                            double photons_per_mode = 1.0);

struct AmplifierStage {
    double gain = 1.0;               // linear power ratio
    double noise_temperature = 0.0;  // K

    static AmplifierStage from_db(double gain_db, double noise_temperature);
};

struct CascadeResult {
    double total_gain = 1.0;
    double noise_temperature = 0.0;
};

CascadeResult friis_cascade(const std::vector<AmplifierStage>& stages);

enum class Source { quantum, classical };

struct LinkErrorReport {
    std::int64_t modes = 1;
    Source selected = Source::quantum;
    qi::ErrorReport quantum;
    qi::ErrorReport classical;

    const qi::ErrorReport& selected_report() const { return selected == Source::quantum ? quantum : classical; }
};

// scenario.modes is replaced by the link's mode count.
LinkErrorReport end_to_end_error(const qi::QIScenario& scenario, const LinkBudget& link, Source source);

}  // namespace qrad::link
