#pragma once

// Error probabilities of classical and entangled (TMSV) illumination.
//
// Closed forms are applied per mode and the exponent scales linearly with the
// number M of independent signal-idler pairs:
//   P_cl   = exp[-M eta N_s (sqrt(N_B + 1) - sqrt(N_B))^2]
//   P_tmsv = exp[-M eta N_s / N_B]
// N_s is the mean photon number per mode. No 1/2 prefactor unless requested.

#include <cstdint>
#include <optional>

namespace qrad::qi {

struct QIScenario {
    double eta = 0.0;
    double n_s = 0.0;
    double n_b = 0.0;
    double lambda_prior = 0.5;
    std::int64_t modes = 1;
    bool half_prefactor = false;
};

// Throws DomainError if any field is outside its range.
void validate(const QIScenario& scn);

struct ErrorReport {
    double p_false = 0.0;
    double p_miss = 0.0;
    double p_error = 0.0;
    double exponent = 0.0;
    bool clamped = false;
};

double p_error_convex(double lambda_prior, double p_false, double p_miss);

// Per-mode error exponents.
double classical_exponent_per_mode(const QIScenario& scn);
double tmsv_exponent_per_mode(const QIScenario& scn);

double p_error_classical(const QIScenario& scn);
double p_error_tmsv(const QIScenario& scn);

// Same values with the exponent and clamp flag attached. p_false and p_miss
// carry the symmetric value p_error.
ErrorReport classical_report(const QIScenario& scn);
ErrorReport tmsv_report(const QIScenario& scn);

// Ratio of the TMSV to classical exponent, (sqrt(N_B+1) + sqrt(N_B))^2 / N_B.
double advantage_exponent_ratio(double n_b);
double advantage_db(double n_b);

// Smallest M with p_error <= target_pe; scn.modes is ignored.
std::int64_t required_modes(const QIScenario& scn, double target_pe, bool quantum);

enum class Sampling { chi_square, per_mode };

struct MonteCarloOptions {
    std::int64_t trials = 100000;
    std::uint64_t seed = 0;
    std::optional<double> phase;  // return-mode rotation before correlation
    Sampling sampling = Sampling::chi_square;
    unsigned threads = 0;  // 0: hardware concurrency
};

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

struct MonteCarloReport {
    ErrorReport estimate;
    Interval p_false_ci;
    Interval p_miss_ci;
    Interval p_error_ci;
    std::int64_t trials = 0;
    std::int64_t false_alarms = 0;
    std::int64_t misses = 0;
    double threshold = 0.0;
    double mean_absent = 0.0;
    double mean_present = 0.0;
    bool low_count_warning = false;
};

inline constexpr std::int64_t kMinTrials = 1000;

// Wilson score interval at 95% confidence.
Interval wilson_interval(std::int64_t successes, std::int64_t trials);

// Phase-conjugate receiver: statistic sum_m (x_R x_I - p_R p_I), thresholded at
// the midpoint of its two conditional means. Deterministic given the seed.
MonteCarloReport monte_carlo_phase_conjugate(const QIScenario& scn, const MonteCarloOptions& opts);

}  // namespace qrad::qi
