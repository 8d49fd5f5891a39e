#include <array>
#include <limits>
#include <thread>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "parallel.hpp"
#include "qrad/errors.hpp"
#include "qrad/gaussian_state.hpp"
#include "qrad/qi_detection.hpp"

namespace qrad::qi {

namespace {

using Matrix4 = Eigen::Matrix4d;

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial)
{
    return splitmix64(splitmix64(seed) ^ splitmix64(trial + 0x632be59bd9b4e019ULL));
}

// Quadratic form of x_R x_I - p_R p_I over (x_R, p_R, x_I, p_I), with the
// return quadratures rotated by phase first.
Matrix4 correlator(double phase)
{
    Matrix4 q = Matrix4::Zero();
    q(0, 2) = q(2, 0) = 0.5;
    q(1, 3) = q(3, 1) = -0.5;
    if (phase == 0.0)
        return q;
    Matrix4 rot = Matrix4::Identity();
    const double c = std::cos(phase), s = std::sin(phase);
    rot(0, 0) = c;
    rot(0, 1) = s;
    rot(1, 0) = -s;
    rot(1, 1) = c;
    return rot.transpose() * q * rot;
}

// One hypothesis: covariance factor and the spectrum of L^T Q L.
struct Hypothesis {
    Matrix4 chol;
    std::array<double, 4> weights{};
    double mean_per_mode = 0.0;

    Hypothesis(const Matrix4& cov, const Matrix4& q)
    {
        chol = cov.llt().matrixL();
        Eigen::SelfAdjointEigenSolver<Matrix4> solver(chol.transpose() * q * chol, Eigen::EigenvaluesOnly);
        for (int k = 0; k < 4; ++k)
            weights[static_cast<std::size_t>(k)] = solver.eigenvalues()[k];
        mean_per_mode = (q * cov).trace();
    }
};

class StatisticSampler {
public:
    StatisticSampler(const Hypothesis& h, const Matrix4& q, std::int64_t modes, Sampling sampling)
        : h_(h), q_(q), modes_(modes), sampling_(sampling),
          chi2_(0.5 * static_cast<double>(modes), 2.0)
    {
    }

    double draw(std::mt19937_64& gen)
    {
        chi2_.reset();
        normal_.reset();
        if (sampling_ == Sampling::chi_square) {
            double z = 0.0;
            for (double w : h_.weights)
                z += w * chi2_(gen);
            return z;
        }
        double z = 0.0;
        Eigen::Vector4d u;
        for (std::int64_t m = 0; m < modes_; ++m) {
            for (int k = 0; k < 4; ++k)
                u[k] = normal_(gen);
            const Eigen::Vector4d v = h_.chol * u;
            z += v.dot(q_ * v);
        }
        return z;
    }

private:
    const Hypothesis& h_;
    const Matrix4& q_;
    std::int64_t modes_;
    Sampling sampling_;
    std::gamma_distribution<double> chi2_;
    std::normal_distribution<double> normal_;
};

}  // namespace

MonteCarloReport monte_carlo_phase_conjugate(const QIScenario& scn, const MonteCarloOptions& opts)
{
    validate(scn);
    if (opts.trials < kMinTrials)
        throw DomainError("Monte-Carlo needs at least 1000 trials");

    const auto source = gaussian::make_tmsv(scn.n_s);
    const Matrix4 present = gaussian::apply_return_channel(source, scn.eta, scn.n_b).cov();
    const Matrix4 absent =
        gaussian::tensor(gaussian::make_thermal(scn.n_b), gaussian::reduce(source, 1)).cov();

    const Matrix4 q = correlator(opts.phase.value_or(0.0));
    const Hypothesis h0(absent, q);
    const Hypothesis h1(present, q);

    const double m = static_cast<double>(scn.modes);
    MonteCarloReport report;
    report.trials = opts.trials;
    report.mean_absent = m * h0.mean_per_mode;
    report.mean_present = m * h1.mean_per_mode;
    report.threshold = 0.5 * (report.mean_absent + report.mean_present);
    const bool present_above = report.mean_present >= report.mean_absent;
    const double threshold = report.threshold;

    struct Counts {
        std::int64_t false_alarms = 0;
        std::int64_t misses = 0;
    };
    const auto n = static_cast<std::size_t>(opts.trials);
    const unsigned threads = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.threads;
    std::vector<Counts> per_worker(threads);

    detail::parallel_chunks(n, threads, [&](std::size_t worker, std::size_t begin, std::size_t end) {
        StatisticSampler s0(h0, q, scn.modes, opts.sampling);
        StatisticSampler s1(h1, q, scn.modes, opts.sampling);
        Counts c;
        for (std::size_t t = begin; t < end; ++t) {
            std::mt19937_64 gen(trial_seed(opts.seed, t));
            const double z0 = s0.draw(gen);
            const double z1 = s1.draw(gen);
            const bool says_present_0 = present_above ? z0 > threshold : z0 < threshold;
            const bool says_present_1 = present_above ? z1 > threshold : z1 < threshold;
            c.false_alarms += says_present_0 ? 1 : 0;
            c.misses += says_present_1 ? 0 : 1;
        }
        per_worker[worker] = c;
    });

    for (const auto& c : per_worker) {
        report.false_alarms += c.false_alarms;
        report.misses += c.misses;
    }

    const double trials = static_cast<double>(opts.trials);
    auto& est = report.estimate;
    est.p_false = static_cast<double>(report.false_alarms) / trials;
    est.p_miss = static_cast<double>(report.misses) / trials;
    est.p_error = p_error_convex(scn.lambda_prior, est.p_false, est.p_miss);
    est.exponent = est.p_error > 0.0 ? -std::log(est.p_error) : std::numeric_limits<double>::infinity();

    report.p_false_ci = wilson_interval(report.false_alarms, opts.trials);
    report.p_miss_ci = wilson_interval(report.misses, opts.trials);
    const double lam = scn.lambda_prior;
    report.p_error_ci = {lam * report.p_false_ci.lo + (1.0 - lam) * report.p_miss_ci.lo,
                         lam * report.p_false_ci.hi + (1.0 - lam) * report.p_miss_ci.hi};

    constexpr std::int64_t kMinEvents = 10;
    report.low_count_warning = (lam > 0.0 && report.false_alarms < kMinEvents) ||
                               (lam < 1.0 && report.misses < kMinEvents);
    return report;
}

}  // namespace qrad::qi
