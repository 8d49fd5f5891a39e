#include "qrad/gaussian_state.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qrad/errors.hpp"

namespace qrad::gaussian {

namespace {

void require_photons(double n, const char* name)
{
    if (!std::isfinite(n) || n < 0.0) {
        std::ostringstream msg;
        msg << name << " must be finite and >= 0, got " << n;
        throw DomainError(msg.str());
    }
}

}  // namespace

std::string to_string(ModeLabel label)
{
    switch (label) {
    case ModeLabel::signal: return "signal";
    case ModeLabel::idler: return "idler";
    case ModeLabel::return_mode: return "return";
    case ModeLabel::background: return "background";
    }
    return "unknown";
}

GaussianState::GaussianState(CovMatrix cov, MeanVector mean, std::vector<ModeLabel> labels)
    : cov_(std::move(cov)), mean_(std::move(mean)), labels_(std::move(labels))
{
    const auto n = static_cast<Eigen::Index>(2 * labels_.size());
    if (labels_.empty() || labels_.size() > 2)
        throw InvalidStateError("only one- and two-mode states are supported");
    if (cov_.rows() != n || cov_.cols() != n || mean_.size() != n)
        throw InvalidStateError("covariance/mean dimensions do not match the mode count");
    if (!cov_.allFinite() || !mean_.allFinite())
        throw InvalidStateError("covariance or mean has non-finite entries");

    const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale)
        throw InvalidStateError("covariance is not symmetric");
    cov_ = 0.5 * (cov_ + cov_.transpose()).eval();

    if (cov_.llt().info() != Eigen::Success)
        throw InvalidStateError("covariance is not positive definite");
    const auto nu = symplectic_eigenvalues(cov_);
    if (nu.front() < 1.0 - kSymplecticTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "covariance violates the uncertainty principle: smallest symplectic eigenvalue "
            << nu.front();
        throw InvalidStateError(msg.str());
    }
}

Eigen::Matrix2d GaussianState::block(std::size_t i, std::size_t j) const
{
    if (i >= modes() || j >= modes())
        throw DomainError("mode index out of range");
    return cov_.block<2, 2>(static_cast<Eigen::Index>(2 * i), static_cast<Eigen::Index>(2 * j));
}

CovMatrix symplectic_form(std::size_t modes)
{
    const auto n = static_cast<Eigen::Index>(2 * modes);
    CovMatrix omega = CovMatrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; k += 2) {
        omega(k, k + 1) = 1.0;
        omega(k + 1, k) = -1.0;
    }
    return omega;
}

GaussianState make_tmsv(double n_s)
{
    require_photons(n_s, "N_s");
    const double diag = 2.0 * n_s + 1.0;
    const double cross = 2.0 * std::sqrt(n_s * (n_s + 1.0));

    CovMatrix cov = CovMatrix::Zero(4, 4);
    cov.diagonal().setConstant(diag);
    cov(0, 2) = cov(2, 0) = cross;
    cov(1, 3) = cov(3, 1) = -cross;
    return GaussianState(std::move(cov), MeanVector::Zero(4), {ModeLabel::signal, ModeLabel::idler});
}

SchmidtDistribution tmsv_schmidt(double n_s, std::size_t n_max)
{
    require_photons(n_s, "N_s");
    SchmidtDistribution dist;
    dist.n_max = n_max;
    dist.probs.resize(n_max + 1);

    // Geometric with ratio q = N/(N+1); the tail beyond n_max is q^(n_max+1).
    const double q = n_s / (n_s + 1.0);
    double p = 1.0 / (n_s + 1.0);
    for (std::size_t n = 0; n <= n_max; ++n) {
        dist.probs[n] = p;
        p *= q;
    }
    dist.tail_mass = std::pow(q, static_cast<double>(n_max + 1));
    return dist;
}

GaussianState make_thermal(double n_b, ModeLabel label)
{
    require_photons(n_b, "N_B");
    CovMatrix cov = CovMatrix::Identity(2, 2) * (2.0 * n_b + 1.0);
    return GaussianState(std::move(cov), MeanVector::Zero(2), {label});
}

GaussianState tensor(const GaussianState& a, const GaussianState& b)
{
    if (a.modes() + b.modes() > 2)
        throw DomainError("tensor product would exceed two modes");
    CovMatrix cov = CovMatrix::Zero(4, 4);
    cov.topLeftCorner(2, 2) = a.cov();
    cov.bottomRightCorner(2, 2) = b.cov();
    MeanVector mean(4);
    mean << a.mean(), b.mean();
    return GaussianState(std::move(cov), std::move(mean), {a.labels()[0], b.labels()[0]});
}

GaussianState reduce(const GaussianState& state, std::size_t mode)
{
    if (mode >= state.modes())
        throw DomainError("mode index out of range");
    const auto k = static_cast<Eigen::Index>(2 * mode);
    CovMatrix cov = state.cov().block(k, k, 2, 2);
    MeanVector mean = state.mean().segment(k, 2);
    return GaussianState(std::move(cov), std::move(mean), {state.labels()[mode]});
}

GaussianState apply_return_channel(const GaussianState& state, double eta, double n_b)
{
    if (!(eta >= 0.0 && eta <= 1.0))
        throw DomainError("reflectance eta must lie in [0, 1]");
    require_photons(n_b, "N_B");

    CovMatrix cov = state.cov();
    MeanVector mean = state.mean();
    const double t = std::sqrt(eta);
    const double bath = (1.0 - eta) * (2.0 * n_b + 1.0);

    cov.topLeftCorner(2, 2) = eta * cov.topLeftCorner(2, 2) + bath * Eigen::Matrix2d::Identity();
    if (state.modes() == 2) {
        cov.topRightCorner(2, 2) *= t;
        cov.bottomLeftCorner(2, 2) *= t;
    }
    mean.head(2) *= t;

    auto labels = state.labels();
    labels[0] = ModeLabel::return_mode;
    return GaussianState(std::move(cov), std::move(mean), std::move(labels));
}

std::vector<double> symplectic_eigenvalues(const CovMatrix& cov)
{
    const auto modes = static_cast<std::size_t>(cov.rows() / 2);
    const CovMatrix omega = symplectic_form(modes);
    // Omega * cov has eigenvalues +-i nu_k.
    Eigen::EigenSolver<CovMatrix> solver(omega * cov, false);
    std::vector<double> all;
    for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k)
        all.push_back(std::abs(solver.eigenvalues()[k]));
    std::sort(all.begin(), all.end());

    std::vector<double> nu;
    for (std::size_t k = 0; k + 1 < all.size(); k += 2)
        nu.push_back(0.5 * (all[k] + all[k + 1]));
    return nu;
}

std::vector<double> symplectic_eigenvalues(const GaussianState& state)
{
    return symplectic_eigenvalues(state.cov());
}

CovMatrix partial_transpose(const GaussianState& state)
{
    if (state.modes() != 2)
        throw DomainError("partial transpose needs a two-mode state");
    CovMatrix flipped = state.cov();
    flipped.row(3) *= -1.0;
    flipped.col(3) *= -1.0;
    return flipped;
}

double log_negativity(const GaussianState& state)
{
    const auto nu = symplectic_eigenvalues(partial_transpose(state));
    return std::max(0.0, -std::log(nu.front()));
}

double purity(const GaussianState& state)
{
    return 1.0 / std::sqrt(state.cov().determinant());
}

double mean_photon(const GaussianState& state, std::size_t mode)
{
    if (mode >= state.modes())
        throw DomainError("mode index out of range");
    const auto k = static_cast<Eigen::Index>(2 * mode);
    const double trace = state.cov()(k, k) + state.cov()(k + 1, k + 1);
    const double displacement = state.mean().segment(k, 2).squaredNorm();
    return (trace + displacement) / 4.0 - 0.5;
}

}  // namespace qrad::gaussian
