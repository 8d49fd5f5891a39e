#pragma once

// One- and two-mode Gaussian states in the vacuum-variance-1 convention:
// quadratures ordered (x_1, p_1, x_2, p_2), cov(vacuum) = identity.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qrad::gaussian {

using CovMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;
using MeanVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;

inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kSymplecticTolerance = 1e-9;

enum class ModeLabel { signal, idler, return_mode, background };

std::string to_string(ModeLabel label);

class GaussianState {
public:
    // Validates symmetry and symplectic positivity; throws InvalidStateError otherwise.
    GaussianState(CovMatrix cov, MeanVector mean, std::vector<ModeLabel> labels);

    const CovMatrix& cov() const noexcept { return cov_; }
    const MeanVector& mean() const noexcept { return mean_; }
    const std::vector<ModeLabel>& labels() const noexcept { return labels_; }
    std::size_t modes() const noexcept { return labels_.size(); }

    // 2x2 block (row mode i, column mode j).
    Eigen::Matrix2d block(std::size_t i, std::size_t j) const;

private:
    CovMatrix cov_;
    MeanVector mean_;
    std::vector<ModeLabel> labels_;
};

struct SchmidtDistribution {
    std::vector<double> probs;
    std::size_t n_max = 0;
    double tail_mass = 0.0;
};

// Two-mode squeezed vacuum with mean photon number n_s per arm; mode 0 signal, mode 1 idler.
GaussianState make_tmsv(double n_s);

// Fock-basis Schmidt coefficients p_n = N^n / (N+1)^(n+1), truncated at n_max.
SchmidtDistribution tmsv_schmidt(double n_s, std::size_t n_max);

// Single-mode thermal state.
GaussianState make_thermal(double n_b, ModeLabel label = ModeLabel::background);

// Direct sum of two single-mode states.
GaussianState tensor(const GaussianState& a, const GaussianState& b);

// Marginal state of one mode.
GaussianState reduce(const GaussianState& state, std::size_t mode);

// Beamsplitter of reflectance eta mixing mode 0 with a thermal bath of n_b photons.
// Mode 0 becomes the return mode; the idler is untouched.
GaussianState apply_return_channel(const GaussianState& state, double eta, double n_b);

// Symplectic eigenvalues, ascending, from the spectrum of Omega * cov.
std::vector<double> symplectic_eigenvalues(const CovMatrix& cov);
std::vector<double> symplectic_eigenvalues(const GaussianState& state);

// Covariance with the momentum of mode 1 sign-flipped.
CovMatrix partial_transpose(const GaussianState& state);

// max(0, -ln nu_min) of the partially transposed covariance.
double log_negativity(const GaussianState& state);

double purity(const GaussianState& state);
double mean_photon(const GaussianState& state, std::size_t mode);

// Symplectic form of n modes.
CovMatrix symplectic_form(std::size_t modes);

}  // namespace qrad::gaussian
