#include <doctest.h>

#include <cmath>

#include "qrad/constants.hpp"
#include "qrad/errors.hpp"
#include "qrad/jtwpa.hpp"

using namespace qrad;
using namespace qrad::jtwpa;

namespace {

// Independent long-double evaluation from h and e.
constexpr long double kH = 6.62607015e-34L;
constexpr long double kE = 1.602176634e-19L;
constexpr long double kPi = 3.141592653589793238462643383279502884L;
constexpr long double kPhi0 = kH / (2.0L * kE);

long double lj_oracle(long double ic) { return kPhi0 / (2.0L * kPi * ic); }

long double leff_oracle(long double phi)
{
    const long double beta = 45e-12L / lj_oracle(1.5e-6L);
    return 45e-12L / (1.0L + beta * std::cos(phi));
}

constexpr double pi = constants::pi;

}  // namespace

TEST_CASE("flux quantum")
{
    CHECK(constants::flux_quantum == doctest::Approx(2.067833848e-15).epsilon(1e-9));
    CHECK(constants::flux_quantum == doctest::Approx(static_cast<double>(kPhi0)).epsilon(1e-15));
}

TEST_CASE("josephson inductance")
{
    const double lj = josephson_inductance(1.5e-6);
    CHECK(lj == doctest::Approx(static_cast<double>(lj_oracle(1.5e-6L))).epsilon(1e-14));
    CHECK(std::abs(lj - 219.4e-12) <= 0.1e-12);
    CHECK(josephson_inductance(3.0e-6) == doctest::Approx(lj / 2.0).epsilon(1e-15));
    CHECK(josephson_inductance(constants::flux_quantum / (2.0 * pi)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(josephson_inductance(0.0), DomainError);
    CHECK_THROWS_AS(josephson_inductance(-1e-6), DomainError);
}

TEST_CASE("hysteresis parameter")
{
    const auto p = reference_device();
    CHECK(p.n_cells == 990);
    CHECK(beta_l(p) == doctest::Approx(0.205).epsilon(0.01 / 0.205));
    CHECK(beta_l(p) >= 0.195);
    CHECK(beta_l(p) <= 0.215);
    CHECK_FALSE(is_hysteretic(p));

    auto boundary = p;
    boundary.non_hysteretic = false;
    boundary.l_g = josephson_inductance(p.i_c);
    CHECK(beta_l(boundary) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(is_hysteretic(boundary));

    auto strong = p;
    strong.non_hysteretic = false;
    strong.i_c = 15e-6;
    CHECK(beta_l(strong) == doctest::Approx(2.051).epsilon(1e-3));
    CHECK(is_hysteretic(strong));
    CHECK_THROWS_AS(cell_inductance(strong, 0.0), UnsupportedRegimeError);
    CHECK_THROWS_AS(mixing_coefficients(strong, 1.0), UnsupportedRegimeError);

    strong.non_hysteretic = true;
    CHECK_THROWS_AS(validate(strong), DomainError);

    auto bad = p;
    bad.c_g = 0.0;
    CHECK_THROWS_AS(validate(bad), DomainError);
    bad = p;
    bad.n_cells = 0;
    CHECK_THROWS_AS(validate(bad), DomainError);
}

TEST_CASE("cell inductance")
{
    const auto p = reference_device();
    for (double phi : {0.0, 0.5 * pi, pi, -1.0, 2.5})
        CHECK(cell_inductance(p, phi) == doctest::Approx(static_cast<double>(leff_oracle(phi))).epsilon(1e-14));
    CHECK(cell_inductance(p, 0.0) == doctest::Approx(37.3e-12).epsilon(1e-3));
    CHECK(cell_inductance(p, 0.5 * pi) == doctest::Approx(45e-12).epsilon(1e-15));
    CHECK(cell_inductance(p, pi) == doctest::Approx(56.6e-12).epsilon(1e-3));
}

TEST_CASE("mixing coefficients")
{
    const auto p = reference_device();
    const double beta = beta_l(p);
    const auto m0 = mixing_coefficients(p, 0.0);
    CHECK(m0.c3 == 0.0);
    CHECK(m0.c4 == doctest::Approx(beta / ((1 + beta) * (1 + beta))).epsilon(1e-15));
    const auto m90 = mixing_coefficients(p, 0.5 * pi);
    CHECK(std::abs(m90.c4) < 1e-16);
    CHECK(m90.c3 == doctest::Approx(beta).epsilon(1e-15));

    // |c3| peaks past pi/2, where beta cos^2 - cos - 2 beta = 0.
    double best_phi = 0.0, best = 0.0;
    for (int k = 0; k <= 2000; ++k) {
        const double phi = pi * k / 2000.0;
        const double c3 = std::abs(mixing_coefficients(p, phi).c3);
        if (c3 > best) {
            best = c3;
            best_phi = phi;
        }
    }
    const double peak = std::acos((1.0 - std::sqrt(1.0 + 8.0 * beta * beta)) / (2.0 * beta));
    CHECK(std::abs(best_phi - peak) <= pi / 2000.0);
    CHECK(best_phi > 0.5 * pi);
    // c4 is increasing in cos(phi): largest at zero flux, most negative at half a flux quantum.
    const auto m180 = mixing_coefficients(p, pi);
    CHECK(m180.c4 == doctest::Approx(-beta / ((1 - beta) * (1 - beta))).epsilon(1e-14));
    for (int k = 1; k < 100; ++k) {
        const double c4 = mixing_coefficients(p, pi * k / 100.0).c4;
        CHECK(c4 < m0.c4);
        CHECK(c4 > m180.c4);
    }

    // Oracle: c3, c4 are the first and second phase derivatives of L_g / L_eff
    // up to sign, checked by central differences.
    auto inv = [&](double phi) { return p.l_g / cell_inductance(p, phi); };
    for (double phi : {-2.0, -0.7, 0.3, 1.1, 2.9}) {
        const double h = 1e-4;
        const double d1 = (inv(phi + h) - inv(phi - h)) / (2 * h);
        const double d2 = (inv(phi + h) - 2 * inv(phi) + inv(phi - h)) / (h * h);
        const auto m = mixing_coefficients(p, phi);
        const double denom = 1.0 + beta * std::cos(phi);
        CHECK(-d1 / denom / denom == doctest::Approx(m.c3).epsilon(1e-7));
        CHECK(-d2 / denom / denom == doctest::Approx(m.c4).epsilon(1e-5));
    }
}

TEST_CASE("mixing parity on a symmetric grid")
{
    const auto p = reference_device();
    for (int k = 0; k <= 100; ++k) {
        const double phi = -3.0 + 6.0 * k / 100.0;
        const auto a = mixing_coefficients(p, phi);
        const auto b = mixing_coefficients(p, -phi);
        CHECK(a.c3 == -b.c3);
        CHECK(a.c4 == b.c4);
    }
}

TEST_CASE("ladder electrics")
{
    const auto p = reference_device();
    const long double leff = leff_oracle(0.0L);
    const double z = characteristic_impedance(p, 0.0);
    CHECK(z == doctest::Approx(static_cast<double>(std::sqrt(leff / 13e-15L))).epsilon(1e-14));
    CHECK(z == doctest::Approx(53.6).epsilon(1e-3));
    CHECK(z >= 48.0);
    CHECK(z <= 59.0);

    const double fc = cutoff_frequency(p, 0.0);
    CHECK(fc == doctest::Approx(static_cast<double>(1.0L / (kPi * std::sqrt(leff * 13e-15L)))).epsilon(1e-14));
    CHECK(std::abs(fc - 457e9) <= 5e9);

    const double fp = plasma_frequency(p);
    CHECK(fp == doctest::Approx(static_cast<double>(1.0L / (2.0L * kPi * std::sqrt(lj_oracle(1.5e-6L) * 25.8e-15L))))
                    .epsilon(1e-14));
    CHECK(std::abs(fp - 66.9e9) <= 1e9);
}

TEST_CASE("dispersion")
{
    const auto p = reference_device();
    for (double phi : {0.0, 0.5 * pi, 2.0}) {
        const double fc = cutoff_frequency(p, phi);
        double prev = 0.0;
        for (int k = 1; k < 200; ++k) {
            const double f = fc * k / 200.0;
            const double kk = dispersion(p, phi, f);
            CHECK(kk > prev);
            prev = kk;
        }
        const double slope = 2.0 * pi * std::sqrt(cell_inductance(p, phi) * p.c_g);
        CHECK(dispersion(p, phi, 1e3) / 1e3 == doctest::Approx(slope).epsilon(1e-12));
        CHECK(dispersion(p, phi, 0.999999 * fc) < pi);

        try {
            dispersion(p, phi, fc);
            FAIL("expected an evanescent-band error");
        } catch (const EvanescentBandError& e) {
            CHECK(e.cutoff_hz() == doctest::Approx(fc));
        }
    }
    CHECK_THROWS_AS(dispersion(p, 0.0, 0.0), DomainError);
}

TEST_CASE("frequency bookkeeping")
{
    PumpConfig pump;
    pump.f_pump = 6.75e9;
    const auto f = mixing_frequencies(pump, 3.3e9);
    CHECK(f.idler == 6.75e9 - 3.3e9);
    CHECK(f.idler == doctest::Approx(3.45e9).epsilon(1e-15));

    pump.regime = Regime::degenerate;
    pump.f_pump = 18e9;
    const auto d = mixing_frequencies(pump, 9e9);
    CHECK(d.idler == d.signal);
    CHECK_THROWS_AS(mixing_frequencies(pump, 8e9), UnsupportedRegimeError);

    pump.regime = Regime::non_degenerate;
    CHECK_THROWS_AS(mixing_frequencies(pump, 20e9), DomainError);
    CHECK(to_string(Regime::degenerate) == "degenerate");
    CHECK(to_string(Regime::non_degenerate) == "non-degenerate");
}

TEST_CASE("input line and bias mappings")
{
    InputLine line;
    const double a = line.amplitude(1e-10);
    CHECK(a == doctest::Approx(std::sqrt(1e-10 * 50.0) / 1e-3).epsilon(1e-15));
    CHECK(line.power(a) == doctest::Approx(1e-10).epsilon(1e-14));
    CHECK(line.amplitude(0.0) == 0.0);
    CHECK_THROWS_AS(line.amplitude(-1.0), DomainError);

    BiasMapping bias;
    CHECK(bias.bias_phase(0.0) == 0.0);
    CHECK(bias.bias_phase(1e-3) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(bias.bias_phase(-2e-3) == -bias.bias_phase(2e-3));
    bias.phi_offset = 0.3;
    CHECK(bias.phi_dc(0.0) == 0.3);
}
