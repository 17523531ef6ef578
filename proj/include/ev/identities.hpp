// identities.hpp
//
// The elliptic-identity battery: Riemann identity, double-angle product,
// theta factorizations, quasi-periodicities, and quadrature cross-checks of
// the closed-form Fourier coefficients.  Shared by the unit tests, the
// acceptance suite and the `identities` CLI command.

#ifndef EV_IDENTITIES_HPP
#define EV_IDENTITIES_HPP

#include <random>

#include "ev/elliptic.hpp"

namespace ev {

struct IdentityResiduals {
    double riemann = 0.0;
    double double_angle = 0.0;
    double factor_sigma = 0.0;  // sigma(u)/sigma(tau/2) via modulus-2tau thetas
    double factor_theta1 = 0.0; // theta[1/2,1/2](2u,2tau) product form
    double factor_theta0 = 0.0; // theta[0,1/2](2u,2tau) product form
    double quasi_one = 0.0;     // sigma(u+1) = -sigma(u)
    double quasi_tau = 0.0;     // sigma(u+tau) = -e^{-2 i pi (u + tau/2)} sigma(u)

    double max() const {
        return std::max({riemann, double_angle, factor_sigma, factor_theta1, factor_theta0,
                         quasi_one, quasi_tau});
    }
};

inline IdentityResiduals identity_battery(Complex tau, int n_draws, unsigned seed = 20240817,
                                          double tol = 1e-13) {
    std::mt19937 rng(seed);
    const double t = tau.imag();
    std::uniform_real_distribution<double> re(-0.5, 0.5);
    std::uniform_real_distribution<double> im(-t / 3, t / 3);
    auto draw = [&]() { return Complex(re(rng), im(rng)); };
    auto rel = [](Complex a, Complex b, double scale) {
        return std::abs(a - b) / std::max(scale, 1e-30);
    };
    auto sg = [&](Complex u) { return sigma(u, tau, tol); };

    IdentityResiduals out;
    for (int i = 0; i < n_draws; ++i) {
        const Complex u = draw(), v = draw(), x = draw(), y = draw();
        const Complex lhs =
            sg(u + x) * sg(u - x) * sg(v + y) * sg(v - y) - sg(u + y) * sg(u - y) * sg(v + x) * sg(v - x);
        const Complex rhs = sg(u + v) * sg(u - v) * sg(x + y) * sg(x - y);
        const double scale = std::max({std::abs(sg(u + x) * sg(u - x) * sg(v + y) * sg(v - y)),
                                       std::abs(sg(u + y) * sg(u - y) * sg(v + x) * sg(v - x)),
                                       std::abs(rhs)});
        out.riemann = std::max(out.riemann, rel(lhs, rhs, scale));
    }

    const Complex m2 = 2.0 * tau;
    for (int i = 0; i < n_draws; ++i) {
        const Complex u = draw();
        {
            const Complex lhs = sg(2.0 * u);
            const Complex rhs = 2.0 * sg(u) * sg(u + 0.5) * sg(u + tau / 2.0) *
                                sg(u - (1.0 + tau) / 2.0) /
                                (sg(0.5) * sg(tau / 2.0) * sg(-(1.0 + tau) / 2.0));
            out.double_angle =
                std::max(out.double_angle, rel(lhs, rhs, std::max(std::abs(lhs), std::abs(rhs))));
        }
        {
            const Complex lhs = sg(u) / sg(tau / 2.0);
            const Complex rhs = theta(kCharZeroHalf, u, m2, tol) * theta(kCharSigma, u, m2, tol) /
                                (theta(kCharZeroHalf, tau / 2.0, m2, tol) *
                                 theta(kCharSigma, tau / 2.0, m2, tol));
            out.factor_sigma =
                std::max(out.factor_sigma, rel(lhs, rhs, std::max(std::abs(lhs), std::abs(rhs))));
        }
        {
            const Complex lhs = theta(kCharSigma, 2.0 * u, m2, tol);
            const Complex rhs = theta(kCharSigma, tau, m2, tol) * sg(u) * sg(u + 0.5) /
                                (sg(tau / 2.0) * sg(tau / 2.0 + 0.5));
            out.factor_theta1 =
                std::max(out.factor_theta1, rel(lhs, rhs, std::max(std::abs(lhs), std::abs(rhs))));
        }
        {
            const Complex lhs = theta(kCharZeroHalf, 2.0 * u, m2, tol);
            const Complex rhs = theta(kCharZeroHalf, Complex(0), m2, tol) * sg(u - tau / 2.0) *
                                sg(u + 0.5 + tau / 2.0) / (sg(-tau / 2.0) * sg(tau / 2.0 + 0.5));
            out.factor_theta0 =
                std::max(out.factor_theta0, rel(lhs, rhs, std::max(std::abs(lhs), std::abs(rhs))));
        }
        {
            const Complex lhs1 = sg(u + 1.0), rhs1 = -sg(u);
            out.quasi_one =
                std::max(out.quasi_one, rel(lhs1, rhs1, std::max(std::abs(lhs1), std::abs(rhs1))));
            const Complex lhs2 = sg(u + tau);
            const Complex rhs2 = -std::exp(-2.0 * kI * kPi * (u + tau / 2.0)) * sg(u);
            out.quasi_tau =
                std::max(out.quasi_tau, rel(lhs2, rhs2, std::max(std::abs(lhs2), std::abs(rhs2))));
        }
    }
    return out;
}

// Trapezoid quadrature of the defining integrals behind fourier_A/fourier_B
// (periodic smooth integrands, so the trapezoid rule converges spectrally).
inline double fourier_A_quadrature_residual(Complex tau, Complex gamma, long kmax,
                                            int points = 4096, double tol = 1e-13) {
    const double t = tau.imag();
    std::vector<Complex> a_vals(static_cast<size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double x = -t / 2 + t * (i + 0.5) / points;
        a_vals[static_cast<size_t>(i)] =
            zeta_fn(kI * (x - gamma), tau, tol) - (2.0 * kPi / tau) * x;
    }
    double worst = 0.0;
    for (long k = -kmax; k <= kmax; ++k) {
        Complex integral = 0.0;
        for (int i = 0; i < points; ++i) {
            const double x = -t / 2 + t * (i + 0.5) / points;
            integral += a_vals[static_cast<size_t>(i)] *
                        std::exp(-2.0 * kI * kPi * double(k) * x / t);
        }
        integral *= t / points;
        const Complex closed = fourier_A(gamma, k, tau);
        worst = std::max(worst,
                         std::abs(integral - closed) / std::max(std::abs(closed), 1.0));
    }
    return worst;
}

inline double fourier_B_quadrature_residual(Complex tau, Complex gamma, long kmax,
                                            int points = 4096, double tol = 1e-13) {
    std::vector<Complex> b_vals(static_cast<size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double x = -0.5 + (i + 0.5) / points;
        b_vals[static_cast<size_t>(i)] = zeta_fn(x - gamma, tau, tol);
    }
    double worst = 0.0;
    for (long k = -kmax; k <= kmax; ++k) {
        Complex integral = 0.0;
        for (int i = 0; i < points; ++i) {
            const double x = -0.5 + (i + 0.5) / points;
            integral += b_vals[static_cast<size_t>(i)] *
                        std::exp(-2.0 * kI * kPi * double(k) * x);
        }
        integral /= points;
        const Complex closed = fourier_B(gamma, k, tau);
        worst = std::max(worst,
                         std::abs(integral - closed) / std::max(std::abs(closed), 1.0));
    }
    return worst;
}

} // namespace ev

#endif // EV_IDENTITIES_HPP
