// elliptic.hpp
//
// Theta functions with rational characteristics on a pure-imaginary-modulus
// torus, the sigma/zeta functions built from theta[1/2,1/2], the region-sign
// function, and the closed-form Fourier coefficients A~_gamma(k), B~_gamma(k)
// of the periodic kernels that drive the thermodynamic-limit series.
//
// Everything here is a pure function of its arguments.

#ifndef EV_ELLIPTIC_HPP
#define EV_ELLIPTIC_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ev {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

class EllipticError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Characteristics (a,b); only a,b in {0, 1/2} are used in this project.
struct ThetaChar {
    double a = 0.0;
    double b = 0.0;
};

inline constexpr ThetaChar kCharSigma{0.5, 0.5};   // theta[1/2,1/2]
inline constexpr ThetaChar kCharZeroHalf{0.0, 0.5}; // theta[0,1/2]

// Crossing/modulus parameters of one spin-chain model instance.
//
// tau is pure imaginary with Im(tau)>0.  eta is real in (0,1) or pure
// imaginary with Im(eta) in (0, Im(tau)); eta = 0, 1, tau are excluded
// (isotropic degeneration).  The unchecked() factory skips the eta regime
// restriction: the T-Q machinery at degenerate points needs transfer matrices
// at fully complex eta, where H is not Hermitian but Lambda(u) is still
// defined.
struct EllipticParams {
    Complex tau;
    Complex eta;
    double series_tol = 1e-12;
    int max_terms = 64;

    static EllipticParams make(Complex tau, Complex eta,
                               double series_tol = 1e-12, int max_terms = 64) {
        EllipticParams p{tau, eta, series_tol, max_terms};
        p.validate_tau();
        if (!(series_tol > 0.0 && series_tol <= 1e-8))
            throw EllipticError("series_tol must lie in (0, 1e-8]");
        if (max_terms < 16) throw EllipticError("max_terms must be >= 16");
        const double t = tau.imag();
        const bool real_eta = eta.imag() == 0.0 && eta.real() > 0.0 && eta.real() < 1.0;
        const bool imag_eta = eta.real() == 0.0 && eta.imag() > 0.0 && eta.imag() < t;
        if (!real_eta && !imag_eta)
            throw EllipticError("eta must be real in (0,1) or pure imaginary in (0, Im tau)");
        return p;
    }

    // No regime restriction on eta; still rejects the excluded points
    // eta = 0, 1, tau (mod the lattice) where the model degenerates.
    static EllipticParams unchecked(Complex tau, Complex eta,
                                    double series_tol = 1e-12, int max_terms = 64) {
        EllipticParams p{tau, eta, series_tol, max_terms};
        p.validate_tau();
        const double t = tau.imag();
        Complex r = eta;
        r -= Complex(0.0, t) * std::round(r.imag() / t);
        r -= std::round(r.real());
        if (std::abs(r) < 1e-12)
            throw EllipticError("eta coincides with an excluded point of the lattice {0,1,tau}");
        return p;
    }

    bool eta_is_real() const { return eta.imag() == 0.0; }
    double tau_im() const { return tau.imag(); }

  private:
    void validate_tau() const {
        if (!(tau.imag() > 0.0) || tau.real() != 0.0)
            throw EllipticError("tau must be pure imaginary with Im(tau) > 0");
    }
};

namespace detail {

// theta value and d/du in one pass over the defining series.
struct ThetaPair {
    Complex value{0.0, 0.0};
    Complex deriv{0.0, 0.0};
};

inline ThetaPair theta_series(ThetaChar c, Complex u, Complex modulus,
                              double tol, int max_terms) {
    if (!(modulus.imag() > 0.0))
        throw EllipticError("theta modulus must have positive imaginary part");
    if (!(tol > 0.0 && tol <= 1e-8))
        throw EllipticError("theta tolerance must lie in (0, 1e-8]");

    ThetaPair acc;
    double peak = 0.0;
    int consec = 0;
    // Terms grow until (m+a) ~ -Im(u)/Im(modulus); never arm the stop test
    // before the window has passed that index.
    const int m_floor =
        static_cast<int>(std::ceil(std::abs(u.imag()) / modulus.imag())) + 2;

    auto add = [&](int m) -> double {
        const double n = m + c.a;
        const Complex e =
            std::exp(kI * kPi * (n * n * modulus + 2.0 * n * (u + c.b)));
        acc.value += e;
        acc.deriv += 2.0 * kI * kPi * n * e;
        return std::abs(e);
    };

    for (int m_window = 0; m_window <= max_terms; ++m_window) {
        double mag = add(m_window);
        if (m_window > 0) mag += add(-m_window);
        peak = std::max(peak, mag);
        if (m_window >= m_floor) {
            const double floor_mag = std::max(std::abs(acc.value), 1e-2 * peak);
            if (mag <= tol * floor_mag) {
                if (++consec >= 3) return acc;
            } else {
                consec = 0;
            }
        }
    }
    std::ostringstream os;
    os << "theta series not converged within " << max_terms
       << " terms; last term magnitude " << peak;
    throw EllipticError(os.str());
}

} // namespace detail

inline Complex theta(ThetaChar c, Complex u, Complex modulus, double tol,
                     int max_terms = 64) {
    return detail::theta_series(c, u, modulus, tol, max_terms).value;
}

// d/du of theta, by termwise differentiation of the defining series.
inline Complex theta_du(ThetaChar c, Complex u, Complex modulus, double tol,
                        int max_terms = 64) {
    return detail::theta_series(c, u, modulus, tol, max_terms).deriv;
}

inline Complex sigma(Complex u, Complex tau, double tol = 1e-12, int max_terms = 64) {
    return theta(kCharSigma, u, tau, tol, max_terms);
}

inline Complex sigma_prime(Complex u, Complex tau, double tol = 1e-12, int max_terms = 64) {
    return theta_du(kCharSigma, u, tau, tol, max_terms);
}

inline Complex sigma(Complex u, const EllipticParams& p) {
    return sigma(u, p.tau, p.series_tol, p.max_terms);
}
inline Complex sigma_prime(Complex u, const EllipticParams& p) {
    return sigma_prime(u, p.tau, p.series_tol, p.max_terms);
}

// Reduce u into the cell centred on 0 modulo Z + Z tau.
inline Complex lattice_reduce(Complex u, Complex tau) {
    u -= tau * std::round(u.imag() / tau.imag());
    u -= std::round(u.real());
    return u;
}

// zeta(u) = sigma'(u)/sigma(u); simple pole at every lattice point.
inline Complex zeta_fn(Complex u, Complex tau, double tol = 1e-12, int max_terms = 64) {
    if (std::abs(lattice_reduce(u, tau)) < 1e-10)
        throw EllipticError("zeta evaluated at a lattice point (pole of sigma'/sigma)");
    const auto th = detail::theta_series(kCharSigma, u, tau, tol, max_terms);
    return th.deriv / th.value;
}

inline Complex zeta_fn(Complex u, const EllipticParams& p) {
    return zeta_fn(u, p.tau, p.series_tol, p.max_terms);
}

// sI(gamma): sign of Im(gamma), with |Im| below 1e-13 canonicalized to 0.
inline int sign_region(Complex gamma) {
    double im = gamma.imag();
    if (std::abs(im) < 1e-13) im = 0.0;
    return (im > 0.0) ? 1 : (im < 0.0 ? -1 : 0);
}

namespace detail {

inline void require_strip(bool ok, const char* what) {
    if (!ok) throw EllipticError(std::string("argument outside declared strip: ") + what);
}

} // namespace detail

// Fourier coefficient A~_gamma(k) of A_gamma(x) = sigma'(i(x-gamma))/sigma(i(x-gamma))
// - (2 pi/tau) x on x in [-tau/2i, tau/2i].  Closed form:
//   k != 0 : -pi exp(-(i k pi/tau) 2 gamma i) (coth(i k pi/tau) - sI(gamma))
//   k == 0 : pi (2 gamma i + sI(gamma))
// Exponentials are grouped so every evaluated exponent has non-positive real
// part for |Im gamma| <= 1 (coth(x) -/+ 1 decays like exp(-2|x|)).
inline Complex fourier_A(Complex gamma, long k, Complex tau) {
    const double t = tau.imag();
    detail::require_strip(std::abs(gamma.imag()) <= 1.0 + 1e-9 &&
                              std::abs(gamma.real()) <= t / 2 + 1e-9,
                          "fourier_A needs Im in [-1,1], Re in [-tau/2i, tau/2i]");
    const int s = sign_region(gamma);
    if (k == 0) return kPi * (2.0 * gamma * kI + static_cast<double>(s));

    const double x = kPi * static_cast<double>(k) / t; // i k pi / tau, real
    const double ax = std::abs(x);
    const double em = std::exp(-2.0 * ax);
    const Complex base = -2.0 * kI * gamma * x;
    if (x > 0.0) {
        Complex val = 2.0 * std::exp(base - 2.0 * ax) / (1.0 - em);
        if (s != 1) val += static_cast<double>(1 - s) * std::exp(base);
        return -kPi * val;
    }
    Complex val = 2.0 * std::exp(base - 2.0 * ax) / (1.0 - em);
    if (s != -1) val += static_cast<double>(1 + s) * std::exp(base);
    return kPi * val;
}

// Fourier coefficient B~_gamma(k) of B_gamma(x) = sigma'(x-gamma)/sigma(x-gamma)
// on x in [-1/2, 1/2].  Closed form:
//   k != 0 : i pi exp(-i k pi 2 gamma) (coth(i k pi tau) + sI(gamma))
//   k == 0 : sI(gamma) i pi
inline Complex fourier_B(Complex gamma, long k, Complex tau) {
    const double t = tau.imag();
    detail::require_strip(std::abs(gamma.imag()) <= t + 1e-9 &&
                              std::abs(gamma.real()) <= 0.5 + 1e-9,
                          "fourier_B needs Im in [-tau/i, tau/i], Re in [-1/2, 1/2]");
    const int s = sign_region(gamma);
    if (k == 0) return kI * kPi * static_cast<double>(s);

    const double y = kPi * static_cast<double>(k) * t; // coth(i k pi tau) = -coth(y)
    const double ay = std::abs(y);
    const double em = std::exp(-2.0 * ay);
    const Complex base = -2.0 * kI * kPi * static_cast<double>(k) * gamma;
    if (k > 0) {
        // s - coth(y) = (s-1) - 2 e^{-2y}/(1-e^{-2y})
        Complex val = -2.0 * std::exp(base - 2.0 * ay) / (1.0 - em);
        if (s != 1) val += static_cast<double>(s - 1) * std::exp(base);
        return kI * kPi * val;
    }
    // k < 0: coth(|y|) + s = (1+s) + 2 e^{-2|y|}/(1-e^{-2|y|})
    Complex val = 2.0 * std::exp(base - 2.0 * ay) / (1.0 - em);
    if (s != -1) val += static_cast<double>(1 + s) * std::exp(base);
    return kI * kPi * val;
}

} // namespace ev

#endif // EV_ELLIPTIC_HPP
