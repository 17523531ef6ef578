// thermo.hpp
//
// Closed-form thermodynamic-limit quantities: ground-state energy density,
// discrete-zero energies, surface energies, excitation gaps, and the zero
// densities in Fourier space, all via certified-convergence series; plus the
// finite-size extrapolation used to cross-check them against exact
// diagonalization.
//
// All series are evaluated with exponent grouping that keeps every evaluated
// exponential bounded; k=0 terms that are 0/0 as written use their analytic
// limits.

#ifndef EV_THERMO_HPP
#define EV_THERMO_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "ev/zeros.hpp"

namespace ev {

struct KmaxPolicy {
    long cap = 100000;
    double rel_tol = 1e-14;
};

struct SeriesInfo {
    long kmax_used = 0;
    double tail = 0.0;
    bool certified = false;
    bool averaged = false; // Euler pair-averaging kicked in (band-edge series)
};

namespace detail {

// Sum over k >= 1 with the certification rule: three consecutive terms below
// rel_tol * |partial sum|.  Alternating band-edge series that only converge
// in the mean are accepted through pair-averaged partial sums.
template <typename TermFn>
Complex certified_sum(TermFn term, const KmaxPolicy& pol, SeriesInfo* info) {
    Complex s = 0.0, avg_prev = 0.0;
    int consec = 0, consec_avg = 0;
    double mag = 0.0;
    for (long k = 1; k <= pol.cap; ++k) {
        const Complex t = term(k);
        const Complex s_old = s;
        s += t;
        const Complex avg = (s_old + s) / 2.0;
        mag = std::abs(t);
        const double floor_s = std::max(std::abs(s), 1e-300);
        if (mag <= pol.rel_tol * floor_s) {
            if (++consec >= 3) {
                if (info) *info = {k, mag, true, false};
                return s;
            }
        } else {
            consec = 0;
        }
        if (k > 4 && std::abs(avg - avg_prev) <= pol.rel_tol * std::max(std::abs(avg), 1e-300)) {
            if (++consec_avg >= 6) {
                if (info) *info = {k, std::abs(avg - avg_prev), true, true};
                return avg;
            }
        } else {
            consec_avg = 0;
        }
        avg_prev = avg;
    }
    if (info) *info = {pol.cap, mag, false, false};
    throw EllipticError("series not certified at cap; tail estimate " + std::to_string(mag));
}

// cosh(a)/sinh(b) for real a, b>0, |a|<b, without overflow
inline double cosh_over_sinh(double a, double b) {
    return (std::exp(a - b) + std::exp(-a - b)) / (1.0 - std::exp(-2.0 * b));
}

// cos(c w)/cosh(d) for complex w, real c, d > 0; bounded iff |Im w| <= d/c
inline Complex cos_over_cosh(Complex w, double c, double d) {
    const Complex icw = kI * c * w;
    return (std::exp(icw - d) + std::exp(-icw - d)) / (1.0 + std::exp(-2.0 * d));
}

inline double real_part_checked(Complex v, const char* what, double tol = 1e-10) {
    if (std::abs(v.imag()) > tol * std::max(1.0, std::abs(v.real())))
        throw EllipticError(std::string(what) + ": imaginary residue " +
                            std::to_string(v.imag()));
    return v.real();
}

} // namespace detail

// Ground-state energy per site, Fourier form.
inline double energy_density(const EllipticParams& p, Regime reg,
                             const KmaxPolicy& pol = {}, SeriesInfo* info = nullptr) {
    const double t = p.tau_im();
    const Complex pref = sigma(p.eta, p) / sigma_prime(Complex(0), p);
    if (reg == Regime::RealLarge || reg == Regime::RealSmall) {
        const double eta = p.eta.real();
        const Complex ssum = detail::certified_sum(
            [&](long k) {
                const double x = kPi * double(k) / t;
                return Complex(2.0 * std::tanh(x * eta) *
                               detail::cosh_over_sinh(x * (2.0 * eta - 1.0), x));
            },
            pol, info);
        // k = 0 summand is singular as written; its symmetric limit is eta
        const Complex e = -pref * (kPi / t) * (eta + ssum) -
                          0.5 * sigma_prime(p.eta, p) / sigma_prime(Complex(0), p);
        return detail::real_part_checked(e, "energy density (real regime)");
    }
    const double h = p.eta.imag();
    const Complex ssum = detail::certified_sum(
        [&](long k) {
            const double y = kPi * double(k);
            return Complex(std::tanh(y * h) * detail::cosh_over_sinh(y * (t - 2.0 * h), y * t));
        },
        pol, info);
    const Complex e = pref * (2.0 * kI * kPi * ssum - 0.5 * zeta_fn(p.eta, p));
    return detail::real_part_checked(e, "energy density (imaginary regime)");
}

// Energy carried by one discrete zero w (domain coordinates).  Zeros outside
// the band Im(w) in [-eta/2, eta/2] (resp. the imaginary-regime analogue)
// contribute nothing and return 0 with the out-of-band flag.
inline double discrete_zero_energy(Complex w, const EllipticParams& p, Regime reg,
                                   const KmaxPolicy& pol = {}, SeriesInfo* info = nullptr,
                                   bool* in_band = nullptr) {
    const double t = p.tau_im();
    const bool real_reg = (reg == Regime::RealLarge || reg == Regime::RealSmall);
    const double band = real_reg ? p.eta.real() : p.eta.imag();
    const double half = 0.5 * (sign_region(w + kI * band / 2.0) - sign_region(w - kI * band / 2.0));
    if (in_band) *in_band = half != 0.0;
    if (half == 0.0) {
        if (info) *info = {0, 0.0, true, false};
        return 0.0;
    }
    const Complex pref = sigma(p.eta, p) / sigma_prime(Complex(0), p);
    const double c = real_reg ? 2.0 * kPi / t : 2.0 * kPi;
    const double dcoef = real_reg ? kPi * band / t : kPi * band;
    const Complex ssum = detail::certified_sum(
        [&](long k) { return 2.0 * detail::cos_over_cosh(w, c * double(k), dcoef * double(k)); },
        pol, info);
    const Complex series = 1.0 + ssum; // k = 0 term
    const Complex e = real_reg ? Complex(half * kPi / t) * pref * series
                               : Complex(-half) * kI * kPi * pref * series;
    return detail::real_part_checked(e, "discrete zero energy", 1e-8);
}

enum class Parity { Even, Odd };

inline double parity_sign(Parity p) { return p == Parity::Even ? 1.0 : -1.0; }

// Surface energies: E^x_rs = 0 and E^y_rs = E^z_rs = (-1)^N E^w_r(tau/2i) in
// the real regimes; E^z_is = 0 and E^x_is = E^y_is = (-1)^N E^w_i(1/2) in the
// imaginary regimes.
inline double surface_energy(const EllipticParams& p, Regime reg, Twist twist, Parity parity,
                             const KmaxPolicy& pol = {}, SeriesInfo* info = nullptr) {
    if (twist == Twist::Periodic)
        throw EllipticError("surface energy is defined relative to the periodic chain");
    const bool real_reg = (reg == Regime::RealLarge || reg == Regime::RealSmall);
    if (real_reg) {
        if (twist == Twist::X) {
            if (info) *info = {0, 0.0, true, false};
            return 0.0;
        }
        return parity_sign(parity) *
               discrete_zero_energy(Complex(p.tau_im() / 2.0, 0.0), p, reg, pol, info);
    }
    if (twist == Twist::Z) {
        if (info) *info = {0, 0.0, true, false};
        return 0.0;
    }
    return parity_sign(parity) * discrete_zero_energy(Complex(0.5, 0.0), p, reg, pol, info);
}

// Twist/parity cells with a finite excitation gap:
//   real eta:  (periodic or x twist, even N) and (y or z twist, odd N)
//   imag eta:  (periodic or z twist, even N) and (x or y twist, odd N)
inline bool gap_is_finite(Regime reg, Twist twist, Parity parity) {
    const bool real_reg = (reg == Regime::RealLarge || reg == Regime::RealSmall);
    const bool group_a = real_reg ? (twist == Twist::Periodic || twist == Twist::X)
                                  : (twist == Twist::Periodic || twist == Twist::Z);
    return group_a == (parity == Parity::Even);
}

inline double excitation_gap(const EllipticParams& p, Regime reg, Twist twist, Parity parity,
                             const KmaxPolicy& pol = {}, SeriesInfo* info = nullptr) {
    if (!gap_is_finite(reg, twist, parity)) {
        if (info) *info = {0, 0.0, true, false};
        return 0.0;
    }
    const double t = p.tau_im();
    SeriesInfo i1, i2;
    double gap = 0.0;
    switch (reg) {
        case Regime::RealSmall:
            gap = 2.0 * discrete_zero_energy(Complex(t / 2, 0.0), p, reg, pol, &i1);
            i2 = i1;
            break;
        case Regime::RealLarge: {
            const double dy = p.eta.real() - 0.5;
            gap = discrete_zero_energy(Complex(t / 2, dy), p, reg, pol, &i1) +
                  discrete_zero_energy(Complex(t / 2, -dy), p, reg, pol, &i2);
            break;
        }
        case Regime::ImagSmall:
            gap = 2.0 * discrete_zero_energy(Complex(0.5, 0.0), p, reg, pol, &i1);
            i2 = i1;
            break;
        case Regime::ImagLarge: {
            const double dy = p.eta.imag() - t / 2;
            gap = discrete_zero_energy(Complex(0.5, dy), p, reg, pol, &i1) +
                  discrete_zero_energy(Complex(0.5, -dy), p, reg, pol, &i2);
            break;
        }
    }
    if (info) {
        info->kmax_used = std::max(i1.kmax_used, i2.kmax_used);
        info->tail = std::max(i1.tail, i2.tail);
        info->certified = i1.certified && i2.certified;
        info->averaged = i1.averaged || i2.averaged;
    }
    return gap;
}

// One Fourier mode of the zero density: N rho~(k) = N * bulk - correction.
// Returns {bulk, correction}.  Both ratios are 0/0 at k = 0 as written; the
// analytic limits are the ratios of the 1/k pole coefficients.
inline std::pair<Complex, Complex> zero_density(const EllipticParams& p, Regime reg,
                                                Twist twist,
                                                const std::vector<Complex>& discrete,
                                                long k) {
    const TwistDeltas d = twist_deltas(twist);
    const Complex tau = p.tau;
    const double n2 = static_cast<double>(discrete.size());
    const bool real_reg = (reg == Regime::RealLarge || reg == Regime::RealSmall);

    if (real_reg) {
        const double eta = p.eta.real();
        const Complex he = kI * eta / 2.0;
        if (k == 0) {
            const double share = (reg == Regime::RealLarge) ? 1.0 : 0.5;
            return {share, share * n2};
        }
        Complex den, num;
        if (reg == Regime::RealLarge) {
            den = fourier_A(-kI * (1.0 - eta) / 2.0, k, tau) +
                  fourier_A(kI * (1.0 - eta) / 2.0, k, tau);
            num = fourier_A(kI * eta, k, tau) + fourier_A(-kI * eta, k, tau);
        } else {
            den = fourier_A(kI * 1.5 * eta, k, tau) + fourier_A(-kI * 1.5 * eta, k, tau) +
                  fourier_A(he, k, tau) + fourier_A(-he, k, tau);
            num = fourier_A(kI * eta, k, tau) + fourier_A(-kI * eta, k, tau);
        }
        if (std::abs(den) < 1e-12 * (1.0 + std::abs(num)))
            throw EllipticError("zero_density: singular Fourier mode k=" + std::to_string(k));
        Complex corr = 0.0;
        for (const Complex& w : discrete)
            corr += fourier_A(w + he, k, tau) + fourier_A(w - he, k, tau);
        return {num / den, corr / den};
    }

    const Complex he = p.eta / 2.0;
    if (k == 0) {
        const double share = (reg == Regime::ImagLarge) ? 1.0 : 0.5;
        return {share, share * n2};
    }
    Complex den, num;
    if (reg == Regime::ImagLarge) {
        den = fourier_B(-(tau - p.eta) / 2.0, k, tau) + fourier_B((tau - p.eta) / 2.0, k, tau);
        num = fourier_B(p.eta, k, tau) + fourier_B(-p.eta, k, tau);
    } else {
        den = fourier_B(1.5 * p.eta, k, tau) + fourier_B(-1.5 * p.eta, k, tau) +
              fourier_B(he, k, tau) + fourier_B(-he, k, tau);
        num = fourier_B(p.eta, k, tau) + fourier_B(-p.eta, k, tau);
    }
    if (std::abs(den) < 1e-12 * (1.0 + std::abs(num)))
        throw EllipticError("zero_density: singular Fourier mode k=" + std::to_string(k));
    Complex corr = 0.0;
    for (const Complex& w : discrete)
        corr += fourier_B(w + he, k, tau) + fourier_B(w - he, k, tau);
    return {num / den, corr / den};
}

struct FitResult {
    double slope = 0.0, intercept = 0.0, curvature = 0.0, residual = 0.0;
};

enum class ParityFilter { Even, Odd, Any };

// Least squares E_N = slope*N + intercept + curvature/N.
inline FitResult extrapolate(const std::vector<std::pair<int, double>>& energies,
                             ParityFilter filter = ParityFilter::Any) {
    std::vector<std::pair<int, double>> sel;
    for (const auto& e : energies) {
        if (filter == ParityFilter::Even && e.first % 2 != 0) continue;
        if (filter == ParityFilter::Odd && e.first % 2 == 0) continue;
        sel.push_back(e);
    }
    const int m = static_cast<int>(sel.size());
    if (m < 3) throw EllipticError("extrapolate needs at least 3 same-parity sizes");
    Eigen::MatrixXd a(m, 3);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
        const double nn = sel[static_cast<size_t>(i)].first;
        a(i, 0) = nn;
        a(i, 1) = 1.0;
        a(i, 2) = 1.0 / nn;
        b(i) = sel[static_cast<size_t>(i)].second;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < 3) throw EllipticError("extrapolate: rank-deficient fit");
    const Eigen::VectorXd x = qr.solve(b);
    FitResult f;
    f.slope = x(0);
    f.intercept = x(1);
    f.curvature = x(2);
    f.residual = (a * x - b).norm() / std::sqrt(double(m));
    return f;
}

} // namespace ev

#endif // EV_THERMO_HPP
