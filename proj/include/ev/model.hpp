// model.hpp
//
// The XYZ chain with periodic/twisted boundaries: coupling constants, the
// eight-vertex R-matrix, twist operators U^beta, the inhomogeneous transfer
// matrix t(u) and the Hamiltonian it generates.
//
// Basis convention: site j occupies bit j-1 of the computational index, and
// sigma^z eigenvalue +1 corresponds to bit 0.
//
// t(u) is never materialized through the joint 2^{N+1}-dimensional space: the
// auxiliary space is contracted sequentially, so applying t(u) to a vector is
// O(N 2^N) and the dense matrix costs O(N 4^N).

#ifndef EV_MODEL_HPP
#define EV_MODEL_HPP

#include <Eigen/Dense>
#include <vector>

#include "ev/elliptic.hpp"

namespace ev {

using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;

enum class Twist { Periodic, X, Y, Z };

struct TwistDeltas {
    int x = 0, y = 0, z = 0;
};

inline TwistDeltas twist_deltas(Twist t) {
    switch (t) {
        case Twist::X: return {1, 0, 0};
        case Twist::Y: return {0, 1, 0};
        case Twist::Z: return {0, 0, 1};
        default: return {0, 0, 0};
    }
}

inline char twist_char(Twist t) {
    switch (t) {
        case Twist::X: return 'x';
        case Twist::Y: return 'y';
        case Twist::Z: return 'z';
        default: return 'p';
    }
}

inline Twist twist_from_char(char c) {
    switch (c) {
        case 'p': case '0': return Twist::Periodic;
        case 'x': return Twist::X;
        case 'y': return Twist::Y;
        case 'z': return Twist::Z;
        default: throw std::invalid_argument("twist must be one of p,x,y,z");
    }
}

// sigma^beta; identity for Periodic.
inline Matrix2c pauli(Twist axis) {
    Matrix2c m;
    switch (axis) {
        case Twist::X: m << 0, 1, 1, 0; break;
        case Twist::Y: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
        case Twist::Z: m << 1, 0, 0, -1; break;
        default: m.setIdentity(); break;
    }
    return m;
}

struct CouplingConstants {
    Complex jx, jy, jz;
};

// J_x = e^{i pi eta} sigma(eta+tau/2)/sigma(tau/2),
// J_y = e^{i pi eta} sigma(eta+(1+tau)/2)/sigma((1+tau)/2),
// J_z = sigma(eta+1/2)/sigma(1/2).
inline CouplingConstants couplings_raw(Complex tau, Complex eta, double tol = 1e-12) {
    const Complex ph = std::exp(kI * kPi * eta);
    CouplingConstants c;
    c.jx = ph * sigma(eta + tau / 2.0, tau, tol) / sigma(tau / 2.0, tau, tol);
    c.jy = ph * sigma(eta + (1.0 + tau) / 2.0, tau, tol) / sigma((1.0 + tau) / 2.0, tau, tol);
    c.jz = sigma(eta + 0.5, tau, tol) / sigma(0.5, tau, tol);
    return c;
}

// Couplings for a Hermitian regime: imaginary parts must be roundoff-level
// and are dropped; the |J| ordering of the regime is checked.
inline CouplingConstants couplings(const EllipticParams& p) {
    CouplingConstants c = couplings_raw(p.tau, p.eta, p.series_tol);
    const double scale = std::max({std::abs(c.jx), std::abs(c.jy), std::abs(c.jz), 1.0});
    const double imag_resid =
        std::max({std::abs(c.jx.imag()), std::abs(c.jy.imag()), std::abs(c.jz.imag())});
    if (imag_resid > 1e-10 * scale)
        throw EllipticError("couplings not real: eta outside the Hermitian regimes?");
    c.jx = c.jx.real();
    c.jy = c.jy.real();
    c.jz = c.jz.real();
    const double ax = std::abs(c.jx), ay = std::abs(c.jy), az = std::abs(c.jz);
    if (p.eta_is_real()) {
        if (!(ax >= ay && ay >= az))
            throw EllipticError("expected |Jx| > |Jy| > |Jz| for real eta");
    } else {
        if (!(ax <= ay && ay <= az))
            throw EllipticError("expected |Jx| < |Jy| < |Jz| for pure imaginary eta");
    }
    return c;
}

// Eight-vertex R-matrix entries; all four thetas carry modulus 2 tau.
struct RMatrixEntries {
    Complex alpha, beta, gamma, delta;
};

inline RMatrixEntries r_entries(Complex u, Complex tau, Complex eta, double tol = 1e-12) {
    const Complex m2 = 2.0 * tau;
    const Complex t0_u = theta(kCharZeroHalf, u, m2, tol);
    const Complex t1_u = theta(kCharSigma, u, m2, tol);
    const Complex t0_ue = theta(kCharZeroHalf, u + eta, m2, tol);
    const Complex t1_ue = theta(kCharSigma, u + eta, m2, tol);
    const Complex t0_0 = theta(kCharZeroHalf, Complex(0), m2, tol);
    const Complex t0_e = theta(kCharZeroHalf, eta, m2, tol);
    const Complex t1_e = theta(kCharSigma, eta, m2, tol);
    RMatrixEntries r;
    r.alpha = t0_u * t1_ue / (t0_0 * t1_e);
    r.beta = t1_u * t0_ue / (t0_0 * t1_e);
    r.gamma = t0_u * t0_ue / (t0_0 * t0_e);
    r.delta = t1_u * t1_ue / (t0_0 * t0_e);
    return r;
}

inline Matrix4c r_matrix(Complex u, Complex tau, Complex eta, double tol = 1e-12) {
    const RMatrixEntries e = r_entries(u, tau, eta, tol);
    Matrix4c r = Matrix4c::Zero();
    r(0, 0) = e.alpha; r(0, 3) = e.delta;
    r(1, 1) = e.beta;  r(1, 2) = e.gamma;
    r(2, 1) = e.gamma; r(2, 2) = e.beta;
    r(3, 0) = e.delta; r(3, 3) = e.alpha;
    return r;
}

inline Matrix4c r_matrix(Complex u, const EllipticParams& p) {
    return r_matrix(u, p.tau, p.eta, p.series_tol);
}

struct SpinChainModel {
    int n_sites = 0;
    EllipticParams params;
    Twist twist = Twist::Periodic;
    std::vector<Complex> inhomogeneities; // theta_j, j = 1..N

    static SpinChainModel make(int n, const EllipticParams& p, Twist tw,
                               std::vector<Complex> theta = {}) {
        if (n < 2) throw EllipticError("n_sites must be >= 2");
        if (theta.empty()) theta.assign(static_cast<size_t>(n), Complex(0));
        if (static_cast<int>(theta.size()) != n)
            throw EllipticError("need one inhomogeneity per site");
        const bool real_eta = p.eta_is_real();
        for (const Complex& th : theta) {
            if (real_eta && std::abs(th.real()) > 1e-14)
                throw EllipticError("real eta requires pure imaginary inhomogeneities");
            if (!real_eta && p.eta.real() == 0.0 && std::abs(th.imag()) > 1e-14)
                throw EllipticError("pure imaginary eta requires real inhomogeneities");
        }
        return SpinChainModel{n, p, tw, std::move(theta)};
    }

    size_t dim() const { return size_t{1} << n_sites; }

    void require_dense() const {
        if (n_sites > 14)
            throw EllipticError("dense paths support N <= 14 only");
    }
};

namespace detail {

// Site-local 2x2 blocks of R_{0j}: M[c][c'] maps the site amplitudes while
// the auxiliary index goes c' -> c.
//   M[0][0] = diag(alpha, beta)   M[0][1] = antidiag(gamma; delta)
//   M[1][0] = antidiag(delta; gamma)   M[1][1] = diag(beta, alpha)
//
// One sweep updates, for every basis pair (i: bit p = 0, j = i | 1<<p),
// the four block vectors Y[c][b] in place.
inline void transfer_site_sweep(const RMatrixEntries& r, int bit, VectorXc Y[2][2]) {
    const size_t step = size_t{1} << bit;
    const size_t dim = static_cast<size_t>(Y[0][0].size());
    for (int b = 0; b < 2; ++b) {
        Complex* y0 = Y[0][b].data();
        Complex* y1 = Y[1][b].data();
        for (size_t base = 0; base < dim; base += 2 * step) {
            for (size_t i = base; i < base + step; ++i) {
                const size_t j = i + step;
                const Complex a0 = y0[i], a1 = y0[j];
                const Complex b0 = y1[i], b1 = y1[j];
                y0[i] = r.alpha * a0 + r.gamma * b1;
                y0[j] = r.beta * a1 + r.delta * b0;
                y1[i] = r.beta * b0 + r.delta * a1;
                y1[j] = r.alpha * b1 + r.gamma * a0;
            }
        }
    }
}

} // namespace detail

// w = t(u) v with t(u) = tr_0 { sigma^beta_0 R_{0N}(u-theta_N) ... R_{01}(u-theta_1) }.
inline VectorXc apply_transfer(Complex u, const SpinChainModel& m, const VectorXc& v) {
    const size_t dim = m.dim();
    if (static_cast<size_t>(v.size()) != dim)
        throw EllipticError("apply_transfer: dimension mismatch");
    VectorXc Y[2][2];
    for (int c = 0; c < 2; ++c)
        for (int b = 0; b < 2; ++b) Y[c][b] = (c == b) ? v : VectorXc::Zero(dim);
    for (int j = 0; j < m.n_sites; ++j) {
        const RMatrixEntries r = r_entries(u - m.inhomogeneities[static_cast<size_t>(j)],
                                           m.params.tau, m.params.eta, m.params.series_tol);
        detail::transfer_site_sweep(r, j, Y);
    }
    const Matrix2c sb = pauli(m.twist);
    VectorXc out = VectorXc::Zero(dim);
    for (int c = 0; c < 2; ++c)
        for (int b = 0; b < 2; ++b)
            if (sb(b, c) != Complex(0)) out += sb(b, c) * Y[c][b];
    return out;
}

inline MatrixXc transfer_matrix(Complex u, const SpinChainModel& m) {
    m.require_dense();
    const size_t dim = m.dim();
    MatrixXc t(dim, dim);
    VectorXc e = VectorXc::Zero(dim);
    for (size_t col = 0; col < dim; ++col) {
        e(col) = 1.0;
        t.col(col) = apply_transfer(u, m, e);
        e(col) = 0.0;
    }
    return t;
}

// U^beta = sigma^beta_1 ... sigma^beta_N (identity for Periodic).
inline MatrixXc twist_operator(Twist tw, int n_sites) {
    if (n_sites > 14) throw EllipticError("dense paths support N <= 14 only");
    const size_t dim = size_t{1} << n_sites;
    MatrixXc u = MatrixXc::Zero(dim, dim);
    switch (tw) {
        case Twist::Periodic:
            u.setIdentity();
            break;
        case Twist::X:
            for (size_t s = 0; s < dim; ++s) u(s ^ (dim - 1), s) = 1.0;
            break;
        case Twist::Y: {
            // sigma^y |b> = i (1-2b) |1-b>; product over all sites.
            const Complex in = std::pow(kI, n_sites);
            for (size_t s = 0; s < dim; ++s) {
                const int pc = __builtin_popcountll(s);
                u(s ^ (dim - 1), s) = in * ((pc % 2 == 0) ? 1.0 : -1.0);
            }
            break;
        }
        case Twist::Z:
            for (size_t s = 0; s < dim; ++s)
                u(s, s) = (__builtin_popcountll(s) % 2 == 0) ? 1.0 : -1.0;
            break;
    }
    return u;
}

// H = (1/2) sum_j [ Jx sx_j sx_{j+1} + Jy sy_j sy_{j+1} + Jz sz_j sz_{j+1} ]
// with sigma^a_{N+1} = sigma^beta_1 sigma^a_1 sigma^beta_1: the boundary bond
// flips the sign of the two couplings whose axis differs from the twist.
inline MatrixXc hamiltonian(const SpinChainModel& m, bool* inhomogeneous_flag = nullptr) {
    m.require_dense();
    const int n = m.n_sites;
    const size_t dim = m.dim();
    const CouplingConstants j = couplings(m.params);

    bool inhom = false;
    for (const Complex& th : m.inhomogeneities)
        if (std::abs(th) > 0.0) inhom = true;
    if (inhomogeneous_flag) *inhomogeneous_flag = inhom;

    MatrixXc h = MatrixXc::Zero(dim, dim);
    const TwistDeltas d = twist_deltas(m.twist);
    for (int bond = 0; bond < n; ++bond) {
        const int p = bond;               // site bond+1 -> bit p
        const int q = (bond + 1) % n;     // neighbour (twisted across the seam)
        double fx = 1.0, fy = 1.0, fz = 1.0;
        if (bond == n - 1 && m.twist != Twist::Periodic) {
            fx = d.x ? 1.0 : -1.0;
            fy = d.y ? 1.0 : -1.0;
            fz = d.z ? 1.0 : -1.0;
        }
        for (size_t s = 0; s < dim; ++s) {
            const double zp = (s >> p) & 1 ? -1.0 : 1.0;
            const double zq = (s >> q) & 1 ? -1.0 : 1.0;
            h(s, s) += 0.5 * fz * j.jz * zp * zq;
            const size_t sf = s ^ (size_t{1} << p) ^ (size_t{1} << q);
            h(sf, s) += 0.5 * (fx * j.jx - fy * j.jy * zp * zq);
        }
    }

    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    const double resid = (h - h.adjoint()).cwiseAbs().maxCoeff();
    if (resid > 1e-10 * scale)
        throw EllipticError("Hamiltonian not Hermitian within tolerance: bad parameter regime");
    h = ((h + h.adjoint()) / 2.0).eval();
    return h;
}

} // namespace ev

#endif // EV_MODEL_HPP
