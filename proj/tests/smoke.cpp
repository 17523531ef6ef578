// Temporary development smoke checks; superseded by the Catch2 suites.
#include <cstdio>

#include "ev/bae.hpp"
#include "ev/identities.hpp"
#include "ev/io.hpp"
#include "ev/thermo.hpp"

using namespace ev;

int main() {
    const Complex tau(0, 0.6);

    // theta basics
    std::printf("sigma(0)            = %.3e (want 0)\n", std::abs(sigma(Complex(0), tau)));
    const Complex u0(0.3, 0.1);
    std::printf("sigma(u+1)+sigma(u) = %.3e\n", std::abs(sigma(u0 + 1.0, tau) + sigma(u0, tau)));
    const Complex q = sigma(u0 + tau, tau) +
                      std::exp(-2.0 * kI * kPi * (u0 + tau / 2.0)) * sigma(u0, tau);
    std::printf("quasi-tau           = %.3e\n", std::abs(q));

    // identities
    const auto ids = identity_battery(tau, 50);
    std::printf("identity battery max residual = %.3e\n", ids.max());

    // fourier closed forms vs quadrature
    std::printf("A quad resid = %.3e\n",
                fourier_A_quadrature_residual(tau, kI * 0.35 * 0.7, 5));
    std::printf("B quad resid = %.3e\n",
                fourier_B_quadrature_residual(Complex(0, 1.6), Complex(0, 0.5), 5));

    // couplings vs trig limit
    {
        const auto c = couplings_raw(Complex(0, 25), Complex(0.3, 0));
        std::printf("trig limit: jx=%.6f%+.1ei jy=%.6f jz=%.6f (cos=%.6f)\n", c.jx.real(),
                    c.jx.imag(), c.jy.real(), c.jz.real(), std::cos(0.3 * kPi));
    }
    {
        const auto p = EllipticParams::make(tau, Complex(0.7, 0));
        const auto c = couplings(p);
        std::printf("eta=0.7: jx=%.6f jy=%.6f jz=%.6f\n", c.jx.real(), c.jy.real(), c.jz.real());
    }

    // R(0) = permutation
    {
        const auto p = EllipticParams::make(tau, Complex(0.7, 0));
        const Matrix4c r = r_matrix(Complex(0), p);
        Matrix4c perm = Matrix4c::Zero();
        perm(0, 0) = perm(1, 2) = perm(2, 1) = perm(3, 3) = 1.0;
        std::printf("R(0)-P = %.3e\n", (r - perm).cwiseAbs().maxCoeff());
    }

    // QYBE residual at one triple
    {
        const auto p = EllipticParams::make(tau, Complex(0.7, 0));
        auto embed = [&](const Matrix4c& r, int a, int b) {
            MatrixXc m = MatrixXc::Zero(8, 8);
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j) {
                    const int ia = (i >> (2 - a)) & 1, ja = (j >> (2 - a)) & 1;
                    const int ib = (i >> (2 - b)) & 1, jb = (j >> (2 - b)) & 1;
                    const int ic = i & ~((1 << (2 - a)) | (1 << (2 - b)));
                    const int jc = j & ~((1 << (2 - a)) | (1 << (2 - b)));
                    if (ic != jc) continue;
                    m(i, j) = r(ia * 2 + ib, ja * 2 + jb);
                }
            return m;
        };
        const Complex u1(0.13, 0.02), u2(-0.07, 0.05), u3(0.21, -0.04);
        const MatrixXc r12 = embed(r_matrix(u1 - u2, p), 0, 1);
        const MatrixXc r13 = embed(r_matrix(u1 - u3, p), 0, 2);
        const MatrixXc r23 = embed(r_matrix(u2 - u3, p), 1, 2);
        std::printf("QYBE resid = %.3e\n",
                    (r12 * r13 * r23 - r23 * r13 * r12).cwiseAbs().maxCoeff());
    }

    // transfer matrix: commutativity + Hamiltonian generation at N=4
    {
        const auto p = EllipticParams::make(tau, Complex(0.7, 0));
        const auto model = SpinChainModel::make(4, p, Twist::Periodic);
        const MatrixXc t1 = transfer_matrix(Complex(0.11, 0.05), model);
        const MatrixXc t2 = transfer_matrix(Complex(-0.23, 0.02), model);
        std::printf("[t,t] rel = %.3e\n", (t1 * t2 - t2 * t1).norm() / (t1.norm() * t2.norm()));

        const double h = 1e-5;
        auto dln = [&](double hh) {
            const MatrixXc tp = transfer_matrix(Complex(hh, 0), model);
            const MatrixXc tm = transfer_matrix(Complex(-hh, 0), model);
            const MatrixXc t0 = transfer_matrix(Complex(0, 0), model);
            return MatrixXc(t0.partialPivLu().solve((tp - tm) / (2 * hh)));
        };
        const MatrixXc d1 = dln(h), d2 = dln(h / 2);
        const MatrixXc dln_t = (4.0 * d2 - d1) / 3.0;
        const Complex pref = sigma(p.eta, p) / sigma_prime(Complex(0), p);
        const MatrixXc h_gen =
            pref * (dln_t - 0.5 * 4.0 * zeta_fn(p.eta, p) * MatrixXc::Identity(16, 16));
        const MatrixXc h_dir = hamiltonian(model);
        std::printf("H(gen)-H(dir) rel = %.3e\n",
                    (h_gen - h_dir).cwiseAbs().maxCoeff() / h_dir.cwiseAbs().maxCoeff());
    }

    // diagonalize + zeros + energy at N=4, all twists, both regimes
    for (int regime = 0; regime < 2; ++regime) {
        const Complex tt = regime == 0 ? Complex(0, 0.6) : Complex(0, 1.6);
        const Complex ee = regime == 0 ? Complex(0.7, 0) : Complex(0, 0.4);
        const auto p = EllipticParams::make(tt, ee);
        for (Twist tw : {Twist::Periodic, Twist::X, Twist::Y, Twist::Z}) {
            const auto model = SpinChainModel::make(4, p, tw);
            const auto recs = diagonalize(model);
            for (StateSel sel : {StateSel::Ground, StateSel::FirstExcited}) {
                const auto& rec = select_states(recs, sel);
                try {
                    const auto an = analyze_state(model, rec);
                    std::printf(
                        "reg=%d tw=%c %s: E_diag=%+.8f E_zero=%+.8f dE=%.2e n1=%d M1=%d M2=%d "
                        "rule=%d wind=%.3f\n",
                        regime, twist_char(tw), sel == StateSel::Ground ? "gnd" : "exc",
                        rec.energy, an.energy, std::abs(rec.energy - an.energy),
                        an.zs.bulk_count, an.zs.m1, an.zs.m2, int(an.zs.regime_rule_ok),
                        an.zs.winding);
                } catch (const std::exception& e) {
                    std::printf("reg=%d tw=%c %s: FAILED: %s\n", regime, twist_char(tw),
                                sel == StateSel::Ground ? "gnd" : "exc", e.what());
                }
            }
        }
    }

    // thermo quick values
    {
        const auto p = EllipticParams::make(tau, Complex(0.7, 0));
        SeriesInfo si;
        const double er = energy_density(p, Regime::RealLarge, {}, &si);
        std::printf("e_r(0.6i, 0.7) = %.12f  kmax=%ld tail=%.1e\n", er, si.kmax_used, si.tail);
        const double ew = discrete_zero_energy(Complex(0.3, 0), p, Regime::RealLarge);
        std::printf("E^w_r(tau/2i) = %.12f\n", ew);
        const double gap = excitation_gap(p, Regime::RealLarge, Twist::Periodic, Parity::Even);
        std::printf("gap = %.12f\n", gap);
    }
    {
        const auto p = EllipticParams::make(Complex(0, 1.6), Complex(0, 1.0));
        const double ei = energy_density(p, Regime::ImagLarge);
        std::printf("e_i(1.6i, i) = %.12f\n", ei);
    }

    // BAE at N=2, beta=x, eta=tau/2
    {
        const auto pt = degenerate_eta(-1, 0, 2, 2, Twist::X, tau);
        std::printf("degenerate eta (N=2, x): %.4f%+.4fi [%s]\n", pt.eta.real(), pt.eta.imag(),
                    pt.interval);
        const auto model =
            SpinChainModel::make(2, EllipticParams::unchecked(tau, pt.eta), Twist::X);
        EdLambdaTable table(model);
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> dre(-0.4, 0.4), dim(-0.18, 0.18);
        std::vector<Complex> probes;
        for (int i = 0; i < 20; ++i) probes.emplace_back(dre(rng), dim(rng));
        int solved = 0, matched = 0;
        for (int k = 1; k <= 4; ++k) {
            for (double x1 : {0.0, 0.21, -0.17}) {
                for (double x2 : {0.37, -0.29, 0.11}) {
                    try {
                        const auto st = solve_bae(
                            pt, string_seed({{1, 1, x1}, {1, 1, x2}}, pt.eta, pt.tau), k);
                        ++solved;
                        const auto m = match_tq(st, pt, table, probes);
                        if (m.max_rel_err < 1e-6) ++matched;
                    } catch (const std::exception&) {
                    }
                }
            }
        }
        std::printf("BAE N=2 x: solved=%d matched=%d\n", solved, matched);
    }
    return 0;
}
