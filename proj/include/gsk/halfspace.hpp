#pragma once

// First Dirichlet eigenvalue and generalized torsion of the weighted
// p-Laplacian on half-lines (-inf, t), with shape derivatives and the
// inverse maps t_bar(alpha) and t(alpha). The grid-level solvers are
// shared with the general-domain module.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsk/gauss.hpp"
#include "gsk/grid.hpp"

namespace gsk {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Requested quantity does not exist (e.g. torsion with alpha >= lambda1).
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverOptions {
    int n = 4096;             // cells per interval
    double tail_eps = 1e-15;  // truncation mass of an unbounded tail
    int quad_order = 6;
    double tol = 1e-11;       // relative Euler-Lagrange residual target
    int max_outer = 400;      // eigen inverse-power iterations
    int max_newton = 80;
};

struct EigenResult {
    double lambda = 0.0;
    PiecewiseLinearFn u;        // ||u||_p = 1, u >= 0, u(t) = 0
    double boundary_slope = 0.0; // |u'(t)|
    double residual = 0.0;
};

struct TorsionResult {
    double q = 0.0;
    PiecewiseLinearFn v;         // v >= 0, v(t) = 0
    double boundary_slope = 0.0; // |v'(t)|
    double residual = 0.0;
};

namespace detail {

struct Tridiag {
    std::vector<double> d; // diagonal
    std::vector<double> e; // subdiagonal, size d.size()-1

    void resize(std::size_t n) {
        d.assign(n, 0.0);
        e.assign(n > 0 ? n - 1 : 0, 0.0);
    }
};

// LDL^T solve; returns false on a vanishing (or negative, when
// require_pd) pivot.
inline bool tridiag_solve(const Tridiag& T, const std::vector<double>& b,
                          std::vector<double>& x, bool require_pd = true) {
    std::size_t n = T.d.size();
    std::vector<double> diag(n), low(n > 0 ? n - 1 : 0);
    for (std::size_t i = 0; i < n; ++i) {
        double piv = T.d[i];
        if (i > 0) piv -= low[i - 1] * low[i - 1] * diag[i - 1];
        if (!(std::abs(piv) > 1e-300) || (require_pd && piv <= 0.0)) return false;
        diag[i] = piv;
        if (i + 1 < n) low[i] = T.e[i] / piv;
    }
    x = b;
    for (std::size_t i = 1; i < n; ++i) x[i] -= low[i - 1] * x[i - 1];
    for (std::size_t i = 0; i < n; ++i) x[i] /= diag[i];
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= low[i] * x[i + 1];
    return true;
}

// regularized |s|^p pieces: value, first and second derivative
inline double pw_val(double s, double p, double d2) {
    return std::pow(s * s + d2, 0.5 * p);
}
inline double pw_d1(double s, double p, double d2) {
    if (s == 0.0) return 0.0;
    return p * s * std::pow(s * s + d2, 0.5 * p - 1.0);
}
inline double pw_d2(double s, double p, double d2) {
    if (p == 2.0) return 2.0;
    double t = s * s + d2;
    if (t == 0.0) return p > 2.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return p * std::pow(t, 0.5 * p - 2.0) * ((p - 1.0) * s * s + d2);
}

// One grid with Dirichlet data at the right node and optionally the
// left node; a truncated tail contributes plateau terms for node 0.
struct GridSystem {
    const WeightedGrid* g = nullptr;
    bool dir_left = false;
    double p = 2.0;

    int nodes() const { return g->nodes(); }
    int first_free() const { return dir_left ? 1 : 0; }
    int nfree() const { return nodes() - 1 - first_free(); }

    bool tail() const { return g->left_truncated; }

    double energy(const std::vector<double>& v, double d2 = 0.0) const {
        double acc = 0.0;
        for (int i = 0; i < g->cells(); ++i) {
            double sl = (v[i + 1] - v[i]) / (g->x[i + 1] - g->x[i]);
            acc += g->cell_mass[i] * (d2 == 0.0 ? std::pow(std::abs(sl), p)
                                                : pw_val(sl, p, d2));
        }
        return acc;
    }

    double mass_p(const std::vector<double>& v) const {
        double acc = integrate_abs_pow(*g, v, p);
        if (tail()) acc += g->tail_mass * std::pow(std::abs(v.front()), p);
        return acc;
    }

    double load(const std::vector<double>& v) const {
        double acc = integrate_linear(*g, v);
        if (tail()) acc += g->tail_mass * v.front();
        return acc;
    }

    void add_grad_energy(const std::vector<double>& v, double d2, double coef,
                         std::vector<double>& out) const {
        for (int i = 0; i < g->cells(); ++i) {
            double h = g->x[i + 1] - g->x[i];
            double sl = (v[i + 1] - v[i]) / h;
            double a = coef * g->cell_mass[i] * pw_d1(sl, p, d2) / h;
            out[i] -= a;
            out[i + 1] += a;
        }
    }

    void add_hess_energy(const std::vector<double>& v, double d2, double coef,
                         Tridiag& T) const {
        for (int i = 0; i < g->cells(); ++i) {
            double h = g->x[i + 1] - g->x[i];
            double sl = (v[i + 1] - v[i]) / h;
            double a = coef * g->cell_mass[i] * pw_d2(sl, p, d2) / (h * h);
            T.d[i] += a;
            T.d[i + 1] += a;
            T.e[i] -= a;
        }
    }

    // gradient / Hessian of integral of |w|^p (optionally with exponent
    // q != p for the eigen load terms)
    void add_grad_mass(const std::vector<double>& v, double q, double d2, double coef,
                       std::vector<double>& out) const {
        for (int i = 0; i < g->cells(); ++i) {
            double x0 = g->x[i], h = g->x[i + 1] - x0;
            double sl = (v[i + 1] - v[i]) / h;
            for (std::size_t k = g->qoff[i]; k < g->qoff[i + 1]; ++k) {
                double psi1 = (g->qx[k] - x0) / h;
                double w = v[i] + sl * (g->qx[k] - x0);
                double a = coef * g->qw[k] * pw_d1(w, q, d2);
                out[i] += a * (1.0 - psi1);
                out[i + 1] += a * psi1;
            }
        }
        if (tail()) out[0] += coef * g->tail_mass * pw_d1(v.front(), q, d2);
    }

    void add_hess_mass(const std::vector<double>& v, double d2, double coef,
                       Tridiag& T) const {
        for (int i = 0; i < g->cells(); ++i) {
            double x0 = g->x[i], h = g->x[i + 1] - x0;
            double sl = (v[i + 1] - v[i]) / h;
            for (std::size_t k = g->qoff[i]; k < g->qoff[i + 1]; ++k) {
                double psi1 = (g->qx[k] - x0) / h;
                double w = v[i] + sl * (g->qx[k] - x0);
                double a = coef * g->qw[k] * pw_d2(w, p, d2);
                T.d[i] += a * (1.0 - psi1) * (1.0 - psi1);
                T.d[i + 1] += a * psi1 * psi1;
                T.e[i] += a * psi1 * (1.0 - psi1);
            }
        }
        if (tail()) T.d[0] += coef * g->tail_mass * pw_d2(v.front(), p, d2);
    }

    void add_grad_load(double coef, std::vector<double>& out) const {
        for (int i = 0; i < g->cells(); ++i) {
            double x0 = g->x[i], h = g->x[i + 1] - x0;
            for (std::size_t k = g->qoff[i]; k < g->qoff[i + 1]; ++k) {
                double psi1 = (g->qx[k] - x0) / h;
                out[i] += coef * g->qw[k] * (1.0 - psi1);
                out[i + 1] += coef * g->qw[k] * psi1;
            }
        }
        if (tail()) out[0] += coef * g->tail_mass;
    }

    // lumped nodal masses, used as the dual-norm weight
    std::vector<double> lumped() const {
        std::vector<double> m(nodes(), 0.0);
        add_grad_load(1.0, m);
        return m;
    }

    // restrict a full nodal vector to the free unknowns
    void extract(const std::vector<double>& full, std::vector<double>& fr) const {
        fr.assign(full.begin() + first_free(), full.end() - 1);
    }
    void extract(const Tridiag& full, Tridiag& fr) const {
        int f = first_free(), n = nfree();
        fr.resize(n);
        for (int i = 0; i < n; ++i) fr.d[i] = full.d[f + i];
        for (int i = 0; i + 1 < n; ++i) fr.e[i] = full.e[f + i];
    }
    void scatter(const std::vector<double>& fr, std::vector<double>& full) const {
        std::fill(full.begin(), full.end(), 0.0);
        std::copy(fr.begin(), fr.end(), full.begin() + first_free());
    }

    double dual_norm(const std::vector<double>& full_resid,
                     const std::vector<double>& lump) const {
        double acc = 0.0;
        for (int i = first_free(); i < nodes() - 1; ++i)
            acc += full_resid[i] * full_resid[i] / std::max(lump[i], 1e-300);
        return std::sqrt(acc);
    }
};

struct GridSolve {
    double value = 0.0; // lambda or q
    std::vector<double> v;
    double residual = 0.0;
};

// smallest eigenpair of the p = 2 quadratic forms by shifted inverse
// iteration on the tridiagonal pencil
inline GridSolve eigen_p2(const GridSystem& S) {
    Tridiag Af, Mf, Afull, Mfull, shifted;
    Afull.resize(S.nodes());
    Mfull.resize(S.nodes());
    std::vector<double> unit(S.nodes(), 1.0);
    GridSystem S2 = S;
    S2.p = 2.0;
    S2.add_hess_energy(unit, 0.0, 0.5, Afull); // Hessian of v^T A v is 2A
    S2.add_hess_mass(unit, 0.0, 0.5, Mfull);
    S.extract(Afull, Af);
    S.extract(Mfull, Mf);

    int n = S.nfree();
    std::vector<double> x(n), y(n), z(n);
    std::vector<double> lump_full = S.lumped();
    for (int i = 0; i < n; ++i) x[i] = lump_full[S.first_free() + i] + 1e-12;

    auto mulA = [&](const std::vector<double>& a, std::vector<double>& out) {
        for (int i = 0; i < n; ++i) {
            out[i] = Af.d[i] * a[i];
            if (i > 0) out[i] += Af.e[i - 1] * a[i - 1];
            if (i + 1 < n) out[i] += Af.e[i] * a[i + 1];
        }
    };
    auto mulM = [&](const std::vector<double>& a, std::vector<double>& out) {
        for (int i = 0; i < n; ++i) {
            out[i] = Mf.d[i] * a[i];
            if (i > 0) out[i] += Mf.e[i - 1] * a[i - 1];
            if (i + 1 < n) out[i] += Mf.e[i] * a[i + 1];
        }
    };
    auto rayleigh = [&](const std::vector<double>& a) {
        mulA(a, y);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < n; ++i) num += a[i] * y[i];
        mulM(a, y);
        for (int i = 0; i < n; ++i) den += a[i] * y[i];
        return num / den;
    };

    double lambda = rayleigh(x), sigma = 0.0;
    for (int it = 0; it < 200; ++it) {
        shifted.resize(n);
        for (int i = 0; i < n; ++i) shifted.d[i] = Af.d[i] - sigma * Mf.d[i];
        for (int i = 0; i + 1 < n; ++i) shifted.e[i] = Af.e[i] - sigma * Mf.e[i];
        mulM(x, y);
        if (!tridiag_solve(shifted, y, z, false))
            throw SolverError("eigen_p2: singular shifted system");
        double nrm = 0.0;
        for (double c : z) nrm = std::max(nrm, std::abs(c));
        for (auto& c : z) c /= nrm;
        double sum = 0.0;
        for (double c : z) sum += c;
        if (sum < 0.0)
            for (auto& c : z) c = -c;
        x = z;
        double next = rayleigh(x);
        double change = std::abs(next - lambda);
        lambda = next;
        if (it < 3) sigma = 0.0;
        else if (change > 1e-9 * std::abs(lambda)) sigma = 0.99 * lambda;
        else sigma = lambda * (1.0 - 1e-10);
        if (change <= 1e-14 * std::abs(lambda) && it > 5) break;
    }

    GridSolve out;
    out.value = lambda;
    out.v.assign(S.nodes(), 0.0);
    for (int i = 0; i < n; ++i) out.v[S.first_free() + i] = std::max(x[i], 0.0);
    // residual in the dual norm
    mulA(x, y);
    mulM(x, z);
    std::vector<double> rfull(S.nodes(), 0.0);
    for (int i = 0; i < n; ++i) rfull[S.first_free() + i] = y[i] - lambda * z[i];
    out.residual = S.dual_norm(rfull, lump_full) / std::max(lambda, 1.0);
    return out;
}

// Newton minimization of J(w) = E(w)/p - b.w over the free unknowns
// (convex); warm started from v. Returns false on breakdown.
inline bool convex_inner_solve(const GridSystem& S, const std::vector<double>& b,
                               std::vector<double>& v, double d2s, int max_newton) {
    int nn = S.nodes();
    std::vector<double> grad(nn), dir_full(nn), trial(nn), fr, dfr;
    Tridiag Hfull, Hf;
    auto J = [&](const std::vector<double>& w) {
        double dot = 0.0;
        for (int i = 0; i < nn; ++i) dot += b[i] * w[i];
        return S.energy(w, d2s) / S.p - dot;
    };
    double Jcur = J(v);
    double bscale = 1e-300;
    for (int i = S.first_free(); i < nn - 1; ++i) bscale = std::max(bscale, std::abs(b[i]));
    double prev_gnorm = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_newton; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        S.add_grad_energy(v, d2s, 1.0 / S.p, grad);
        for (int i = 0; i < nn; ++i) grad[i] -= b[i];
        Hfull.resize(nn);
        S.add_hess_energy(v, d2s, 1.0 / S.p, Hfull);
        S.extract(Hfull, Hf);
        S.extract(grad, fr);
        double gnorm = 0.0;
        for (double c : fr) gnorm = std::max(gnorm, std::abs(c));
        if (it > 0 && gnorm <= 1e-13 * bscale) return true;
        if (it > 1 && gnorm >= 0.7 * prev_gnorm && gnorm <= 1e-7 * bscale) return true;
        prev_gnorm = gnorm;
        if (!tridiag_solve(Hf, fr, dfr)) {
            // rounding can cost the ill-scaled Hessian its positive
            // pivots right at the minimum; a tiny diagonal lift fixes
            // the factorization without changing the converged iterate
            bool fixed = false;
            double lift = 1e-14;
            for (int tries = 0; tries < 4 && !fixed; ++tries, lift *= 1e3) {
                Tridiag Hl = Hf;
                for (auto& dd : Hl.d) dd += lift * std::abs(dd);
                fixed = tridiag_solve(Hl, fr, dfr);
            }
            if (!fixed) return gnorm <= 1e-7 * bscale;
        }
        S.scatter(dfr, dir_full);
        double step = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 40; ++ls) {
            for (int i = 0; i < nn; ++i) trial[i] = v[i] - step * dir_full[i];
            double Jt = J(trial);
            if (Jt < Jcur) {
                v = trial;
                Jcur = Jt;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) {
            // J is at its rounding floor; the full Newton step can still
            // reduce the gradient, which is what the residual reports
            for (int i = 0; i < nn; ++i) trial[i] = v[i] - dir_full[i];
            std::fill(grad.begin(), grad.end(), 0.0);
            S.add_grad_energy(trial, d2s, 1.0 / S.p, grad);
            for (int i = 0; i < nn; ++i) grad[i] -= b[i];
            S.extract(grad, fr);
            double gtrial = 0.0;
            for (double c : fr) gtrial = std::max(gtrial, std::abs(c));
            if (gtrial < gnorm) {
                v = trial;
                continue;
            }
            return it > 0; // stagnated at the minimum
        }
    }
    return true;
}

inline GridSolve eigen_grid(const GridSystem& S, const SolverOptions& opt) {
    GridSolve base = eigen_p2(S);
    if (S.p == 2.0) {
        double nrm = std::pow(S.mass_p(base.v), 1.0 / S.p);
        for (auto& c : base.v) c /= nrm;
        return base;
    }
    int nn = S.nodes();
    std::vector<double> u = base.v;
    double nrm = std::pow(S.mass_p(u), 1.0 / S.p);
    for (auto& c : u) c /= nrm;
    double lambda = S.energy(u);
    std::vector<double> b(nn), lump = S.lumped();

    double slmax = 0.0;
    for (int i = 0; i < S.g->cells(); ++i)
        slmax = std::max(slmax, std::abs((u[i + 1] - u[i]) / (S.g->x[i + 1] - S.g->x[i])));

    std::vector<double> u_prev;
    double du_prev = std::numeric_limits<double>::infinity();
    double umax_prev = 1.0;
    for (int outer = 0; outer < opt.max_outer; ++outer) {
        std::fill(b.begin(), b.end(), 0.0);
        // load lambda * u^{p-1} tested against the basis
        S.add_grad_mass(u, S.p, 0.0, lambda / S.p, b);
        // small enough that the smoothing of |s|^p is invisible even at
        // the near-zero slopes around an interior maximum
        double d2s = 1e-24 * slmax * slmax + 1e-300;
        u_prev = u;
        bool solved = convex_inner_solve(S, b, u, d2s, opt.max_newton);
        // the degenerate Hessian can lose definiteness to rounding at
        // near-zero slopes; heavier smoothing restores solvability with
        // a bias well below the discretization error
        for (int retry = 0; !solved && retry < 3; ++retry) {
            d2s *= 1e6;
            u = u_prev;
            solved = convex_inner_solve(S, b, u, d2s, opt.max_newton);
        }
        if (!solved) {
            // rounding can break the ill-scaled Hessian right at the
            // minimum; keep the last fully processed iterate
            if (outer > 5 && du_prev <= 1e-7 * umax_prev) {
                u = u_prev;
                break;
            }
            throw SolverError("eigen_grid: inner Newton breakdown");
        }
        nrm = std::pow(S.mass_p(u), 1.0 / S.p);
        for (auto& c : u) c /= nrm;
        lambda = S.energy(u);
        // lambda converges twice as fast as u, so track the iterate itself
        double du = 0.0, umax = 0.0;
        for (int i = 0; i < nn; ++i) {
            du = std::max(du, std::abs(u[i] - u_prev[i]));
            umax = std::max(umax, std::abs(u[i]));
        }
        if (du <= 1e-11 * umax && outer > 3) break;
        du_prev = du;
        umax_prev = umax;
    }

    GridSolve out;
    out.value = lambda;
    out.v = u;
    std::vector<double> r(nn, 0.0);
    S.add_grad_energy(u, 0.0, 1.0, r);
    S.add_grad_mass(u, S.p, 0.0, -lambda, r);
    out.residual = S.dual_norm(r, lump) / (S.p * std::max(lambda, 1.0));
    return out;
}

// Newton ascent on F_alpha at a fixed alpha; returns false when the
// Hessian loses definiteness (caller shrinks the continuation step).
inline bool torsion_newton(const GridSystem& S, double alpha, std::vector<double>& v,
                           const std::vector<double>& lump, double tol, int max_newton,
                           double* resid_out = nullptr) {
    int nn = S.nodes();
    std::vector<double> grad(nn), fr, dfr, dir_full(nn), trial(nn);
    Tridiag Hfull, Hf;
    auto value_F = [&](const std::vector<double>& w, double d2s, double d2w) {
        double E = S.energy(w, d2s);
        double N = integrate_abs_pow(*S.g, w, S.p) +
                   (S.tail() ? S.g->tail_mass * pw_val(w.front(), S.p, d2w) : 0.0);
        return -E + alpha * N + S.p * S.load(w);
    };
    double prev_gnorm = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_newton; ++it) {
        double vmax = 1e-8;
        double slmax = 1e-8;
        for (double c : v) vmax = std::max(vmax, std::abs(c));
        for (int i = 0; i < S.g->cells(); ++i)
            slmax = std::max(slmax, std::abs((v[i + 1] - v[i]) / (S.g->x[i + 1] - S.g->x[i])));
        double d2s = 1e-16 * slmax * slmax, d2w = 1e-16 * vmax * vmax;

        std::fill(grad.begin(), grad.end(), 0.0);
        S.add_grad_energy(v, d2s, -1.0, grad);
        S.add_grad_mass(v, S.p, d2w, alpha, grad);
        S.add_grad_load(S.p, grad);
        double gscale = S.p + std::abs(alpha) * S.p * std::pow(vmax, S.p - 1.0) +
                        S.p * std::pow(slmax, S.p - 1.0);
        double gnorm = S.dual_norm(grad, lump);
        if (resid_out) *resid_out = gnorm / gscale;
        if (it > 0 && gnorm <= tol * gscale) return true;
        // rounding floor of the assembled gradient: no further progress
        if (it > 1 && gnorm >= 0.7 * prev_gnorm && gnorm <= 1e4 * tol * gscale) return true;
        prev_gnorm = gnorm;

        Hfull.resize(nn);
        S.add_hess_energy(v, d2s, 1.0, Hfull); // -H, with H the F Hessian
        S.add_hess_mass(v, d2w, -alpha, Hfull);
        S.extract(Hfull, Hf);
        S.extract(grad, fr);
        if (!tridiag_solve(Hf, fr, dfr)) return false;
        S.scatter(dfr, dir_full);

        double Fcur = value_F(v, d2s, d2w);
        double step = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 50; ++ls) {
            for (int i = 0; i < nn; ++i) trial[i] = v[i] + step * dir_full[i];
            if (value_F(trial, d2s, d2w) >= Fcur) {
                v = trial;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) {
            // at the maximizer up to line-search resolution
            return gnorm <= 1e3 * tol * gscale;
        }
    }
    return true;
}

inline GridSolve torsion_grid(const GridSystem& S, double alpha,
                              std::optional<double> lambda1, const SolverOptions& opt) {
    double l1 = 0.0;
    if (alpha >= 0.0) {
        l1 = lambda1 ? *lambda1 : eigen_grid(S, opt).value;
        if (!(alpha < l1 * (1.0 - 1e-12)))
            throw InfeasibleError("torsion: alpha >= lambda1, Q is infinite");
    }
    int nn = S.nodes();
    std::vector<double> lump = S.lumped();

    // p = 2 seed at a safe alpha
    double alpha0 = std::min(alpha, 0.0);
    std::vector<double> v(nn, 0.0);
    {
        GridSystem S2 = S;
        S2.p = 2.0;
        Tridiag Hfull, Hf;
        Hfull.resize(nn);
        std::vector<double> unit(nn, 1.0), b(nn, 0.0), fr, sol;
        S2.add_hess_energy(unit, 0.0, 0.5, Hfull);
        Tridiag Mfull;
        Mfull.resize(nn);
        S2.add_hess_mass(unit, 0.0, 0.5, Mfull);
        double a2 = std::min(alpha0, 0.0);
        for (std::size_t i = 0; i < Hfull.d.size(); ++i) Hfull.d[i] -= a2 * Mfull.d[i];
        for (std::size_t i = 0; i < Hfull.e.size(); ++i) Hfull.e[i] -= a2 * Mfull.e[i];
        S.add_grad_load(1.0, b);
        S.extract(Hfull, Hf);
        S.extract(b, fr);
        if (!tridiag_solve(Hf, fr, sol))
            throw SolverError("torsion_grid: seed solve failed");
        S.scatter(sol, v);
    }

    double resid = 0.0;
    if (!torsion_newton(S, alpha0, v, lump, opt.tol, opt.max_newton, &resid))
        throw SolverError("torsion_grid: Newton failed at the starting alpha");

    // continuation toward positive alpha
    double cur = alpha0;
    double frac = 0.5;
    int guard = 0;
    while (cur < alpha && guard++ < 500) {
        double next = std::min(alpha, cur + std::max(frac * (l1 - cur), 1e-18));
        std::vector<double> save = v;
        if (torsion_newton(S, next, v, lump, opt.tol, opt.max_newton, &resid)) {
            cur = next;
            frac = std::min(0.5, frac * 1.5);
        } else {
            v = save;
            frac *= 0.5;
            if (frac < 1e-8)
                throw SolverError("torsion_grid: continuation stalled");
        }
    }
    if (cur < alpha) throw SolverError("torsion_grid: continuation did not reach alpha");

    GridSolve out;
    out.v = v;
    out.value = (S.p - 1.0) * S.load(v);
    out.residual = resid;
    return out;
}

// Equal-mass grading leaves the leftmost cells of a truncated tail
// several units wide in x; cap the width so the piecewise-linear space
// can resolve curvature there (for p > 2 the eigenfunction grows
// into the tail, so the tail carries real L^p mass). A few hundred
// extra nodes.
inline WeightedGrid make_solver_grid(double a, double b, int n, double tail_eps,
                                     int quad_order, double max_cell_dx = 0.0125) {
    WeightedGrid base = WeightedGrid::make(a, b, n, tail_eps, quad_order);
    std::vector<double> nodes;
    nodes.reserve(base.x.size() + 1024);
    nodes.push_back(base.x[0]);
    for (int i = 0; i < base.cells(); ++i) {
        double x0 = base.x[i], x1 = base.x[i + 1];
        int ns = std::clamp(int(std::ceil((x1 - x0) / max_cell_dx)), 1, 2048);
        for (int j = 1; j <= ns; ++j) nodes.push_back(x0 + (x1 - x0) * j / ns);
    }
    nodes.back() = base.x.back();
    return WeightedGrid::from_nodes(std::move(nodes), base.left_truncated, quad_order);
}

// derivative of the outgoing solution at the right boundary node, from
// the quadratic through the last three nodes
inline double right_boundary_slope(const WeightedGrid& g, const std::vector<double>& v) {
    int n = g.nodes();
    double xa = g.x[n - 3], xb = g.x[n - 2], xc = g.x[n - 1];
    double fa = v[n - 3], fb = v[n - 2], fc = v[n - 1];
    return fa * (xc - xb) / ((xa - xb) * (xa - xc)) +
           fb * (xc - xa) / ((xb - xa) * (xb - xc)) +
           fc * (2 * xc - xa - xb) / ((xc - xa) * (xc - xb));
}

inline PiecewiseLinearFn wrap_halfline(WeightedGrid g, std::vector<double> v, double t) {
    PiecewiseLinearFn f;
    f.domain = Domain1D({{neg_inf, t}});
    f.grids.push_back(std::move(g));
    f.values.push_back(std::move(v));
    return f;
}

// For far-out half-lines the Gaussian cell masses are subnormal-range
// and the assembled systems lose all precision. The solves are run on
// the conditioned (probability) measure instead; the returned scale
// restores measure-proportional quantities such as Q.
inline double condition_measure(WeightedGrid& g) {
    double total = g.tail_mass;
    for (double m : g.cell_mass) total += m;
    if (total >= 1e-8) return 1.0;
    double inv = 1.0 / total;
    g.tail_mass *= inv;
    for (auto& m : g.cell_mass) m *= inv;
    for (auto& w : g.qw) w *= inv;
    return total;
}

} // namespace detail

/// First eigenvalue and normalized positive eigenfunction on H_t. (For
/// half-lines of Gaussian mass below 1e-8 the eigenfunction is
/// normalized in the conditioned measure to stay inside double range.)
inline EigenResult lambda1_halfspace(double p, double t, const SolverOptions& opt = {}) {
    if (!(p > 1.0)) throw std::domain_error("lambda1_halfspace: requires p > 1");
    if (!std::isfinite(t)) throw std::domain_error("lambda1_halfspace: t must be finite");
    WeightedGrid g = detail::make_solver_grid(neg_inf, t, opt.n, opt.tail_eps, opt.quad_order);
    detail::condition_measure(g);
    detail::GridSystem S{&g, false, p};
    detail::GridSolve sol = detail::eigen_grid(S, opt);
    double nrm = std::pow(S.mass_p(sol.v), 1.0 / p);
    for (auto& c : sol.v) c /= nrm;
    EigenResult res;
    res.lambda = sol.value;
    res.residual = sol.residual;
    res.boundary_slope = std::abs(detail::right_boundary_slope(g, sol.v));
    res.u = detail::wrap_halfline(std::move(g), std::move(sol.v), t);
    return res;
}

/// d lambda1(H_t) / dt = -(p-1) |u'(t)|^p phi(t).
inline double lambda1_shape_derivative(double p, double t, const SolverOptions& opt = {}) {
    EigenResult r = lambda1_halfspace(p, t, opt);
    return -(p - 1.0) * std::pow(r.boundary_slope, p) * pdf(t);
}

/// Generalized torsion Q_p(alpha, H_t) with its maximizer.
inline TorsionResult torsion_halfspace(double p, double alpha, double t,
                                       const SolverOptions& opt = {}) {
    if (!(p > 1.0)) throw std::domain_error("torsion_halfspace: requires p > 1");
    WeightedGrid g = detail::make_solver_grid(neg_inf, t, opt.n, opt.tail_eps, opt.quad_order);
    // the maximizer is unchanged by rescaling the measure; Q scales
    double scale = detail::condition_measure(g);
    detail::GridSystem S{&g, false, p};
    detail::GridSolve sol = detail::torsion_grid(S, alpha, std::nullopt, opt);
    TorsionResult res;
    res.q = scale * sol.value;
    res.residual = sol.residual;
    res.boundary_slope = std::abs(detail::right_boundary_slope(g, sol.v));
    res.v = detail::wrap_halfline(std::move(g), std::move(sol.v), t);
    return res;
}

/// dQ/dt = (p-1) |v'(t)|^p phi(t) > 0.
inline double q_shape_derivative(double p, double alpha, double t,
                                 const SolverOptions& opt = {}) {
    TorsionResult r = torsion_halfspace(p, alpha, t, opt);
    return (p - 1.0) * std::pow(r.boundary_slope, p) * pdf(t);
}

/// dQ/dalpha = integral of v^p against gamma > 0.
inline double q_alpha_derivative(double p, double alpha, double t,
                                 const SolverOptions& opt = {}) {
    TorsionResult r = torsion_halfspace(p, alpha, t, opt);
    return lp_norm(r.v, p) == 0.0 ? 0.0 : std::pow(lp_norm(r.v, p), p);
}

/// Largest alpha for which the blow-up threshold t_bar (and hence the
/// inversion of t -> Q) stays inside the representable half-line range.
inline double max_representable_alpha(double p, const SolverOptions& opt = {}) {
    return lambda1_halfspace(p, -33.0, opt).lambda;
}

/// The threshold t with lambda1(H_t) = alpha (alpha > 0); Newton on the
/// strictly decreasing map with a bisection safeguard.
inline double t_bar(double p, double alpha, const SolverOptions& opt = {}) {
    if (!(alpha > 0.0)) throw std::domain_error("t_bar: requires alpha > 0");
    double lo = -1.0, hi = 1.0;
    EigenResult rlo = lambda1_halfspace(p, lo, opt);
    EigenResult rhi = lambda1_halfspace(p, hi, opt);
    int guard = 0;
    while (rlo.lambda < alpha) { // need lambda(lo) >= alpha
        // below ~-34 the Gaussian mass of the half-line underflows
        if (lo <= -34.0)
            throw InfeasibleError("t_bar: alpha exceeds the representable half-line range");
        hi = lo;
        rhi = rlo;
        lo = std::max(lo - std::max(1.0, std::abs(lo)), -34.0);
        rlo = lambda1_halfspace(p, lo, opt);
        if (++guard > 60) throw SolverError("t_bar: bracket expansion failed (low)");
    }
    while (rhi.lambda > alpha) {
        // beyond ~8 the half-line carries all representable mass and its
        // eigenvalue is below double resolution: no representable threshold
        if (hi >= 8.0) return std::numeric_limits<double>::infinity();
        lo = hi;
        rlo = rhi;
        hi = std::min(hi + std::max(1.0, std::abs(hi)), 8.0);
        rhi = lambda1_halfspace(p, hi, opt);
        if (++guard > 60) throw SolverError("t_bar: bracket expansion failed (high)");
    }
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
        EigenResult r = lambda1_halfspace(p, t, opt);
        double f = r.lambda - alpha;
        if (std::abs(f) <= 1e-9 * std::max(alpha, 1.0)) return t;
        if (f > 0.0) lo = t;
        else hi = t;
        double deriv = -(p - 1.0) * std::pow(r.boundary_slope, p) * pdf(t);
        double tn = t - f / deriv;
        t = (tn > lo && tn < hi) ? tn : 0.5 * (lo + hi);
    }
    throw SolverError("t_bar: did not converge");
}

/// The threshold t(alpha) with Q_p(alpha, H_t) = q_target, using the
/// strict monotonicity of t -> Q.
inline double invert_q(double p, double alpha, double q_target,
                       const SolverOptions& opt = {}) {
    if (!(q_target > 0.0)) throw std::domain_error("invert_q: requires q_target > 0");
    if (alpha < 0.0) {
        double bound = (p - 1.0) * std::pow(-1.0 / alpha, 1.0 / (p - 1.0));
        if (q_target >= bound)
            throw InfeasibleError("invert_q: q_target at or above the full-space value");
    }
    double hi_cap = std::numeric_limits<double>::infinity();
    double t_blow = std::numeric_limits<double>::infinity();
    if (alpha > 0.0) {
        t_blow = t_bar(p, alpha, opt);
        hi_cap = t_blow - 1e-6;
    }

    // Approaching t_blow, v scales like (lambda1(H_t) - alpha)^{-1/(p-1)}
    // and the ascent runs out of floating-point headroom. Q is
    // astronomically large there, so for the monotone inversion a
    // breakdown near the threshold can be read as Q = +infinity.
    auto qval = [&](double t, double* slope) -> double {
        try {
            TorsionResult r = torsion_halfspace(p, alpha, t, opt);
            if (slope) *slope = r.boundary_slope;
            return r.q;
        } catch (const SolverError&) {
            if (t_blow - t <= 0.05 * std::max(1.0, std::abs(t_blow))) {
                if (slope) *slope = 0.0;
                return std::numeric_limits<double>::infinity();
            }
            throw;
        }
    };
    // start safely below the blow-up threshold
    double hi = std::isfinite(hi_cap)
                    ? std::min(1.0, hi_cap - 0.05 * std::max(1.0, std::abs(hi_cap)))
                    : 1.0;
    double lo = std::min(-1.0, hi - 1.0); // the cap can sit far below -1
    double qlo = qval(lo, nullptr), qhi = qval(hi, nullptr);
    int guard = 0;
    while (qlo > q_target) {
        if (lo <= -34.0)
            throw InfeasibleError(
                "invert_q: q_target below the representable half-line range");
        hi = lo;
        qhi = qlo;
        lo = std::max(lo - std::max(1.0, std::abs(lo)), -34.0);
        qlo = qval(lo, nullptr);
        if (++guard > 60) throw SolverError("invert_q: bracket expansion failed (low)");
    }
    while (qhi < q_target) {
        if (hi >= hi_cap - 1e-6)
            // Q blows up on (hi, t_blow); the target is attained inside
            // that sliver and t is pinned to its width.
            return 0.5 * (hi + t_blow);
        // without a blow-up cap the grid itself limits the range: past ~8
        // the half-line carries all representable mass
        if (!std::isfinite(hi_cap) && hi >= 8.0)
            throw InfeasibleError(
                "invert_q: q_target above the representable half-line range");
        lo = hi;
        qlo = qhi;
        // creep up on the blow-up threshold instead of jumping onto it
        hi = std::min(hi + std::max(1.0, std::abs(hi)),
                      std::isfinite(hi_cap) ? 0.5 * (hi + hi_cap) : 8.0);
        qhi = qval(hi, nullptr);
        if (++guard > 120) throw SolverError("invert_q: bracket expansion failed (high)");
    }
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
        double slope = 0.0;
        double f = qval(t, &slope) - q_target;
        // where Q is flat in t the residual criterion alone leaves too
        // much slack in t, so also drive the bracket itself down
        if (std::abs(f) <= 1e-10 * q_target ||
            hi - lo <= 1e-9 * std::max(1.0, std::abs(t)))
            return t;
        if (f > 0.0) hi = t;
        else lo = t;
        double deriv = (p - 1.0) * std::pow(slope, p) * pdf(t);
        double tn = t - f / deriv;
        t = (tn > lo && tn < hi) ? tn : 0.5 * (lo + hi);
    }
    throw SolverError("invert_q: did not converge");
}

} // namespace gsk
