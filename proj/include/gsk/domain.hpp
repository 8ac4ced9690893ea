#pragma once

// Eigenvalue and generalized torsion on finite unions of intervals,
// Gaussian symmetrization of domains, and verification reports for the
// inequalities relating a domain to its symmetrized half-line
// (Faber-Krahn, Saint-Venant, the torsion-matched eigenvalue bound,
// the mass comparison and the Payne-Rayner norm bound).

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gsk/gauss.hpp"
#include "gsk/grid.hpp"
#include "gsk/halfspace.hpp"
#include "gsk/rearrange.hpp"

namespace gsk {

/// The half-line (-inf, t).
struct HalfSpace {
    double t = 0.0;
};

struct DomainSpectralReport {
    double lambda1 = 0.0;
    std::vector<EigenResult> per_component;
    std::size_t argmin_component = 0;
};

struct DomainTorsionReport {
    double q_total = 0.0;
    std::vector<TorsionResult> per_component;
    double alpha = 0.0;
};

/// Torsion-matched eigenvalue comparison: with t(alpha) chosen so that
/// Q(alpha, H_{t(alpha)}) = Q(alpha, Omega), the half-line eigenvalue
/// bounds lambda1(Omega) from below.
struct KJReport {
    double alpha = 0.0;
    double q = 0.0;
    double t_alpha = 0.0;
    double lambda1_omega = 0.0;
    double lambda1_halfspace = 0.0;
    double margin = 0.0;       // lambda1_omega - lambda1_halfspace
    bool inclusion_ok = false; // t_alpha <= quantile(gamma(omega))
};

struct FaberKrahnReport {
    double lambda1_omega = 0.0;
    double lambda1_sym = 0.0;
    double margin = 0.0; // lambda1_omega - lambda1_sym
    bool ok = false;
};

struct SaintVenantReport {
    double t_omega = 0.0; // p-torsional rigidity (Q/(p-1))^{p-1}
    double t_sym = 0.0;
    double margin = 0.0; // t_sym - t_omega
    bool ok = false;
};

struct MassComparisonReport {
    double t_alpha = 0.0;
    struct Point {
        double r = 0.0;
        double m = 0.0;
        double lhs = 0.0; // cumulative integral of (v#)^m up to r
        double rhs = 0.0; // same for the half-line comparison function
    };
    std::vector<Point> points;
    double worst = 0.0; // max over points of lhs - rhs
    bool ok = false;
};

struct PayneRaynerReport {
    double lambda1 = 0.0;
    double t_tilde = 0.0; // lambda1(H_{t_tilde}) = lambda1(omega)
    double beta = 0.0;    // ||w||_m / ||w||_q for the half-line eigenfunction
    double lhs = 0.0;     // ||u||_m
    double rhs = 0.0;     // beta ||u||_q
    double margin = 0.0;  // rhs - lhs
    bool ok = false;
    double cumulative_worst = 0.0; // max over r of lhs_r - rhs_r
    bool cumulative_ok = false;
};

namespace detail {

inline PiecewiseLinearFn wrap_component(WeightedGrid g, std::vector<double> v,
                                        const Interval& iv) {
    PiecewiseLinearFn f;
    f.domain = Domain1D({iv});
    f.grids.push_back(std::move(g));
    f.values.push_back(std::move(v));
    return f;
}

/// Far-out half-lines are solved on the conditioned (rescaled) measure;
/// restore gamma weights so norm ratios and cumulative integrals are
/// comparable with quantities measured in the true Gaussian measure.
inline void restore_gamma_weights(PiecewiseLinearFn& f, double t) {
    WeightedGrid& g = f.grids[0];
    double gm = g.tail_mass;
    for (double cm : g.cell_mass) gm += cm;
    double ratio = cdf(t) / gm;
    if (std::abs(ratio - 1.0) > 1e-9) {
        g.tail_mass *= ratio;
        for (auto& cm : g.cell_mass) cm *= ratio;
        for (auto& qw : g.qw) qw *= ratio;
    }
}

} // namespace detail

/// First eigenvalue on a union of intervals: the minimum over the
/// per-component eigenvalues (functions on a disjoint union decouple).
inline DomainSpectralReport lambda1_domain(double p, const Domain1D& omega,
                                           const SolverOptions& opt = {}) {
    if (!(p > 1.0)) throw std::domain_error("lambda1_domain: requires p > 1");
    omega.validate();
    DomainSpectralReport rep;
    rep.lambda1 = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < omega.size(); ++c) {
        const Interval& iv = omega.intervals[c];
        WeightedGrid g =
            detail::make_solver_grid(iv.a, iv.b, opt.n, opt.tail_eps, opt.quad_order);
        detail::GridSystem S{&g, std::isfinite(iv.a), p};
        detail::GridSolve sol = detail::eigen_grid(S, opt);
        double nrm = std::pow(S.mass_p(sol.v), 1.0 / p);
        for (auto& x : sol.v) x /= nrm;
        EigenResult er;
        er.lambda = sol.value;
        er.residual = sol.residual;
        er.boundary_slope = std::abs(detail::right_boundary_slope(g, sol.v));
        er.u = detail::wrap_component(std::move(g), std::move(sol.v), iv);
        if (er.lambda < rep.lambda1) {
            rep.lambda1 = er.lambda;
            rep.argmin_component = c;
        }
        rep.per_component.push_back(std::move(er));
    }
    return rep;
}

/// Generalized torsion on a union of intervals: component maximizations
/// decouple, so q_total is the sum of the per-component values. A
/// precomputed spectral report may be passed to avoid re-solving the
/// eigenproblem for the feasibility check.
inline DomainTorsionReport torsion_domain(double p, double alpha, const Domain1D& omega,
                                          const SolverOptions& opt = {},
                                          const DomainSpectralReport* spectral = nullptr) {
    if (!(p > 1.0)) throw std::domain_error("torsion_domain: requires p > 1");
    omega.validate();
    DomainSpectralReport local;
    if (alpha >= 0.0 && spectral == nullptr) {
        local = lambda1_domain(p, omega, opt);
        spectral = &local;
    }
    if (spectral && !(alpha < spectral->lambda1 - 1e-9))
        throw InfeasibleError("torsion_domain: alpha >= lambda1(omega), Q is infinite");
    DomainTorsionReport rep;
    rep.alpha = alpha;
    for (std::size_t c = 0; c < omega.size(); ++c) {
        const Interval& iv = omega.intervals[c];
        WeightedGrid g =
            detail::make_solver_grid(iv.a, iv.b, opt.n, opt.tail_eps, opt.quad_order);
        detail::GridSystem S{&g, std::isfinite(iv.a), p};
        std::optional<double> l1;
        if (spectral) l1 = spectral->per_component[c].lambda;
        detail::GridSolve sol = detail::torsion_grid(S, alpha, l1, opt);
        TorsionResult tr;
        tr.q = sol.value;
        tr.residual = sol.residual;
        tr.boundary_slope = std::abs(detail::right_boundary_slope(g, sol.v));
        tr.v = detail::wrap_component(std::move(g), std::move(sol.v), iv);
        rep.q_total += tr.q;
        rep.per_component.push_back(std::move(tr));
    }
    return rep;
}

/// Assembles the torsion function on the whole domain from the
/// per-component solves.
inline PiecewiseLinearFn torsion_function(const Domain1D& omega,
                                          const DomainTorsionReport& rep) {
    PiecewiseLinearFn f;
    f.domain = omega;
    for (const auto& c : rep.per_component) {
        f.grids.push_back(c.v.grids[0]);
        f.values.push_back(c.v.values[0]);
    }
    f.check();
    return f;
}

/// The first eigenfunction as a function on the whole domain: the
/// argmin component's eigenfunction extended by zero.
inline PiecewiseLinearFn eigenfunction_on_domain(const Domain1D& omega,
                                                 const DomainSpectralReport& rep) {
    PiecewiseLinearFn f;
    f.domain = omega;
    for (std::size_t c = 0; c < rep.per_component.size(); ++c) {
        const auto& u = rep.per_component[c].u;
        f.grids.push_back(u.grids[0]);
        if (c == rep.argmin_component)
            f.values.push_back(u.values[0]);
        else
            f.values.emplace_back(u.values[0].size(), 0.0);
    }
    f.check();
    return f;
}

/// The half-line with the same Gaussian measure as omega.
inline HalfSpace symmetrize_domain(const Domain1D& omega) {
    omega.validate();
    return HalfSpace{quantile(omega.total_mass())};
}

/// lambda1(omega) >= lambda1 of the symmetrized half-line.
inline FaberKrahnReport faber_krahn_check(double p, const Domain1D& omega,
                                          const SolverOptions& opt = {},
                                          double tol = 1e-6) {
    DomainSpectralReport sp = lambda1_domain(p, omega, opt);
    double ls = lambda1_halfspace(p, symmetrize_domain(omega).t, opt).lambda;
    FaberKrahnReport r;
    r.lambda1_omega = sp.lambda1;
    r.lambda1_sym = ls;
    r.margin = sp.lambda1 - ls;
    r.ok = r.margin >= -tol * std::max(1.0, ls);
    return r;
}

/// p-torsional rigidity T = (Q(0, .)/(p-1))^{p-1} is maximized by the
/// symmetrized half-line.
inline SaintVenantReport saint_venant_check(double p, const Domain1D& omega,
                                            const SolverOptions& opt = {},
                                            double tol = 1e-6) {
    DomainTorsionReport qo = torsion_domain(p, 0.0, omega, opt);
    TorsionResult qs = torsion_halfspace(p, 0.0, symmetrize_domain(omega).t, opt);
    auto rigidity = [&](double q) { return std::pow(q / (p - 1.0), p - 1.0); };
    SaintVenantReport r;
    r.t_omega = rigidity(qo.q_total);
    r.t_sym = rigidity(qs.q);
    r.margin = r.t_sym - r.t_omega;
    r.ok = r.margin >= -tol * std::max(1.0, r.t_sym);
    return r;
}

/// Matches the domain's torsion with a half-line at the same alpha and
/// compares the eigenvalues.
inline KJReport kj_verify(double p, double alpha, const Domain1D& omega,
                          const SolverOptions& opt = {}) {
    DomainSpectralReport sp = lambda1_domain(p, omega, opt);
    DomainTorsionReport tq = torsion_domain(p, alpha, omega, opt, &sp);
    KJReport r;
    r.alpha = alpha;
    r.q = tq.q_total;
    r.t_alpha = invert_q(p, alpha, r.q, opt);
    r.lambda1_omega = sp.lambda1;
    r.lambda1_halfspace = lambda1_halfspace(p, r.t_alpha, opt).lambda;
    r.margin = r.lambda1_omega - r.lambda1_halfspace;
    // 1e-6 slack: t(alpha) carries the inverted-Q discretization error,
    // which is amplified where Q is flat in t
    r.inclusion_ok = r.t_alpha <= quantile(omega.total_mass()) + 1e-6;
    return r;
}

/// t(alpha) over an ascending alpha grid; the map is nonincreasing.
inline std::vector<std::pair<double, double>> t_alpha_scan(
    double p, const Domain1D& omega, const std::vector<double>& alpha_grid,
    const SolverOptions& opt = {}) {
    DomainSpectralReport sp = lambda1_domain(p, omega, opt);
    std::vector<std::pair<double, double>> out;
    double prev = -std::numeric_limits<double>::infinity();
    for (double a : alpha_grid) {
        if (!(a > prev))
            throw std::invalid_argument("t_alpha_scan: alpha grid must be ascending");
        prev = a;
        DomainTorsionReport tq = torsion_domain(p, a, omega, opt, &sp);
        out.emplace_back(a, invert_q(p, a, tq.q_total, opt));
    }
    return out;
}

/// integral of |f|^m against gamma over {x < r}, with f extended by
/// zero outside its domain.
inline double cumulative_pow_integral(const PiecewiseLinearFn& f, double m, double r) {
    f.check();
    double acc = 0.0;
    std::vector<double> xi, w;
    for (std::size_t c = 0; c < f.grids.size(); ++c) {
        const WeightedGrid& g = f.grids[c];
        const std::vector<double>& v = f.values[c];
        if (g.left_truncated) {
            if (r <= g.x.front()) {
                acc += cdf(r) * std::pow(std::abs(v.front()), m);
                continue;
            }
            acc += g.tail_mass * std::pow(std::abs(v.front()), m);
        } else if (r <= g.x.front()) {
            continue;
        }
        for (int i = 0; i < g.cells(); ++i) {
            if (g.x[i + 1] <= r) {
                double x0 = g.x[i];
                double sl = (v[i + 1] - v[i]) / (g.x[i + 1] - x0);
                for (std::size_t k = g.qoff[i]; k < g.qoff[i + 1]; ++k)
                    acc += g.qw[k] * std::pow(std::abs(v[i] + sl * (g.qx[k] - x0)), m);
                continue;
            }
            if (g.x[i] >= r) break;
            // partial cell [x_i, r): composite panels in the mass coordinate
            if (xi.empty()) detail::gauss_legendre(g.quad_order, xi, w);
            double x0 = g.x[i];
            double sl = (v[i + 1] - v[i]) / (g.x[i + 1] - x0);
            int nsub = std::clamp(int(std::ceil((r - x0) / 0.25)), 1, 64);
            double s_cur = cdf(x0);
            for (int j = 0; j < nsub; ++j) {
                double xa = x0 + (r - x0) * j / nsub;
                double xb = x0 + (r - x0) * (j + 1) / nsub;
                double mass = (xa < xb) ? interval_mass(xa, xb) : 0.0;
                if (mass <= 0.0) continue;
                for (int k = 0; k < g.quad_order; ++k) {
                    double s = s_cur + 0.5 * mass * (1.0 + xi[k]);
                    double fv = v[i] + sl * (quantile(s) - x0);
                    acc += 0.5 * mass * w[k] * std::pow(std::abs(fv), m);
                }
                s_cur += mass;
            }
            break;
        }
    }
    return acc;
}

/// integral of (u*(s))^m over (0, min(s_limit, total)). Since the
/// half-space rearrangement is u#(x) = u*(cdf(x)), this equals the
/// cumulative integral of (u#)^m against gamma up to quantile(s_limit)
/// without resampling onto a half-space grid.
inline double cumulative_pow_rearranged(const RearrangedFn& r, double m, double s_limit) {
    static const double gx4[4] = {-0.86113631159405257522, -0.33998104358485626480,
                                  0.33998104358485626480, 0.86113631159405257522};
    static const double gw4[4] = {0.34785484513745385737, 0.65214515486254614263,
                                  0.65214515486254614263, 0.34785484513745385737};
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < r.s.size(); ++i) {
        double sa = r.s[i], sb = std::min(r.s[i + 1], s_limit);
        if (sb <= sa) break;
        double inv = 1.0 / (r.s[i + 1] - r.s[i]);
        for (int k = 0; k < 4; ++k) {
            double s = sa + 0.5 * (sb - sa) * (1.0 + gx4[k]);
            double t = (s - r.s[i]) * inv;
            double val = r.u[i] + t * (r.u[i + 1] - r.u[i]);
            acc += 0.5 * (sb - sa) * gw4[k] * std::pow(std::abs(val), m);
        }
    }
    if (s_limit > r.s.back() && r.s.back() < r.total) {
        double sb = std::min(s_limit, r.total);
        acc += (sb - r.s.back()) * std::pow(std::abs(r.u.back()), m);
    }
    return acc;
}

/// count points in (-inf, t] splitting it into slabs of equal Gaussian
/// mass; the last point is t itself.
inline std::vector<double> equal_measure_r_grid(double t, int count = 20) {
    if (count < 1) throw std::invalid_argument("equal_measure_r_grid: count must be >= 1");
    std::vector<double> r(count);
    double st = cdf(t);
    for (int j = 1; j <= count; ++j)
        r[j - 1] = (j == count) ? t : quantile(st * j / count);
    return r;
}

/// Cumulative comparison of the rearranged torsion function against the
/// torsion function of the torsion-matched half-line: for every r <=
/// t(alpha) and every exponent m >= 1, the half-line side dominates.
inline MassComparisonReport mass_comparison_check(
    double p, double alpha, const Domain1D& omega, const std::vector<double>& m_list,
    const std::vector<double>& r_grid_in = {}, const SolverOptions& opt = {},
    double tol = 1e-6) {
    for (double m : m_list)
        if (!(m >= 1.0))
            throw std::domain_error("mass_comparison_check: requires m >= 1");
    DomainTorsionReport tq = torsion_domain(p, alpha, omega, opt);
    // 1e-9 resolution: two orders below the verification tolerance
    RearrangedFn vs = decreasing_rearrangement(torsion_function(omega, tq), 1e-9);
    MassComparisonReport rep;
    rep.t_alpha = invert_q(p, alpha, tq.q_total, opt);
    TorsionResult vb = torsion_halfspace(p, alpha, rep.t_alpha, opt);
    detail::restore_gamma_weights(vb.v, rep.t_alpha);
    std::vector<double> r_grid =
        r_grid_in.empty() ? equal_measure_r_grid(rep.t_alpha) : r_grid_in;
    rep.worst = -std::numeric_limits<double>::infinity();
    rep.ok = true;
    for (double m : m_list)
        for (double r : r_grid) {
            if (!(r <= rep.t_alpha + 1e-12))
                throw std::invalid_argument("mass_comparison_check: r beyond t(alpha)");
            MassComparisonReport::Point pt;
            pt.r = r;
            pt.m = m;
            pt.lhs = cumulative_pow_rearranged(vs, m, cdf(r));
            pt.rhs = cumulative_pow_integral(vb.v, m, r);
            rep.worst = std::max(rep.worst, pt.lhs - pt.rhs);
            if (pt.lhs > pt.rhs + tol * std::max(1.0, pt.rhs)) rep.ok = false;
            rep.points.push_back(pt);
        }
    return rep;
}

/// Norm comparison of the domain eigenfunction against the half-line
/// eigenfunction at the same eigenvalue: ||u||_m <= beta ||u||_q with
/// beta the half-line norm ratio, plus the cumulative comparison of the
/// rearranged eigenfunction against the q-matched half-line one.
inline PayneRaynerReport payne_rayner_check(double p, const Domain1D& omega, double q_exp,
                                            double m_exp, const SolverOptions& opt = {},
                                            double tol = 1e-6) {
    if (!(1.0 <= q_exp && q_exp <= m_exp))
        throw std::domain_error("payne_rayner_check: requires 1 <= q <= m");
    DomainSpectralReport sp = lambda1_domain(p, omega, opt);
    const PiecewiseLinearFn& u = sp.per_component[sp.argmin_component].u;
    PayneRaynerReport rep;
    rep.lambda1 = sp.lambda1;
    rep.t_tilde = t_bar(p, sp.lambda1, opt);
    EigenResult wr = lambda1_halfspace(p, rep.t_tilde, opt);
    // beta is not scale-invariant in the measure, so undo any conditioning
    detail::restore_gamma_weights(wr.u, rep.t_tilde);
    double wq = lp_norm(wr.u, q_exp), wm = lp_norm(wr.u, m_exp);
    double uq = lp_norm(u, q_exp), um = lp_norm(u, m_exp);
    rep.beta = wm / wq;
    rep.lhs = um;
    rep.rhs = rep.beta * uq;
    rep.margin = rep.rhs - rep.lhs;
    rep.ok = rep.lhs <= rep.rhs + tol * std::max(1.0, rep.rhs);
    // scale the half-line eigenfunction so its q-integral matches u's
    PiecewiseLinearFn ws = wr.u;
    double c = uq / wq;
    for (auto& val : ws.values[0]) val *= c;
    RearrangedFn us = decreasing_rearrangement(u, 1e-9);
    rep.cumulative_worst = -std::numeric_limits<double>::infinity();
    rep.cumulative_ok = true;
    for (double r : equal_measure_r_grid(rep.t_tilde)) {
        double lhs = cumulative_pow_rearranged(us, m_exp, cdf(r));
        double rhs = cumulative_pow_integral(ws, m_exp, r);
        rep.cumulative_worst = std::max(rep.cumulative_worst, lhs - rhs);
        if (lhs > rhs + tol * std::max(1.0, rhs)) rep.cumulative_ok = false;
    }
    return rep;
}

/// Reproducible random union of 1-3 intervals: component masses in
/// [0.02, 0.4] with total <= 0.8, gaps of mass [0.02, 0.15], and a 35%
/// chance that the first component is a half-line.
inline Domain1D random_domain(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    // fixed bit-to-double mapping keeps the stream library-independent
    auto unif = [&](double lo, double hi) {
        return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
    };
    for (int attempt = 0; attempt < 1000; ++attempt) {
        int k = 1 + int(rng() % 3);
        std::vector<double> mass(k);
        double total = 0.0;
        for (auto& m : mass) {
            m = unif(0.02, 0.4);
            total += m;
        }
        if (total > 0.8) continue;
        bool halfline = unif(0.0, 1.0) < 0.35;
        std::vector<Interval> ivs;
        double s = 0.0;
        bool bad = false;
        for (int c = 0; c < k; ++c) {
            double a;
            if (c == 0 && halfline) {
                a = neg_inf;
            } else {
                s += unif(0.02, 0.15);
                a = quantile(s);
            }
            s += mass[c];
            if (s > 0.95) {
                bad = true;
                break;
            }
            ivs.push_back({a, quantile(s)});
        }
        if (bad) continue;
        return Domain1D(std::move(ivs));
    }
    throw SolverError("random_domain: rejection sampling failed");
}

} // namespace gsk
