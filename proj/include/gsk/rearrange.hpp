#pragma once

// Gaussian rearrangement: distribution functions, the decreasing
// rearrangement u*, the half-space rearrangement, and the
// Hardy-Littlewood / Chong-Rice comparison checks.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gsk/gauss.hpp"
#include "gsk/grid.hpp"

namespace gsk {

/// Decreasing rearrangement on (0, gamma(Omega)], stored as breakpoints
/// in the mass coordinate, linear between them. Jumps appear as
/// duplicated abscissae; evaluation takes the right-continuous branch.
struct RearrangedFn {
    std::vector<double> s; // nondecreasing, s.front() == 0
    std::vector<double> u; // nonincreasing
    double total = 0.0;    // gamma(Omega)

    double operator()(double sq) const {
        if (sq <= s.front()) return u.front();
        if (sq >= s.back()) return sq >= total ? 0.0 : u.back();
        auto it = std::upper_bound(s.begin(), s.end(), sq);
        std::size_t i = std::size_t(it - s.begin()) - 1;
        double t = (sq - s[i]) / (s[i + 1] - s[i]);
        return u[i] + t * (u[i + 1] - u[i]);
    }
};

/// L^p norm of u* over (0, gamma(Omega)); matches the weighted norm of
/// the source function by equimeasurability.
inline double lp_norm(const RearrangedFn& r, double p) {
    // 4-point Gauss-Legendre per segment
    static const double gx[4] = {-0.86113631159405257522, -0.33998104358485626480,
                                 0.33998104358485626480, 0.86113631159405257522};
    static const double gw[4] = {0.34785484513745385737, 0.65214515486254614263,
                                 0.65214515486254614263, 0.34785484513745385737};
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < r.s.size(); ++i) {
        double len = r.s[i + 1] - r.s[i];
        if (len <= 0.0) continue;
        for (int k = 0; k < 4; ++k) {
            double t = 0.5 * (1.0 + gx[k]);
            double val = r.u[i] + t * (r.u[i + 1] - r.u[i]);
            acc += 0.5 * len * gw[k] * std::pow(std::abs(val), p);
        }
    }
    return std::pow(acc, 1.0 / p);
}

namespace detail {

// One monotone linear segment of |f|, or a plateau carrying a lump of
// mass at a single value.
struct MonoPiece {
    double va = 0.0, vb = 0.0; // |f| at the two ends
    double xa = 0.0, xb = 0.0; // abscissae (unused for plateaus)
    double mass = 0.0;
    bool plateau = false;

    double lo() const { return std::min(va, vb); }
    double hi() const { return std::max(va, vb); }

    // gamma({|f| > t}) within the piece; caller guarantees lo < t < hi
    // up to clamping.
    double superlevel_mass(double t) const {
        double xc = xa + (t - va) * (xb - xa) / (vb - va);
        if (vb > va) {
            if (xc <= xa) return mass;
            if (xc >= xb) return 0.0;
            return interval_mass(xc, xb);
        }
        if (xc >= xb) return mass;
        if (xc <= xa) return 0.0;
        return interval_mass(xa, xc);
    }
};

// Exact distribution function of a piecewise-linear |f|, organized by
// the sorted nodal levels so that evaluations between adjacent levels
// only touch the straddling pieces.
struct DistributionProfile {
    std::vector<MonoPiece> pieces;
    std::vector<double> levels;           // strictly decreasing, last is 0
    std::vector<double> base;             // per segment: mass entirely above it
    std::vector<std::vector<int>> active; // per segment: straddling pieces
    std::vector<double> plateau_at;       // per level: lump mass at that value
    std::vector<double> mu_at_level;      // mu(levels[k])
    double total = 0.0;

    explicit DistributionProfile(const PiecewiseLinearFn& f) {
        f.check();
        for (std::size_t c = 0; c < f.grids.size(); ++c) {
            const auto& g = f.grids[c];
            const auto& v = f.values[c];
            if (g.left_truncated && g.tail_mass > 0.0) {
                MonoPiece p;
                p.va = p.vb = std::abs(v.front());
                p.mass = g.tail_mass;
                p.plateau = true;
                pieces.push_back(p);
            }
            for (int i = 0; i < g.cells(); ++i) {
                double v0 = v[i], v1 = v[i + 1];
                double x0 = g.x[i], x1 = g.x[i + 1];
                if (v0 * v1 < 0.0) {
                    // split at the zero crossing so |f| is monotone
                    double xz = x0 - v0 * (x1 - x0) / (v1 - v0);
                    double m1 = interval_mass(x0, xz);
                    pieces.push_back({std::abs(v0), 0.0, x0, xz, m1, false});
                    pieces.push_back({0.0, std::abs(v1), xz, x1, g.cell_mass[i] - m1, false});
                } else {
                    MonoPiece p;
                    p.va = std::abs(v0);
                    p.vb = std::abs(v1);
                    p.xa = x0;
                    p.xb = x1;
                    p.mass = g.cell_mass[i];
                    p.plateau = (p.va == p.vb);
                    pieces.push_back(p);
                }
            }
        }
        for (const auto& p : pieces) total += p.mass;

        levels.reserve(2 * pieces.size() + 1);
        for (const auto& p : pieces) {
            levels.push_back(p.lo());
            levels.push_back(p.hi());
        }
        levels.push_back(0.0);
        std::sort(levels.begin(), levels.end(), std::greater<double>());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

        int M = int(levels.size());
        base.assign(std::max(M - 1, 0), 0.0);
        active.assign(std::max(M - 1, 0), {});
        plateau_at.assign(M, 0.0);
        auto idx = [&](double lv) {
            // levels are exact copies of piece endpoint values
            auto it = std::lower_bound(levels.begin(), levels.end(), lv, std::greater<double>());
            return int(it - levels.begin());
        };
        for (int id = 0; id < int(pieces.size()); ++id) {
            const auto& p = pieces[id];
            int k_lo = idx(p.lo());
            if (p.plateau) {
                plateau_at[k_lo] += p.mass;
                if (k_lo < M - 1) base[k_lo] += p.mass; // full below its value
                continue;
            }
            int k_hi = idx(p.hi());
            for (int j = k_hi; j < k_lo; ++j) active[j].push_back(id);
            if (k_lo < M - 1) base[k_lo] += p.mass;
        }
        for (int j = 1; j + 1 < M; ++j) base[j] += base[j - 1];

        mu_at_level.assign(M, 0.0);
        for (int k = 1; k < M; ++k) mu_at_level[k] = mu_in_segment(k - 1, levels[k]);
    }

    // gamma({|f| > t}) for t inside segment j (levels[j+1] <= t < levels[j]).
    double mu_in_segment(int j, double t) const {
        double acc = base[j];
        for (int id : active[j]) acc += pieces[id].superlevel_mass(t);
        return acc;
    }

    int segment_of(double t) const {
        // last j with levels[j] > t
        auto it = std::upper_bound(levels.begin(), levels.end(), t, std::greater<double>());
        int j = int(it - levels.begin()) - 1;
        return std::clamp(j, 0, int(levels.size()) - 2);
    }

    double mu(double t) const {
        if (t >= levels.front()) return 0.0;
        return mu_in_segment(segment_of(t), t);
    }

    double mu_geq(double t) const {
        double acc = mu(t);
        auto it = std::lower_bound(levels.begin(), levels.end(), t, std::greater<double>());
        if (it != levels.end() && *it == t) acc += plateau_at[it - levels.begin()];
        return acc;
    }

};

// Samples the graph of u* inside one segment by walking levels: each
// probe (mu(t), t) lies exactly on the curve, so no inversion is ever
// needed.
inline void refine_rearranged(const DistributionProfile& P, int j, double s_a, double t_a,
                              double s_b, double t_b, double tol_u,
                              std::vector<double>& out_s, std::vector<double>& out_u,
                              int depth = 0) {
    if (depth > 40 || s_b - s_a < 1e-14 || t_a - t_b < tol_u) return;
    double t_m = 0.5 * (t_a + t_b);
    double t_q = 0.75 * t_a + 0.25 * t_b;
    double s_m = P.mu_in_segment(j, t_m);
    double s_q = P.mu_in_segment(j, t_q);
    auto lin = [&](double s) { return t_a + (s - s_a) * (t_b - t_a) / (s_b - s_a); };
    if (std::abs(t_m - lin(s_m)) <= tol_u && std::abs(t_q - lin(s_q)) <= tol_u) return;
    refine_rearranged(P, j, s_a, t_a, s_m, t_m, tol_u, out_s, out_u, depth + 1);
    out_s.push_back(s_m);
    out_u.push_back(t_m);
    refine_rearranged(P, j, s_m, t_m, s_b, t_b, tol_u, out_s, out_u, depth + 1);
}

} // namespace detail

/// gamma({|f| > level}), computed exactly from the piecewise-linear
/// structure of f.
inline double distribution(const PiecewiseLinearFn& f, double level) {
    if (!(level >= 0.0))
        throw std::domain_error("distribution: level must be >= 0");
    return detail::DistributionProfile(f).mu(level);
}

/// u*(s) = inf{t >= 0 : gamma({|f| > t}) <= s}; nonincreasing and
/// right-continuous, equimeasurable with |f|.
inline RearrangedFn decreasing_rearrangement(const PiecewiseLinearFn& f,
                                             double tol_rel = 2e-12) {
    detail::DistributionProfile P(f);
    RearrangedFn r;
    r.total = P.total;
    double scale = std::max(P.levels.front(), 1e-300);
    double tol_u = tol_rel * scale;

    auto push = [&](double s, double u) {
        r.s.push_back(s);
        r.u.push_back(u);
    };
    push(0.0, P.levels.front());
    double s_prev = P.mu_geq(P.levels.front());
    if (s_prev > 0.0) push(s_prev, P.levels.front());
    for (int k = 1; k < int(P.levels.size()); ++k) {
        double t = P.levels[k];
        double s_gt = P.mu_at_level[k];
        if (s_gt > s_prev) {
            detail::refine_rearranged(P, k - 1, s_prev, P.levels[k - 1], s_gt, t, tol_u,
                                      r.s, r.u);
            push(s_gt, t);
        } else {
            push(s_prev, t); // jump across a gap in the range of |f|
        }
        s_prev = std::max(s_gt, s_prev);
        if (P.plateau_at[k] > 0.0) {
            s_prev += P.plateau_at[k];
            push(s_prev, t);
        }
    }
    if (std::abs(r.s.back() - r.total) < 1e-12) r.s.back() = r.total;
    // independent mass evaluations can regress by an ulp; enforce the
    // representation invariants exactly
    for (std::size_t i = 1; i < r.s.size(); ++i) {
        r.s[i] = std::max(r.s[i], r.s[i - 1]);
        r.u[i] = std::min(r.u[i], r.u[i - 1]);
    }
    return r;
}

namespace detail {

inline void refine_halfspace(const RearrangedFn& r, double x_a, double s_a, double u_a,
                             double x_b, double s_b, double u_b, double tol_u, double tol_m,
                             std::vector<double>& out_x, std::vector<double>& out_u,
                             int depth = 0) {
    if (depth > 30 || u_a == u_b || s_b - s_a <= 1e-12) return;
    double x_m = 0.5 * (x_a + x_b);
    double s_m = cdf(x_m);
    double u_true = r(s_m);
    double mass_err = std::abs(s_m - 0.5 * (s_a + s_b));
    double val_err = std::abs(0.5 * (u_a + u_b) - u_true);
    if (val_err <= tol_u && mass_err <= tol_m) return;
    refine_halfspace(r, x_a, s_a, u_a, x_m, s_m, u_true, tol_u, tol_m, out_x, out_u,
                     depth + 1);
    out_x.push_back(x_m);
    out_u.push_back(u_true);
    refine_halfspace(r, x_m, s_m, u_true, x_b, s_b, u_b, tol_u, tol_m, out_x, out_u,
                     depth + 1);
}

} // namespace detail

/// u#(x) = u*(cdf(x)) on the half-space of the same Gaussian measure,
/// resampled onto an adaptively refined node set so that both the
/// weighted norms and the distribution function carry over to ~1e-11.
inline PiecewiseLinearFn halfspace_rearrangement(const PiecewiseLinearFn& f,
                                                 double tail_eps = 1e-15) {
    RearrangedFn r = decreasing_rearrangement(f);
    double m = r.total;
    if (!(m > 0.0 && m < 1.0))
        throw std::domain_error("halfspace_rearrangement: measure outside (0,1)");
    double tau = quantile(m);
    double scale = std::max(std::abs(r.u.front()), 1e-300);
    double tol_u = 1e-12 * scale, tol_m = 2e-11;

    // raw nodes at the breakpoints, jumps widened into 1e-13-mass ramps
    double s_min = std::min(tail_eps, 0.5 * m);
    std::vector<double> bs, bu;
    bs.push_back(s_min);
    bu.push_back(r(s_min));
    for (std::size_t k = 0; k < r.s.size(); ++k) {
        double sk = std::min(r.s[k], m);
        if (sk <= s_min) continue; // deep tail, covered by the first node
        if (sk <= bs.back()) {
            sk = bs.back() + 1e-13;
            if (sk >= m) continue;
        }
        bs.push_back(sk);
        bu.push_back(r.u[k]);
    }
    if (bs.back() < m) {
        bs.push_back(m);
        bu.push_back(r.u.back());
    }

    std::vector<double> xs, vs;
    for (std::size_t k = 0; k < bs.size(); ++k) {
        double xk = (bs[k] >= m) ? tau : quantile(bs[k]);
        if (!xs.empty() && xk <= xs.back()) continue;
        xs.push_back(xk);
        vs.push_back(bu[k]);
    }
    if (xs.size() < 2) {
        xs.insert(xs.begin(), xs.front() - 1.0);
        vs.insert(vs.begin(), vs.front());
    }

    std::vector<double> rx, ru;
    rx.push_back(xs.front());
    ru.push_back(vs.front());
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        detail::refine_halfspace(r, xs[k], cdf(xs[k]), vs[k], xs[k + 1], cdf(xs[k + 1]),
                                 vs[k + 1], tol_u, tol_m, rx, ru);
        rx.push_back(xs[k + 1]);
        ru.push_back(vs[k + 1]);
    }

    PiecewiseLinearFn g;
    g.domain = Domain1D({{neg_inf, tau}});
    g.grids.push_back(WeightedGrid::from_nodes(std::move(rx), true));
    g.values.push_back(std::move(ru));
    g.check();
    return g;
}

struct HardyLittlewoodReport {
    double lhs = 0.0; // integral of f g against gamma
    double rhs = 0.0; // integral of f* g* over (0, gamma(Omega))
    bool ok = false;
};

/// Checks the Hardy-Littlewood inequality for nonnegative f, g sharing
/// one discretization.
inline HardyLittlewoodReport hardy_littlewood_check(const PiecewiseLinearFn& f,
                                                    const PiecewiseLinearFn& g,
                                                    double tol = 1e-10) {
    f.check();
    g.check();
    if (f.grids.size() != g.grids.size())
        throw std::invalid_argument("hardy_littlewood_check: domain mismatch");
    for (std::size_t c = 0; c < f.grids.size(); ++c)
        if (f.grids[c].x != g.grids[c].x)
            throw std::invalid_argument("hardy_littlewood_check: domain mismatch");

    double lhs = 0.0;
    for (std::size_t c = 0; c < f.grids.size(); ++c) {
        const auto& gr = f.grids[c];
        for (int i = 0; i < gr.cells(); ++i) {
            double x0 = gr.x[i], x1 = gr.x[i + 1];
            double fs = (f.values[c][i + 1] - f.values[c][i]) / (x1 - x0);
            double gs = (g.values[c][i + 1] - g.values[c][i]) / (x1 - x0);
            for (std::size_t q = gr.qoff[i]; q < gr.qoff[i + 1]; ++q) {
                double fv = f.values[c][i] + fs * (gr.qx[q] - x0);
                double gv = g.values[c][i] + gs * (gr.qx[q] - x0);
                lhs += gr.qw[q] * fv * gv;
            }
        }
        if (gr.left_truncated)
            lhs += gr.tail_mass * f.tail_value(c) * g.tail_value(c);
    }

    RearrangedFn fr = decreasing_rearrangement(f);
    RearrangedFn gr2 = decreasing_rearrangement(g);
    std::vector<double> bp;
    bp.reserve(fr.s.size() + gr2.s.size());
    bp.insert(bp.end(), fr.s.begin(), fr.s.end());
    bp.insert(bp.end(), gr2.s.begin(), gr2.s.end());
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

    // 3-point Gauss-Legendre per merged segment; product of two linears
    static const double gx3[3] = {-0.77459666924148337704, 0.0, 0.77459666924148337704};
    static const double gw3[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    double rhs = 0.0;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        double len = bp[i + 1] - bp[i];
        if (len <= 0.0) continue;
        for (int k = 0; k < 3; ++k) {
            double sq = bp[i] + 0.5 * len * (1.0 + gx3[k]);
            rhs += 0.5 * len * gw3[k] * fr(sq) * gr2(sq);
        }
    }
    HardyLittlewoodReport rep;
    rep.lhs = lhs;
    rep.rhs = rhs;
    rep.ok = lhs <= rhs + tol * std::max(1.0, std::abs(rhs));
    return rep;
}

enum class ChongRice { dominated, not_dominated };

/// Tests whether the cumulative rearrangement of f stays below that of
/// g for every mass level (the comparison relation of Chong-Rice type).
inline ChongRice chong_rice_compare(const PiecewiseLinearFn& f, const PiecewiseLinearFn& g,
                                    double tol = 1e-10) {
    RearrangedFn fr = decreasing_rearrangement(f);
    RearrangedFn gr = decreasing_rearrangement(g);

    auto prefix = [](const RearrangedFn& r) {
        std::vector<double> C(r.s.size(), 0.0);
        for (std::size_t i = 0; i + 1 < r.s.size(); ++i)
            C[i + 1] = C[i] + 0.5 * (r.u[i] + r.u[i + 1]) * (r.s[i + 1] - r.s[i]);
        return C;
    };
    std::vector<double> Cf = prefix(fr), Cg = prefix(gr);
    auto cum = [](const RearrangedFn& r, const std::vector<double>& C, double t) {
        if (t <= r.s.front()) return 0.0;
        if (t >= r.s.back()) return C.back();
        auto it = std::upper_bound(r.s.begin(), r.s.end(), t);
        std::size_t i = std::size_t(it - r.s.begin()) - 1;
        double dt = t - r.s[i];
        double slope = (r.u[i + 1] - r.u[i]) / (r.s[i + 1] - r.s[i]);
        return C[i] + r.u[i] * dt + 0.5 * slope * dt * dt;
    };

    double t_max = std::max(fr.total, gr.total);
    std::vector<double> grid;
    grid.insert(grid.end(), fr.s.begin(), fr.s.end());
    grid.insert(grid.end(), gr.s.begin(), gr.s.end());
    for (int i = 1; i <= 256; ++i) grid.push_back(t_max * i / 256.0);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    double scale = std::max({Cf.back(), Cg.back(), 1e-300});
    for (double t : grid)
        if (cum(fr, Cf, t) > cum(gr, Cg, t) + tol * scale)
            return ChongRice::not_dominated;
    return ChongRice::dominated;
}

} // namespace gsk
