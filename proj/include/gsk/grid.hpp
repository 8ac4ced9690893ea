#pragma once

// Discretization support: 1-D domains as unions of intervals, graded
// node sets with per-cell quadrature against the Gaussian weight, and
// piecewise-linear nodal functions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsk/gauss.hpp"

namespace gsk {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

struct Interval {
    double a = 0.0; // may be -inf on the leftmost component
    double b = 0.0;
};

/// Finite union of disjoint open intervals with Gaussian measure < 1.
struct Domain1D {
    std::vector<Interval> intervals;

    Domain1D() = default;
    explicit Domain1D(std::vector<Interval> ivs) : intervals(std::move(ivs)) {
        validate();
    }

    void validate() const {
        if (intervals.empty())
            throw std::domain_error("Domain1D: empty domain");
        for (std::size_t i = 0; i < intervals.size(); ++i) {
            const auto& iv = intervals[i];
            if (!(iv.a < iv.b))
                throw std::domain_error("Domain1D: interval must satisfy a < b");
            if (i > 0 && !(intervals[i - 1].b <= iv.a))
                throw std::domain_error("Domain1D: intervals must be disjoint and ordered");
            if (i > 0 && std::isinf(iv.a))
                throw std::domain_error("Domain1D: only the leftmost interval may be unbounded");
        }
        if (!(total_mass() < 1.0))
            throw std::domain_error("Domain1D: Gaussian measure must be < 1");
    }

    double total_mass() const {
        double s = 0.0;
        for (const auto& iv : intervals) s += interval_mass(iv.a, iv.b);
        return s;
    }

    std::size_t size() const { return intervals.size(); }

    // One-line text form, e.g. "(-inf,0)u(0.5,1.5)".
    static Domain1D parse(const std::string& text);
    std::string to_string() const;
};

inline Domain1D Domain1D::parse(const std::string& text) {
    std::vector<Interval> ivs;
    std::size_t pos = 0;
    auto skip_ws = [&] { while (pos < text.size() && std::isspace((unsigned char)text[pos])) ++pos; };
    while (true) {
        skip_ws();
        if (pos >= text.size()) break;
        if (text[pos] != '(')
            throw std::invalid_argument("Domain1D::parse: expected '(' in \"" + text + "\"");
        std::size_t comma = text.find(',', pos);
        std::size_t close = text.find(')', pos);
        if (comma == std::string::npos || close == std::string::npos || comma > close)
            throw std::invalid_argument("Domain1D::parse: malformed interval in \"" + text + "\"");
        std::string sa = text.substr(pos + 1, comma - pos - 1);
        std::string sb = text.substr(comma + 1, close - comma - 1);
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t");
            auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        sa = trim(sa);
        sb = trim(sb);
        Interval iv;
        iv.a = (sa == "-inf" || sa == "-INF") ? neg_inf : std::stod(sa);
        iv.b = std::stod(sb);
        ivs.push_back(iv);
        pos = close + 1;
        skip_ws();
        if (pos < text.size()) {
            if (text[pos] != 'u' && text[pos] != 'U')
                throw std::invalid_argument("Domain1D::parse: expected 'u' between intervals");
            ++pos;
        }
    }
    return Domain1D(std::move(ivs));
}

inline std::string Domain1D::to_string() const {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        if (i) os << "u";
        os << "(";
        if (std::isinf(intervals[i].a)) os << "-inf";
        else os << intervals[i].a;
        os << "," << intervals[i].b << ")";
    }
    return os.str();
}

namespace detail {

// Gauss-Legendre nodes/weights on [-1,1].
inline void gauss_legendre(int k, std::vector<double>& xi, std::vector<double>& w) {
    xi.resize(k);
    w.resize(k);
    for (int i = 0; i < k; ++i) {
        // Newton on Legendre polynomial from Chebyshev initial guess
        double x = std::cos(M_PI * (i + 0.75) / (k + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= k; ++j) {
                double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            double dp = k * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= k; ++j) {
            double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        double dp = k * (x * p1 - p0) / (x * x - 1.0);
        xi[i] = x;
        w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

} // namespace detail

/// Graded node set on one interval, uniform in the Gaussian mass
/// coordinate, with per-cell quadrature for integrals against the
/// weight. A leftmost unbounded interval is truncated at
/// x_0 = quantile(tail_mass).
struct WeightedGrid {
    std::vector<double> x;           // n+1 strictly increasing nodes
    std::vector<double> cell_mass;   // n, gamma of each cell (exact)
    std::vector<double> qx, qw;      // quadrature abscissae / gamma-weights
    std::vector<std::size_t> qoff;   // n+1, per-cell offsets into qx/qw
    int quad_order = 6;
    bool left_truncated = false;     // interval extends to -inf below x[0]
    double tail_mass = 0.0;          // gamma of (-inf, x[0])

    int cells() const { return static_cast<int>(cell_mass.size()); }
    int nodes() const { return static_cast<int>(x.size()); }
    double left() const { return x.front(); }
    double right() const { return x.back(); }

    // Builds the grid for interval (a, b); a may be -inf.
    static WeightedGrid make(double a, double b, int n, double tail_eps = 1e-15,
                             int quad_order = 6) {
        if (n < 4) throw std::invalid_argument("WeightedGrid: n too small");
        WeightedGrid g;
        g.quad_order = quad_order;
        double s_lo, s_hi = cdf(b);
        if (std::isinf(a)) {
            g.left_truncated = true;
            // relative to the interval's own mass, so far-out half-lines
            // keep their tail resolved instead of losing half of it
            s_lo = tail_eps * s_hi;
        } else {
            s_lo = cdf(a);
        }
        if (!(s_lo < s_hi))
            throw std::domain_error("WeightedGrid: degenerate interval");
        g.tail_mass = g.left_truncated ? s_lo : 0.0;

        g.x.resize(n + 1);
        for (int i = 0; i <= n; ++i) {
            double s = s_lo + (s_hi - s_lo) * (double(i) / n);
            g.x[i] = quantile(s);
        }
        // pin the endpoints exactly
        if (!g.left_truncated) g.x[0] = a;
        g.x[n] = b;
        for (int i = 0; i < n; ++i)
            if (!(g.x[i] < g.x[i + 1]))
                throw std::runtime_error("WeightedGrid: node collapse (n too large for interval?)");

        g.cell_mass.resize(n);
        std::vector<double> s_left(n);
        for (int i = 0; i < n; ++i) {
            double sa = (i == 0 && !g.left_truncated) ? cdf(a) : s_lo + (s_hi - s_lo) * (double(i) / n);
            double sb = (i == n - 1) ? s_hi : s_lo + (s_hi - s_lo) * (double(i + 1) / n);
            g.cell_mass[i] = sb - sa;
            s_left[i] = sa;
        }
        fill_quadrature(g, s_left);
        return g;
    }

    // Per-cell quadrature in the mass coordinate, so integrals against
    // the weight become plain integrals in s. Cells that are wide in x
    // (graded tails) are subdivided so the pullback x(s) stays
    // polynomial-friendly on each quadrature panel.
    static void fill_quadrature(WeightedGrid& g, const std::vector<double>& s_left) {
        int n = g.cells(), K = g.quad_order;
        std::vector<double> xi, w;
        detail::gauss_legendre(K, xi, w);
        g.qx.clear();
        g.qw.clear();
        g.qoff.assign(n + 1, 0);
        constexpr double max_dx = 0.25;
        for (int i = 0; i < n; ++i) {
            g.qoff[i] = g.qx.size();
            double x0 = g.x[i], x1 = g.x[i + 1];
            int nsub = std::clamp(int(std::ceil((x1 - x0) / max_dx)), 1, 64);
            double used = 0.0;
            for (int j = 0; j < nsub; ++j) {
                double xa = x0 + (x1 - x0) * j / nsub;
                double xb = x0 + (x1 - x0) * (j + 1) / nsub;
                double m = (j == nsub - 1) ? g.cell_mass[i] - used : interval_mass(xa, xb);
                if (m <= 0.0) continue;
                for (int k = 0; k < K; ++k) {
                    double s = s_left[i] + used + 0.5 * m * (1.0 + xi[k]);
                    g.qx.push_back(quantile(s));
                    g.qw.push_back(0.5 * m * w[k]);
                }
                used += m;
            }
        }
        g.qoff[n] = g.qx.size();
    }

    // Builds a grid over an explicit strictly increasing node set; used
    // when node placement is driven by the function being represented
    // rather than by equal-mass grading.
    static WeightedGrid from_nodes(std::vector<double> nodes, bool left_truncated,
                                   int quad_order = 6) {
        if (nodes.size() < 2)
            throw std::invalid_argument("WeightedGrid: need at least two nodes");
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
            if (!(nodes[i] < nodes[i + 1]))
                throw std::invalid_argument("WeightedGrid: nodes must be strictly increasing");
        WeightedGrid g;
        g.quad_order = quad_order;
        g.left_truncated = left_truncated;
        g.x = std::move(nodes);
        g.tail_mass = left_truncated ? cdf(g.x.front()) : 0.0;
        int n = int(g.x.size()) - 1;
        g.cell_mass.resize(n);
        std::vector<double> s_left(n);
        for (int i = 0; i < n; ++i) {
            s_left[i] = cdf(g.x[i]);
            g.cell_mass[i] = interval_mass(g.x[i], g.x[i + 1]);
        }
        fill_quadrature(g, s_left);
        return g;
    }

    // Linear interpolation of nodal values at an abscissa inside the grid.
    double interp(const std::vector<double>& v, double xq) const {
        auto it = std::upper_bound(x.begin(), x.end(), xq);
        int i = int(it - x.begin()) - 1;
        i = std::clamp(i, 0, cells() - 1);
        double t = (xq - x[i]) / (x[i + 1] - x[i]);
        return v[i] + t * (v[i + 1] - v[i]);
    }
};

/// integral of |f|^p against gamma over the grid's interval (truncated
/// tail excluded; callers account for it when it matters). Cells where
/// f changes sign are split at the zero crossing so the kink of |f|^p
/// does not degrade the quadrature.
inline double integrate_abs_pow(const WeightedGrid& g, const std::vector<double>& v, double p) {
    double acc = 0.0, comp = 0.0;
    int K = g.quad_order;
    std::vector<double> xi, w;
    auto add = [&](double term) {
        double y = term - comp;
        double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    };
    for (int i = 0; i < g.cells(); ++i) {
        double x0 = g.x[i], x1 = g.x[i + 1];
        double v0 = v[i], v1 = v[i + 1];
        double slope = (v1 - v0) / (x1 - x0);
        if (v0 * v1 < 0.0) {
            // split at the zero crossing, composite panels on each side
            if (xi.empty()) detail::gauss_legendre(K, xi, w);
            double xz = x0 - v0 * (x1 - x0) / (v1 - v0);
            double s_cur = cdf(x0);
            double bounds[3] = {x0, xz, x1};
            for (int h = 0; h < 2; ++h) {
                double xa_h = bounds[h], xb_h = bounds[h + 1];
                if (!(xa_h < xb_h)) continue;
                int nsub = std::clamp(int(std::ceil((xb_h - xa_h) / 0.25)), 1, 64);
                for (int j = 0; j < nsub; ++j) {
                    double xa = xa_h + (xb_h - xa_h) * j / nsub;
                    double xb = xa_h + (xb_h - xa_h) * (j + 1) / nsub;
                    double m = (xa < xb) ? interval_mass(xa, xb) : 0.0;
                    if (m <= 0.0) continue;
                    for (int k = 0; k < K; ++k) {
                        double s = s_cur + 0.5 * m * (1.0 + xi[k]);
                        double fq = v0 + slope * (quantile(s) - x0);
                        add(0.5 * m * w[k] * std::pow(std::abs(fq), p));
                    }
                    s_cur += m;
                }
            }
            continue;
        }
        for (std::size_t q = g.qoff[i]; q < g.qoff[i + 1]; ++q) {
            double fq = v0 + slope * (g.qx[q] - x0);
            add(g.qw[q] * std::pow(std::abs(fq), p));
        }
    }
    return acc;
}

/// integral of f against gamma (same quadrature rule).
inline double integrate_linear(const WeightedGrid& g, const std::vector<double>& v) {
    double acc = 0.0, comp = 0.0;
    for (int i = 0; i < g.cells(); ++i) {
        double x0 = g.x[i], x1 = g.x[i + 1];
        double slope = (v[i + 1] - v[i]) / (x1 - x0);
        for (std::size_t q = g.qoff[i]; q < g.qoff[i + 1]; ++q) {
            double term = g.qw[q] * (v[i] + slope * (g.qx[q] - x0));
            double y = term - comp;
            double t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        }
    }
    return acc;
}

/// integral of |f'|^p against gamma; exact for piecewise-linear f.
inline double integrate_grad_pow(const WeightedGrid& g, const std::vector<double>& v, double p) {
    double acc = 0.0, comp = 0.0;
    for (int i = 0; i < g.cells(); ++i) {
        double slope = (v[i + 1] - v[i]) / (g.x[i + 1] - g.x[i]);
        double term = g.cell_mass[i] * std::pow(std::abs(slope), p);
        double y = term - comp;
        double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    return acc;
}

/// Nodal piecewise-linear function over a Domain1D (one grid per
/// component). The carrier type for eigenfunctions, torsion functions
/// and rearrangement inputs.
struct PiecewiseLinearFn {
    Domain1D domain;
    std::vector<WeightedGrid> grids;           // one per component
    std::vector<std::vector<double>> values;   // nodal values per component

    void check() const {
        if (grids.size() != domain.size() || values.size() != domain.size())
            throw std::invalid_argument("PiecewiseLinearFn: component count mismatch");
        for (std::size_t c = 0; c < grids.size(); ++c)
            if (values[c].size() != std::size_t(grids[c].nodes()))
                throw std::invalid_argument("PiecewiseLinearFn: nodal value count mismatch");
    }

    // Value on the truncated tail of a leftmost unbounded component.
    double tail_value(std::size_t c) const { return values[c].front(); }
};

inline double lp_norm(const PiecewiseLinearFn& f, double p) {
    double acc = 0.0;
    for (std::size_t c = 0; c < f.grids.size(); ++c) {
        acc += integrate_abs_pow(f.grids[c], f.values[c], p);
        if (f.grids[c].left_truncated)
            acc += f.grids[c].tail_mass * std::pow(std::abs(f.tail_value(c)), p);
    }
    return std::pow(acc, 1.0 / p);
}

inline double dirichlet_p_energy(const PiecewiseLinearFn& f, double p) {
    if (!(p > 1.0)) throw std::domain_error("dirichlet_p_energy: requires p > 1");
    double acc = 0.0;
    for (std::size_t c = 0; c < f.grids.size(); ++c)
        acc += integrate_grad_pow(f.grids[c], f.values[c], p);
    return acc;
}

inline double integral(const PiecewiseLinearFn& f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < f.grids.size(); ++c) {
        acc += integrate_linear(f.grids[c], f.values[c]);
        if (f.grids[c].left_truncated) acc += f.grids[c].tail_mass * f.tail_value(c);
    }
    return acc;
}

} // namespace gsk
