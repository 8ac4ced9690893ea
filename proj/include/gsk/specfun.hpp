#pragma once

// Confluent hypergeometric function M(b,c,z), the recessive solution of
// the weighted homogeneous equation -y'' + x y' + a y = 0, and the
// closed-form p = 2 torsion function built from it. These serve as the
// independent oracle for the numerical solvers.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace gsk {

namespace detail {

inline bool is_nonpositive_integer(double v) {
    return v <= 0.0 && v == std::floor(v);
}

// Plain series with compensated summation; converges for all z >= 0,
// fastest and cancellation-free when b, c > 0.
inline double kummer_series(double b, double c, double z) {
    double acc = 1.0, comp = 0.0, term = 1.0;
    for (int k = 0; k < 10000; ++k) {
        term *= (b + k) / (c + k) * z / (k + 1);
        double y = term - comp;
        double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
        if (std::abs(term) < 1e-18 * std::abs(acc) && k > 2) return acc;
    }
    return acc;
}

// Large-z expansion M ~ Gamma(c)/Gamma(b) e^z z^{b-c} sum_k
// (c-b)_k (1-b)_k / (k! z^k), valid here for b, c > 0.
inline double kummer_asymptotic(double b, double c, double z) {
    double sum = 1.0, term = 1.0, prev = 1.0;
    for (int k = 0; k < 200; ++k) {
        term *= (c - b + k) * (1.0 - b + k) / ((k + 1) * z);
        if (std::abs(term) > std::abs(prev)) break; // divergent tail reached
        sum += term;
        prev = term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    double logpre = std::lgamma(c) - std::lgamma(b) + z + (b - c) * std::log(z);
    return std::exp(logpre) * sum;
}

} // namespace detail

/// Kummer confluent hypergeometric function M(b,c,z) for z >= 0.
inline double kummer_m(double b, double c, double z) {
    if (detail::is_nonpositive_integer(c))
        throw std::domain_error("kummer_m: c must not be a nonpositive integer");
    if (z < 0.0)
        throw std::domain_error("kummer_m: nonnegative argument required");
    if (z + std::abs(b - c) * std::log1p(z) > 700.0)
        throw std::overflow_error("kummer_m: result overflows double range");
    constexpr double z_switch = 50.0;
    if (z <= z_switch || b <= 0.0 || c <= 0.0)
        return detail::kummer_series(b, c, z);
    return detail::kummer_asymptotic(b, c, z);
}

namespace detail {

// Asymptotic seed for the solution of -y'' + x y' + a y = 0 decaying as
// x -> -inf: with u = -x, y ~ u^{-a} (1 + c_1 u^{-2} + ...),
// c_{k+1} = -(a+2k)(a+2k+1) c_k / (2k+2). Also returns dy/dx.
inline void recessive_seed(double a, double x, double& y, double& yp) {
    double u = -x;
    double pow_u = std::pow(u, -a);
    double s = 1.0, sp = 0.0; // sum and d(sum)/du of the bracket
    double ck = 1.0;
    for (int k = 0; k < 60; ++k) {
        double next = -ck * (a + 2 * k) * (a + 2 * k + 1) / (2.0 * k + 2.0);
        double term = next * std::pow(u, -2.0 * (k + 1));
        if (std::abs(term) > std::abs(ck * std::pow(u, -2.0 * k)))
            break; // asymptotic tail started to grow
        s += term;
        sp += -2.0 * (k + 1) * term / u;
        ck = next;
        if (std::abs(term) < 1e-18 * std::abs(s)) break;
    }
    y = pow_u * s;
    double dy_du = -a * pow_u / u * s + pow_u * sp;
    yp = -dy_du; // d/dx = -d/du
}

// One RK4 step for the linear system y' = v, v' = x v + a y.
inline void recessive_rk4_step(double a, double& x, double& y, double& v, double h) {
    auto f = [a](double xx, double yy, double vv, double& dy, double& dv) {
        dy = vv;
        dv = xx * vv + a * yy;
    };
    double k1y, k1v, k2y, k2v, k3y, k3v, k4y, k4v;
    f(x, y, v, k1y, k1v);
    f(x + 0.5 * h, y + 0.5 * h * k1y, v + 0.5 * h * k1v, k2y, k2v);
    f(x + 0.5 * h, y + 0.5 * h * k2y, v + 0.5 * h * k2v, k3y, k3v);
    f(x + h, y + h * k3y, v + h * k3v, k4y, k4v);
    y += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
    v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    x += h;
}

} // namespace detail

/// Dense evaluation cache for the recessive solution y(a, .), the
/// combination of the homogeneous Kummer solutions that stays bounded
/// and decays like |x|^{-a} as x -> -inf. Normalized by y(a,0) = 1
/// (or y'(a,0) = 1 when y(a,0) vanishes).
class RecessiveSolution {
public:
    explicit RecessiveSolution(double a, double x_max = 8.0, double step = 1.0 / 512.0)
        : a_(a), h_(step) {
        if (!(a > 0.0))
            throw std::domain_error("RecessiveSolution: requires a > 0");
        x_start_ = -std::max(10.0, 1.5 * std::sqrt(a) + 6.0);
        double x = x_start_, y, v;
        detail::recessive_seed(a, x, y, v);
        xs_.push_back(x);
        ys_.push_back(y);
        vs_.push_back(v);
        while (x < x_max - 0.5 * h_) {
            detail::recessive_rk4_step(a_, x, y, v, h_);
            xs_.push_back(x);
            ys_.push_back(y);
            vs_.push_back(v);
        }
        // normalization at the origin
        double y0 = eval_raw(0.0);
        scale_ = (std::abs(y0) > 1e-8) ? 1.0 / y0 : 1.0 / eval_raw_deriv(0.0);
    }

    double a() const { return a_; }

    double operator()(double x) const { return scale_ * eval_raw(x); }
    double deriv(double x) const { return scale_ * eval_raw_deriv(x); }

private:
    // cubic Hermite interpolation on the stored trajectory; below the
    // stored range the asymptotic series applies directly
    double eval_raw(double x) const {
        if (x <= x_start_) {
            double y, yp;
            detail::recessive_seed(a_, x, y, yp);
            return y;
        }
        if (x > xs_.back())
            throw std::domain_error("RecessiveSolution: abscissa beyond cached range");
        auto [i, t] = locate(x);
        double h = xs_[i + 1] - xs_[i];
        double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
        double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
        return h00 * ys_[i] + h * h10 * vs_[i] + h01 * ys_[i + 1] + h * h11 * vs_[i + 1];
    }

    double eval_raw_deriv(double x) const {
        if (x <= x_start_) {
            double y, yp;
            detail::recessive_seed(a_, x, y, yp);
            return yp;
        }
        auto [i, t] = locate(x);
        double h = xs_[i + 1] - xs_[i];
        double d00 = (6 * t * t - 6 * t) / h, d10 = 3 * t * t - 4 * t + 1;
        double d01 = (6 * t - 6 * t * t) / h, d11 = 3 * t * t - 2 * t;
        return d00 * ys_[i] + d10 * vs_[i] + d01 * ys_[i + 1] + d11 * vs_[i + 1];
    }

    std::pair<int, double> locate(double x) const {
        double pos = (x - x_start_) / h_;
        int i = std::min(int(pos), int(xs_.size()) - 2);
        if (i < 0) i = 0;
        double t = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
        return {i, t};
    }

    double a_, h_, x_start_, scale_ = 1.0;
    std::vector<double> xs_, ys_, vs_;
};

/// Pointwise recessive solution; integrates the trajectory on demand.
inline double recessive_solution(double a, double x) {
    RecessiveSolution y(a, std::max(x, 0.0) + 1.0);
    return y(x);
}

/// Closed-form generalized torsion function for p = 2, alpha < 0:
/// v(x) = (1/a) (1 - y(a,x)/y(a,t)) with a = -alpha. Satisfies
/// -v'' + x v' = alpha v + 1 on (-inf, t), v(t) = 0, v -> -1/alpha at -inf.
class ClosedTorsion {
public:
    ClosedTorsion(double alpha, double t)
        : a_(-alpha), t_(t), y_(-alpha, t + 1.0), y_t_(y_(t)) {
        if (!(alpha < 0.0))
            throw std::domain_error("ClosedTorsion: closed form requires alpha < 0");
        if (y_t_ == 0.0)
            throw std::runtime_error("ClosedTorsion: recessive solution vanishes at t");
    }

    double operator()(double x) const {
        if (x > t_) throw std::domain_error("ClosedTorsion: x must be <= t");
        return (1.0 - y_(x) / y_t_) / a_;
    }

    double deriv(double x) const { return -y_.deriv(x) / (a_ * y_t_); }

    double alpha() const { return -a_; }
    double boundary() const { return t_; }

private:
    double a_, t_;
    RecessiveSolution y_;
    double y_t_;
};

inline double torsion_p2_closed(double alpha, double t, double x) {
    return ClosedTorsion(alpha, t)(x);
}

} // namespace gsk
