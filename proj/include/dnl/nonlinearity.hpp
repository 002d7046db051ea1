#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dnl/errors.hpp"
#include "dnl/random.hpp"

namespace dnl {

// Restricted signum: -1 / 0 / +1 with an exact zero branch.
inline double sign0(double r) { return r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0); }

// Lipschitz approximation of sign0: clamp(r / eps, -1, 1).
inline double gamma_eps(double eps, double r) {
    if (!(eps > 0.0)) throw std::invalid_argument("gamma_eps: eps must be positive");
    if (r > eps) return 1.0;
    if (r < -eps) return -1.0;
    return r / eps;
}

namespace detail {

// Root of a continuous, strictly increasing g. Bracket [-max(1,|hint|),
// max(1,|hint|)] doubled until it straddles zero, bisection to width 1e-13,
// then two Newton polish steps when a derivative is available.
template <class F, class DF>
double find_root_increasing(F&& g, DF&& dg, bool has_derivative, double hint) {
    double b = std::max(1.0, std::abs(hint));
    double lo = -b, hi = b;
    double glo = g(lo), ghi = g(hi);
    int expansions = 0;
    while (glo > 0.0 || ghi < 0.0) {
        b *= 2.0;
        if (!std::isfinite(b) || ++expansions > 1100)
            throw NumericsError("root finder: bracket expansion exhausted; function is not surjective "
                                "onto the requested value");
        lo = -b;
        hi = b;
        glo = g(lo);
        ghi = g(hi);
    }
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;

    for (int it = 0; it < 1200 && (hi - lo) > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // ulp exhaustion
        const double gm = g(mid);
        if (gm == 0.0) return mid;
        (gm < 0.0 ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    if (has_derivative) {
        const double width = std::max(hi - lo, 1e-13);
        for (int it = 0; it < 2; ++it) {
            const double d = dg(x);
            if (!(d > 0.0) || !std::isfinite(d)) break;
            const double xn = x - g(x) / d;
            if (!std::isfinite(xn) || xn < lo - width || xn > hi + width) break;
            x = xn;
        }
    }
    return x;
}

}  // namespace detail

// Scalar nonlinearity phi: strictly increasing, continuous, surjective,
// phi(0) = 0. Carries the inverse graph, the Yosida machinery of the inverse,
// and the convex primitive Psi(s) = int_0^s phi^{-1}, which turns the
// resolvent inclusion into a strictly convex minimization.
class Nonlinearity {
public:
    enum class Kind { Identity, PowerLaw, PiecewiseLinear, Custom };

    struct Guarantees {
        bool strictly_increasing = true;
        bool continuous = true;
        bool surjective = true;
        bool phi_zero_is_zero = true;
        bool locally_lipschitz = true;
    };

    static Nonlinearity identity() {
        Nonlinearity n;
        n.kind_ = Kind::Identity;
        n.name_ = "identity";
        return n;
    }

    // phi(r) = |r|^{m-1} r, m > 0. Not locally Lipschitz at 0 when m < 1;
    // still admissible, the solvers just fall back to guarded steps there.
    static Nonlinearity power(double m) {
        if (!(m > 0.0)) throw std::invalid_argument("power law exponent must be positive");
        Nonlinearity n;
        n.kind_ = Kind::PowerLaw;
        n.m_ = m;
        n.name_ = "power(m=" + std::to_string(m) + ")";
        n.guarantees_.locally_lipschitz = (m >= 1.0);
        return n;
    }

    // Continuous piecewise-linear function anchored at phi(0) = 0. Segment
    // slopes[k] applies on (breakpoints[k-1], breakpoints[k]); all slopes
    // must be positive, which gives strict monotonicity and surjectivity.
    static Nonlinearity piecewise_linear(std::vector<double> breakpoints, std::vector<double> slopes) {
        if (slopes.size() != breakpoints.size() + 1)
            throw std::invalid_argument("piecewise_linear: need one more slope than breakpoints");
        for (std::size_t k = 1; k < breakpoints.size(); ++k)
            if (!(breakpoints[k - 1] < breakpoints[k]))
                throw std::invalid_argument("piecewise_linear: breakpoints must be strictly increasing");
        for (double s : slopes)
            if (!(s > 0.0)) throw std::invalid_argument("piecewise_linear: slopes must be positive");
        Nonlinearity n;
        n.kind_ = Kind::PiecewiseLinear;
        n.breaks_ = std::move(breakpoints);
        n.slopes_ = std::move(slopes);
        n.name_ = "piecewise_linear(" + std::to_string(n.breaks_.size()) + " breakpoints)";
        n.init_piecewise();
        return n;
    }

    // Caller-supplied phi. The inverse is computed by bracketed root finding,
    // the primitive by adaptive quadrature; a derivative callback, when
    // given, enables Newton polish and analytic curvature.
    static Nonlinearity custom(std::string name, std::function<double(double)> eval,
                               std::function<double(double)> derivative = {},
                               bool locally_lipschitz = true) {
        if (!eval) throw std::invalid_argument("custom nonlinearity needs an eval callback");
        Nonlinearity n;
        n.kind_ = Kind::Custom;
        n.eval_ = std::move(eval);
        n.deriv_ = std::move(derivative);
        n.name_ = std::move(name);
        n.guarantees_.locally_lipschitz = locally_lipschitz;
        return n;
    }

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    const Guarantees& guarantees() const { return guarantees_; }
    double power_exponent() const { return m_; }
    bool locally_lipschitz() const { return guarantees_.locally_lipschitz; }

    double operator()(double r) const {
        switch (kind_) {
            case Kind::Identity: return r;
            case Kind::PowerLaw: return r == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(r), m_), r);
            case Kind::PiecewiseLinear: return piecewise_eval(r);
            case Kind::Custom: return eval_(r);
        }
        return 0.0;
    }

    // phi'(r); may be +inf at r = 0 for power laws with m < 1. Callers that
    // need a finite number clamp.
    double derivative(double r) const {
        switch (kind_) {
            case Kind::Identity: return 1.0;
            case Kind::PowerLaw:
                if (r == 0.0)
                    return m_ > 1.0 ? 0.0 : (m_ == 1.0 ? 1.0 : std::numeric_limits<double>::infinity());
                return m_ * std::pow(std::abs(r), m_ - 1.0);
            case Kind::PiecewiseLinear: return slopes_[segment(r)];
            case Kind::Custom:
                if (deriv_) return deriv_(r);
                return numeric_derivative(r);
        }
        return 0.0;
    }

    // Unique r with phi(r) = s; total because phi is surjective.
    double inverse(double s) const {
        if (s == 0.0) return 0.0;  // phi(0) = 0 exactly, for every kind
        switch (kind_) {
            case Kind::Identity: return s;
            case Kind::PowerLaw: return s == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(s), 1.0 / m_), s);
            case Kind::PiecewiseLinear: return piecewise_inverse(s);
            case Kind::Custom:
                return detail::find_root_increasing([&](double y) { return eval_(y) - s; },
                                                    [&](double y) { return derivative(y); },
                                                    static_cast<bool>(deriv_), s);
        }
        return 0.0;
    }

    // (phi^{-1})'(s) = 1 / phi'(phi^{-1}(s)); +inf where phi' vanishes.
    double inverse_derivative(double s) const {
        switch (kind_) {
            case Kind::Identity: return 1.0;
            case Kind::PowerLaw:
                if (s == 0.0)
                    return m_ < 1.0 ? 0.0 : (m_ == 1.0 ? 1.0 : std::numeric_limits<double>::infinity());
                return (1.0 / m_) * std::pow(std::abs(s), 1.0 / m_ - 1.0);
            case Kind::PiecewiseLinear: return 1.0 / slopes_[segment_y(s)];
            case Kind::Custom: {
                const double d = derivative(inverse(s));
                return d > 0.0 ? 1.0 / d : std::numeric_limits<double>::infinity();
            }
        }
        return 0.0;
    }

    // Psi(s) = int_0^s phi^{-1}(sigma) d sigma: nonnegative, strictly convex,
    // Psi(0) = 0, Psi' = phi^{-1}. Closed forms where possible; otherwise the
    // Legendre identity Psi(s) = s r - int_0^r phi with r = phi^{-1}(s), so
    // only the forward phi is integrated numerically.
    double primitive(double s) const {
        switch (kind_) {
            case Kind::Identity: return 0.5 * s * s;
            case Kind::PowerLaw: return m_ / (m_ + 1.0) * std::pow(std::abs(s), (m_ + 1.0) / m_);
            case Kind::PiecewiseLinear: {
                const double r = piecewise_inverse(s);
                return s * r - piecewise_integral(r);
            }
            case Kind::Custom: {
                const double r = inverse(s);
                if (r == 0.0) return 0.0;
                double error = 0.0;
                const double integral = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
                    eval_, 0.0, r, 15, 1e-12, &error);
                if (!std::isfinite(integral) || error > 1e-8 * std::max(1.0, std::abs(integral)))
                    throw NumericsError("primitive: quadrature did not reach the requested tolerance");
                return s * r - integral;
            }
        }
        return 0.0;
    }

    // x solving x + lambda phi^{-1}(x) = r. Substituting y = phi^{-1}(x)
    // turns this into phi(y) + lambda y = r, which needs only forward
    // evaluations; x = r - lambda y and y is the Yosida operator value.
    double yosida_resolvent(double lambda, double r) const { return yosida_pair(lambda, r).first; }

    // [phi^{-1}]_lambda(r) = (r - yosida_resolvent(lambda, r)) / lambda.
    double yosida(double lambda, double r) const { return yosida_pair(lambda, r).second; }

    std::pair<double, double> yosida_pair(double lambda, double r) const {
        if (!(lambda > 0.0)) throw std::invalid_argument("yosida: lambda must be positive");
        if (r == 0.0) return {0.0, 0.0};
        const double y = detail::find_root_increasing(
            [&](double t) { return (*this)(t) + lambda * t - r; },
            [&](double t) { return derivative(t) + lambda; }, kind_ != Kind::Custom || static_cast<bool>(deriv_),
            r);
        double x = r - lambda * y;
        // sign(x) = sign(r) and |x| <= |r| hold for the exact root.
        x = r > 0.0 ? std::clamp(x, 0.0, r) : std::clamp(x, r, 0.0);
        return {x, y};
    }

private:
    Nonlinearity() = default;

    void init_piecewise() {
        const std::size_t K = breaks_.size();
        break_values_.assign(K, 0.0);
        if (K == 0) return;
        // Anchor at phi(0) = 0 and accumulate knot values outward.
        const std::size_t s0 = segment(0.0);
        double x = 0.0, y = 0.0;
        for (std::size_t k = s0; k < K; ++k) {
            y += slopes_[k] * (breaks_[k] - x);
            x = breaks_[k];
            break_values_[k] = y;
        }
        x = 0.0;
        y = 0.0;
        for (std::size_t k = s0; k-- > 0;) {
            y -= slopes_[k + 1] * (x - breaks_[k]);
            x = breaks_[k];
            break_values_[k] = y;
        }
    }

    std::size_t segment(double x) const {
        return static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin());
    }

    std::size_t segment_y(double s) const {
        return static_cast<std::size_t>(std::upper_bound(break_values_.begin(), break_values_.end(), s) -
                                        break_values_.begin());
    }

    double piecewise_eval(double x) const {
        if (breaks_.empty()) return slopes_[0] * x;
        const std::size_t s = segment(x);
        if (s == 0) return break_values_[0] + slopes_[0] * (x - breaks_[0]);
        return break_values_[s - 1] + slopes_[s] * (x - breaks_[s - 1]);
    }

    double piecewise_inverse(double s) const {
        if (breaks_.empty()) return s / slopes_[0];
        const std::size_t k = segment_y(s);
        if (k == 0) return breaks_[0] + (s - break_values_[0]) / slopes_[0];
        return breaks_[k - 1] + (s - break_values_[k - 1]) / slopes_[k];
    }

    // int_0^r phi, exact for piecewise-linear phi (trapezoid per segment).
    // The walk probes just inside the segment being left so that landing
    // exactly on a knot still makes progress.
    double piecewise_integral(double r) const {
        if (r == 0.0) return 0.0;
        double x = 0.0, acc = 0.0;
        while (x != r) {
            double next = r;
            const std::size_t s = segment(std::nextafter(x, r));
            if (r > x) {
                if (s < breaks_.size() && breaks_[s] < r) next = breaks_[s];
            } else {
                if (s > 0 && breaks_[s - 1] > r) next = breaks_[s - 1];
            }
            acc += 0.5 * (piecewise_eval(x) + piecewise_eval(next)) * (next - x);
            x = next;
        }
        return acc;
    }

    double numeric_derivative(double r) const {
        const double h = 1e-6 * std::max(1.0, std::abs(r));
        return (eval_(r + h) - eval_(r - h)) / (2.0 * h);
    }

    Kind kind_ = Kind::Identity;
    double m_ = 1.0;
    std::vector<double> breaks_, break_values_, slopes_;
    std::function<double(double)> eval_, deriv_;
    std::string name_;
    Guarantees guarantees_;
};

// Convex, lower semicontinuous j >= 0 with j(0) = 0. The family drives the
// complete-accretivity and complete-resolvent inequalities.
struct TestFunctionJ0 {
    enum class Tag { Abs, Square, ShiftedPos, ShiftedNeg, HingedAbs };

    Tag tag = Tag::Abs;
    double k = 0.0;

    double operator()(double s) const {
        switch (tag) {
            case Tag::Abs: return std::abs(s);
            case Tag::Square: return s * s;
            case Tag::ShiftedPos: return std::max(s - k, 0.0);
            case Tag::ShiftedNeg: return std::max(-s - k, 0.0);
            case Tag::HingedAbs: return std::max(std::abs(s) - k, 0.0);
        }
        return 0.0;
    }

    std::string name() const {
        switch (tag) {
            case Tag::Abs: return "abs";
            case Tag::Square: return "square";
            case Tag::ShiftedPos: return "shifted_pos(k=" + std::to_string(k) + ")";
            case Tag::ShiftedNeg: return "shifted_neg(k=" + std::to_string(k) + ")";
            case Tag::HingedAbs: return "hinged_abs(k=" + std::to_string(k) + ")";
        }
        return "";
    }
};

// Truncation T with T(0) = 0, 0 <= T' <= 1, T' compactly supported.
// HardClamp is the canonical member; SmoothClamp tapers T' to zero with a
// cubic smoothstep over [k, k+eps].
struct TruncationP0 {
    enum class Tag { HardClamp, SmoothClamp };

    Tag tag = Tag::HardClamp;
    double k = 1.0;
    double eps = 0.0;

    double operator()(double s) const {
        const double a = std::abs(s);
        switch (tag) {
            case Tag::HardClamp: return std::clamp(s, -k, k);
            case Tag::SmoothClamp: {
                if (a <= k) return s;
                const double y = std::min((a - k) / eps, 1.0);
                // integral of the descending smoothstep 1 - 3y^2 + 2y^3
                const double tail = eps * (y - y * y * y + 0.5 * y * y * y * y);
                return std::copysign(k + tail, s);
            }
        }
        return 0.0;
    }

    std::string name() const {
        switch (tag) {
            case Tag::HardClamp: return "hard_clamp(k=" + std::to_string(k) + ")";
            case Tag::SmoothClamp:
                return "smooth_clamp(k=" + std::to_string(k) + ",eps=" + std::to_string(eps) + ")";
        }
        return "";
    }
};

// Deterministic-from-seed families: fixed members first, then randomized
// thresholds k in [0.01, 10].
inline std::vector<TestFunctionJ0> sample_J0(std::uint64_t seed, int count) {
    if (count < 1) throw std::invalid_argument("sample_J0: count must be >= 1");
    std::vector<TestFunctionJ0> out;
    out.reserve(count);
    out.push_back({TestFunctionJ0::Tag::Abs, 0.0});
    if (count > 1) out.push_back({TestFunctionJ0::Tag::Square, 0.0});
    SplitMix64 rng(SplitMix64::substream(seed, 101));
    const TestFunctionJ0::Tag cycle[] = {TestFunctionJ0::Tag::ShiftedPos, TestFunctionJ0::Tag::ShiftedNeg,
                                         TestFunctionJ0::Tag::HingedAbs};
    for (int i = 2; i < count; ++i) out.push_back({cycle[(i - 2) % 3], rng.uniform(0.01, 10.0)});
    return out;
}

inline std::vector<TruncationP0> sample_P0(std::uint64_t seed, int count) {
    if (count < 1) throw std::invalid_argument("sample_P0: count must be >= 1");
    std::vector<TruncationP0> out;
    out.reserve(count);
    out.push_back({TruncationP0::Tag::HardClamp, 1.0, 0.0});
    SplitMix64 rng(SplitMix64::substream(seed, 102));
    for (int i = 1; i < count; ++i) {
        const double k = rng.uniform(0.01, 10.0);
        if (i % 2 == 1)
            out.push_back({TruncationP0::Tag::SmoothClamp, k, rng.uniform(0.01, 1.0)});
        else
            out.push_back({TruncationP0::Tag::HardClamp, k, 0.0});
    }
    return out;
}

}  // namespace dnl
