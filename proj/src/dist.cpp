#include "coveq/dist.hpp"

#include <cmath>
#include <limits>

namespace coveq {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))
constexpr double kLog8Pi = 3.2241714275292361024;       // log(8*pi)
constexpr double kInvSqrt8Pi = 0.19947114020071633897;  // 1/sqrt(8*pi)

// Mills ratio (1 - Phi(t)) / phi(t) for t >= 8, via the classical
// continued fraction 1/(t + 1/(t + 2/(t + 3/(...)))).
double mills_ratio(double t) {
    double r = 0.0;
    for (int k = 40; k >= 1; --k) r = static_cast<double>(k) / (t + r);
    return 1.0 / (t + r);
}

double log_normal_sf_tail(double t) {
    // log[(1-Phi)(t)] = log phi(t) + log R(t), t >= 8
    return -0.5 * t * t - kLogSqrt2Pi + std::log(mills_ratio(t));
}

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite input");
}

void require_open_unit(double alpha, const char* what) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError(std::string(what) + ": alpha must lie in (0,1)");
}

}  // namespace

PValue normal_sf(double t) {
    require_finite(t, "normal_sf");
    if (t >= 8.0) {
        // erfc keeps relative accuracy here too, but its value underflows
        // near t = 38 while the log form must extend well past that.
        const double lv = log_normal_sf_tail(t);
        return PValue{std::exp(lv), lv};
    }
    const double v = 0.5 * std::erfc(t / kSqrt2);
    if (t <= 0.0) {
        // value in [0.5, 1): get the log from the opposite tail so it does
        // not collapse to 0 when v rounds to 1.
        const double other = 0.5 * std::erfc(-t / kSqrt2);
        return PValue{v, std::log1p(-other)};
    }
    return PValue{v, std::log(v)};
}

double normal_quantile(double alpha) {
    require_open_unit(alpha, "normal_quantile");
    const double target = std::log(alpha);
    // Bisection to localize, then Newton in log space:
    // d/dz log sf(z) = -phi/sf = -1/R(z).
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (normal_sf(mid).log_value > target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 0.25) break;
    }
    double z = 0.5 * (lo + hi);
    for (int i = 0; i < 60; ++i) {
        const PValue s = normal_sf(z);
        const double phi = std::exp(-0.5 * z * z - kLogSqrt2Pi);
        // R = sf/phi; fall back to the continued fraction when sf underflows.
        const double r = (s.value > 0.0 && phi > 0.0) ? s.value / phi : mills_ratio(std::max(z, 8.0));
        const double step = (s.log_value - target) * r;
        z += step;
        if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    return z;
}

PValue chisq4_sf(double x) {
    require_finite(x, "chisq4_sf");
    if (x < 0.0) throw DomainError("chisq4_sf: negative argument");
    const double lv = -0.5 * x + std::log1p(0.5 * x);
    return PValue{std::exp(lv), lv};
}

double chisq4_quantile(double alpha) {
    require_open_unit(alpha, "chisq4_quantile");
    const double target = std::log(alpha);
    // g(c) = -c/2 + log1p(c/2) is strictly decreasing on (0, inf).
    double lo = 0.0, hi = 16.0;
    while (-0.5 * hi + std::log1p(0.5 * hi) > target) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double g = -0.5 * mid + std::log1p(0.5 * mid);
        if (g > target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-13 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

double gumbel_cdf(double x) {
    require_finite(x, "gumbel_cdf");
    return std::exp(-kInvSqrt8Pi * std::exp(-0.5 * x));
}

PValue gumbel_sf(double x) {
    require_finite(x, "gumbel_sf");
    const double log_h = -0.5 * x - 0.5 * kLog8Pi;  // h = -log G(x)
    if (log_h < -690.0) {
        // h below ~1e-300: sf(x) == h to full double precision, and exp may
        // underflow; keep the closed-form log.
        return PValue{std::exp(log_h), log_h};
    }
    const double h = std::exp(log_h);
    const double v = -std::expm1(-h);  // 1 - exp(-h), accurate for small h
    return PValue{v, std::log(v)};
}

double gumbel_quantile(double alpha) {
    require_open_unit(alpha, "gumbel_quantile");
    // 1 - G(q) = alpha  =>  q = -log(8 pi) - 2 log(-log(1-alpha))
    return -kLog8Pi - 2.0 * std::log(-std::log1p(-alpha));
}

}  // namespace coveq
