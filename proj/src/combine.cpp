#include "coveq/combine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coveq/dist.hpp"
#include "coveq/errors.hpp"

namespace coveq {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kClampLo = 1e-15;
constexpr double kClampHi = 1.0 - 1e-15;

void check_input(const PValue& p, const char* name) {
    if (std::isnan(p.log_value) || p.log_value > 0.0) {
        throw DomainError(std::string("combine: invalid ") + name +
                          " (log_value must be <= 0)");
    }
}

double clamp_value(const PValue& p) {
    return std::clamp(p.value, kClampLo, kClampHi);
}

}  // namespace

std::optional<CombineMethod> combine_method_from_string(std::string_view s) {
    if (s == "fisher") return CombineMethod::Fisher;
    if (s == "bonferroni") return CombineMethod::Bonferroni;
    if (s == "tippett") return CombineMethod::Tippett;
    if (s == "stouffer") return CombineMethod::Stouffer;
    if (s == "cauchy") return CombineMethod::Cauchy;
    return std::nullopt;
}

std::string to_string(CombineMethod m) {
    switch (m) {
        case CombineMethod::Fisher: return "fisher";
        case CombineMethod::Bonferroni: return "bonferroni";
        case CombineMethod::Tippett: return "tippett";
        case CombineMethod::Stouffer: return "stouffer";
        case CombineMethod::Cauchy: return "cauchy";
    }
    throw SpecError("combine: unknown method tag");
}

CombinedOutcome fisher_combine(const PValue& p_t, const PValue& p_m) {
    check_input(p_t, "p_t");
    check_input(p_m, "p_m");
    CombinedOutcome out;
    out.method = CombineMethod::Fisher;
    out.p_t = p_t;
    out.p_m = p_m;
    out.f = -2.0 * (p_t.log_value + p_m.log_value);
    if (std::isinf(out.f)) {
        // An exact-zero input (log_value -inf) forces a zero combined p.
        out.p = PValue{0.0, -std::numeric_limits<double>::infinity()};
    } else {
        out.p = chisq4_sf(out.f);
    }
    return out;
}

CombinedOutcome alt_combine(CombineMethod method, const PValue& p_t,
                            const PValue& p_m) {
    if (method == CombineMethod::Fisher) {
        return fisher_combine(p_t, p_m);
    }
    check_input(p_t, "p_t");
    check_input(p_m, "p_m");
    CombinedOutcome out = fisher_combine(p_t, p_m);
    out.method = method;

    switch (method) {
        case CombineMethod::Bonferroni: {
            const double lmin = std::min(p_t.log_value, p_m.log_value);
            out.p = PValue::from_log(std::min(0.0, std::log(2.0) + lmin));
            break;
        }
        case CombineMethod::Tippett: {
            // 1 - (1 - m)^2 = m (2 - m) with m the smaller p-value.
            const double lmin = std::min(p_t.log_value, p_m.log_value);
            const double vmin = std::min(p_t.value, p_m.value);
            out.p = PValue::from_log(
                std::min(0.0, lmin + std::log(2.0 - vmin)));
            break;
        }
        case CombineMethod::Stouffer: {
            const double zt = normal_quantile(clamp_value(p_t));
            const double zm = normal_quantile(clamp_value(p_m));
            const double zbar = (zt + zm) / std::sqrt(2.0);
            out.p = normal_sf(zbar);
            break;
        }
        case CombineMethod::Cauchy: {
            const double s =
                0.5 * std::tan(kPi * (0.5 - clamp_value(p_t))) +
                0.5 * std::tan(kPi * (0.5 - clamp_value(p_m)));
            out.p = PValue::from_value(0.5 - std::atan(s) / kPi);
            break;
        }
        case CombineMethod::Fisher:
            break;
    }
    return out;
}

}  // namespace coveq
