#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "coveq/pvalue.hpp"

namespace coveq {

enum class CombineMethod { Fisher, Bonferroni, Tippett, Stouffer, Cauchy };

std::optional<CombineMethod> combine_method_from_string(std::string_view s);
std::string to_string(CombineMethod m);

struct CombinedOutcome {
    double f = 0.0;  // Fisher statistic -2(log p_t + log p_m)
    PValue p;
    PValue p_t;
    PValue p_m;
    CombineMethod method = CombineMethod::Fisher;
};

// f from the log-space fields (never the possibly-underflowed values);
// p = chisq4_sf(f).
CombinedOutcome fisher_combine(const PValue& p_t, const PValue& p_m);

// Bonferroni, Tippett, Stouffer, Cauchy alternates; Fisher routes to
// fisher_combine. Stouffer and Cauchy clamp inputs to [1e-15, 1 - 1e-15]
// before the quantile and tangent transforms.
CombinedOutcome alt_combine(CombineMethod method, const PValue& p_t,
                            const PValue& p_m);

}  // namespace coveq
