#pragma once

#include "coveq/pvalue.hpp"

namespace coveq {

// Upper tail of the standard normal law, 1 - Phi(t).
// Full relative accuracy for moderate t via erfc; the log form switches to a
// Mills-ratio continued fraction in the far tail so it stays accurate long
// after the plain value underflows.
PValue normal_sf(double t);

// Upper alpha quantile: normal_sf(z) == alpha.
double normal_quantile(double alpha);

// Survival function of chi-squared with 4 degrees of freedom,
// exp(-x/2) * (1 + x/2) in closed form.
PValue chisq4_sf(double x);

// Upper alpha quantile of chi-squared with 4 degrees of freedom.
double chisq4_quantile(double alpha);

// Extreme-value law G(x) = exp(-exp(-x/2) / sqrt(8 pi)) that calibrates the
// normalized maximum statistic.
double gumbel_cdf(double x);
PValue gumbel_sf(double x);

// Upper alpha quantile: gumbel_sf(q) == alpha.
// Closed form q = -log(8 pi) - 2 log log(1/(1-alpha)).
double gumbel_quantile(double alpha);

}  // namespace coveq
