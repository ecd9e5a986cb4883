#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coveq/matrix.hpp"
#include "coveq/rng.hpp"

namespace coveq {

enum class CovModel { M1, M2, M3, M4, M5 };
enum class AltKind { Null, Sparse, Dense };

std::optional<CovModel> cov_model_from_string(std::string_view s);
std::optional<AltKind> alt_kind_from_string(std::string_view s);
std::string to_string(CovModel m);
std::string to_string(AltKind a);

struct CovModelSpec {
    CovModel model = CovModel::M1;
    Eigen::Index p = 0;
    AltKind alternative = AltKind::Null;
    std::optional<double> rho;  // m1 dense alternative only
    bool freeze_u = false;      // sparse: one covariance pair per cell
};

// Throws SpecError on: p < 1, m3 with p not divisible by 5, rho present
// unless (m1, dense), rho missing for (m1, dense), |rho| >= 1, sparse with
// p < 4.
void validate(const CovModelSpec& spec);

struct PerturbedEntry {
    Eigen::Index i = 0;  // strict upper triangle, i < j
    Eigen::Index j = 0;
    double magnitude = 0.0;
};

struct CovPair {
    SymMatrix sigma1;
    SymMatrix sigma2;
    double delta_used = 0.0;
    std::vector<PerturbedEntry> perturbed_entries;
};

// The five null models. m5 draws its sparse support from rng (required);
// m1-m4 are deterministic and ignore it.
SymMatrix null_covariance(const CovModelSpec& spec, Rng* rng = nullptr);

// Four strict-upper positions without replacement, magnitudes
// Unif(0,4) * max_j base_jj, U symmetrized; sigma1 = base + delta I,
// sigma2 = base + delta I + U, delta = |min(lambda_min(base + U),
// lambda_min(base))| + 0.05. base_lmin, when given, must equal
// min_eigenvalue(base); the harness caches it across replications.
CovPair sparse_alternative(const SymMatrix& base, Rng& rng,
                           std::optional<double> base_lmin = std::nullopt);

// m1: AR(1) with the spec's rho; m4: the 0.6-base variant; m2, m3, m5:
// identity as the second population. m5 needs rng for its base draw.
CovPair dense_alternative(const CovModelSpec& spec, Rng* rng = nullptr);

// Dispatches on spec.alternative; null yields sigma1 == sigma2.
CovPair build_pair(const CovModelSpec& spec, Rng& rng);

// Rows are z L^T with z standard normal filled row by row and
// L = cholesky(sigma).
SampleMatrix mvn_sample(const SymMatrix& sigma, Eigen::Index n, Rng& rng);

// Same draw with a precomputed Cholesky factor (harness fast path).
SampleMatrix mvn_sample_chol(const Eigen::MatrixXd& chol_lower,
                             Eigen::Index n, Rng& rng);

}  // namespace coveq
