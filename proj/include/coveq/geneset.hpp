#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coveq/pvalue.hpp"

namespace coveq {

struct ExpressionData {
    Eigen::MatrixXd matrix;  // probes x samples
    std::vector<std::string> probe_ids;
    std::vector<std::string> sample_ids;
    std::vector<std::string> group_labels;  // one per sample, two groups
    bool log2_scale = false;  // true when values are already log2
};

// Checks dimension consistency, unique probe ids, and exactly two non-empty
// groups. Throws DomainError/DimensionError.
void validate(const ExpressionData& data);

struct GeneSet {
    std::string name;
    std::string description;
    std::vector<std::string> members;
};

struct GeneSetCollection {
    std::vector<GeneSet> sets;
};

// Keeps probes with absolute-scale intensity above intensity_floor in at
// least intensity_fraction of samples AND log2-scale IQR above iqr_floor.
// Defaults (100, 0.25, 0.5) reproduce the standard prefilter. Throws
// InsufficientDataError when nothing survives.
ExpressionData iqr_filter(const ExpressionData& data,
                          double intensity_floor = 100.0,
                          double intensity_fraction = 0.25,
                          double iqr_floor = 0.5);

struct MethodFlags {
    bool lc = false;
    bool clx = false;
    bool fisher = false;
    bool bonferroni = false;
};

struct GeneSetResult {
    std::string name;
    long size_available = 0;   // members found in the data
    long size_used = 0;        // probes actually tested
    long dropped_constant = 0; // per-group-constant probes dropped
    long unknown_members = 0;  // members absent from the data
    bool tested = false;
    std::string error;  // error marker; empty when none
    PValue p_lc;
    PValue p_clx;
    PValue p_fisher;
    PValue p_bonferroni;
    MethodFlags significant_at_alpha;
    MethodFlags bh_significant;
};

// Benjamini-Hochberg step-up: largest k with p_(k) <= k*alpha/m; rejects
// every p-value <= p_(k). Flags returned in input order.
std::vector<bool> bh_fdr(const std::vector<double>& pvals, double alpha);

// Which scale the covariance tests run on; conversion from the data's
// declared scale happens internally (absolute values clamp at 1 before
// log2).
enum class TestScale { Log2, Absolute };

// Per set: intersect members with the data's probes, gate on min_size, drop
// per-group-constant probes, transpose to samples x probes, run the
// quadratic-form and maximum-form tests plus the Fisher and Bonferroni
// combinations. BH runs per method over the sets actually tested. Results
// come back in input-set order. Requires two groups with >= 4 samples each.
std::vector<GeneSetResult> run_genesets(const ExpressionData& data,
                                        const GeneSetCollection& sets,
                                        double alpha, long min_size = 10,
                                        TestScale scale = TestScale::Log2);

struct GeneSetCounts {
    long lc = 0;
    long clx = 0;
    long fisher = 0;
    long bonferroni = 0;
};

struct GeneSetSummary {
    long supplied = 0;
    long tested = 0;
    long excluded_small = 0;
    long errored = 0;
    GeneSetCounts significant_at_alpha;
    GeneSetCounts bh_significant;
};

GeneSetSummary summarize(const std::vector<GeneSetResult>& results);

}  // namespace coveq
