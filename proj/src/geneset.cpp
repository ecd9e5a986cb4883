#include "coveq/geneset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "coveq/clx.hpp"
#include "coveq/combine.hpp"
#include "coveq/errors.hpp"
#include "coveq/lc.hpp"
#include "coveq/matrix.hpp"

namespace coveq {

namespace {

// Linear-interpolation quantile (the common spreadsheet/R default) on a
// sorted vector.
double quantile_sorted(const std::vector<double>& v, double q) {
    const std::size_t n = v.size();
    if (n == 1) {
        return v[0];
    }
    const double h = static_cast<double>(n - 1) * q;
    const std::size_t lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= n) {
        return v[n - 1];
    }
    return v[lo] + frac * (v[lo + 1] - v[lo]);
}

double log2_clamped(double v) { return std::log2(std::max(v, 1.0)); }

struct GroupSplit {
    std::vector<Eigen::Index> idx1;
    std::vector<Eigen::Index> idx2;
    std::string label1;
    std::string label2;
};

// Group 1 is the first label encountered in sample order.
GroupSplit split_groups(const ExpressionData& data) {
    GroupSplit g;
    g.label1 = data.group_labels.front();
    for (std::size_t s = 0; s < data.group_labels.size(); ++s) {
        const std::string& label = data.group_labels[s];
        if (label == g.label1) {
            g.idx1.push_back(static_cast<Eigen::Index>(s));
        } else {
            g.label2 = label;
            g.idx2.push_back(static_cast<Eigen::Index>(s));
        }
    }
    return g;
}

}  // namespace

void validate(const ExpressionData& data) {
    if (data.matrix.rows() < 1 || data.matrix.cols() < 1) {
        throw DimensionError("expression data: empty matrix");
    }
    if (static_cast<Eigen::Index>(data.probe_ids.size()) !=
        data.matrix.rows()) {
        throw DimensionError("expression data: probe_ids size " +
                             std::to_string(data.probe_ids.size()) +
                             " != row count " +
                             std::to_string(data.matrix.rows()));
    }
    if (static_cast<Eigen::Index>(data.sample_ids.size()) !=
            data.matrix.cols() ||
        data.sample_ids.size() != data.group_labels.size()) {
        throw DimensionError(
            "expression data: sample_ids/group_labels size mismatch");
    }
    std::unordered_set<std::string> seen;
    for (const std::string& id : data.probe_ids) {
        if (!seen.insert(id).second) {
            throw DomainError("expression data: duplicate probe id " + id);
        }
    }
    std::set<std::string> groups(data.group_labels.begin(),
                                 data.group_labels.end());
    if (groups.size() != 2) {
        throw DomainError("expression data: need exactly two groups, got " +
                          std::to_string(groups.size()));
    }
}

ExpressionData iqr_filter(const ExpressionData& data, double intensity_floor,
                          double intensity_fraction, double iqr_floor) {
    validate(data);
    if (!(intensity_floor >= 0.0) || !(iqr_floor >= 0.0) ||
        !(intensity_fraction >= 0.0 && intensity_fraction <= 1.0)) {
        throw DomainError("iqr_filter: thresholds must be nonnegative and "
                          "the fraction within [0, 1]");
    }
    const Eigen::Index n_probes = data.matrix.rows();
    const Eigen::Index n_samples = data.matrix.cols();
    std::vector<Eigen::Index> kept;
    std::vector<double> logs(static_cast<std::size_t>(n_samples));
    for (Eigen::Index g = 0; g < n_probes; ++g) {
        long bright = 0;
        for (Eigen::Index s = 0; s < n_samples; ++s) {
            const double v = data.matrix(g, s);
            const double abs_scale = data.log2_scale ? std::exp2(v) : v;
            if (abs_scale > intensity_floor) {
                ++bright;
            }
            logs[static_cast<std::size_t>(s)] =
                data.log2_scale ? v : log2_clamped(v);
        }
        if (static_cast<double>(bright) <
            intensity_fraction * static_cast<double>(n_samples)) {
            continue;
        }
        std::sort(logs.begin(), logs.end());
        const double iqr =
            quantile_sorted(logs, 0.75) - quantile_sorted(logs, 0.25);
        if (iqr > iqr_floor) {
            kept.push_back(g);
        }
    }
    if (kept.empty()) {
        throw InsufficientDataError("iqr_filter: no probes pass the filter");
    }

    ExpressionData out;
    out.matrix.resize(static_cast<Eigen::Index>(kept.size()), n_samples);
    out.probe_ids.reserve(kept.size());
    for (std::size_t k = 0; k < kept.size(); ++k) {
        out.matrix.row(static_cast<Eigen::Index>(k)) =
            data.matrix.row(kept[k]);
        out.probe_ids.push_back(
            data.probe_ids[static_cast<std::size_t>(kept[k])]);
    }
    out.sample_ids = data.sample_ids;
    out.group_labels = data.group_labels;
    out.log2_scale = data.log2_scale;
    return out;
}

std::vector<bool> bh_fdr(const std::vector<double>& pvals, double alpha) {
    if (pvals.empty()) {
        throw DomainError("bh_fdr: empty p-value list");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw DomainError("bh_fdr: alpha must lie in [0, 1]");
    }
    for (const double p : pvals) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw DomainError("bh_fdr: p-value outside [0, 1]");
        }
    }
    const std::size_t m = pvals.size();
    std::vector<double> sorted = pvals;
    std::sort(sorted.begin(), sorted.end());
    double threshold = -1.0;
    for (std::size_t k = m; k >= 1; --k) {
        if (sorted[k - 1] <= static_cast<double>(k) * alpha /
                                 static_cast<double>(m)) {
            threshold = sorted[k - 1];
            break;
        }
    }
    std::vector<bool> flags(m, false);
    if (threshold >= 0.0) {
        for (std::size_t i = 0; i < m; ++i) {
            flags[i] = pvals[i] <= threshold;
        }
    }
    return flags;
}

std::vector<GeneSetResult> run_genesets(const ExpressionData& data,
                                        const GeneSetCollection& sets,
                                        double alpha, long min_size,
                                        TestScale scale) {
    validate(data);
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("run_genesets: alpha must lie in (0, 1)");
    }
    if (min_size < 1) {
        throw DomainError("run_genesets: min_size must be at least 1");
    }
    {
        std::unordered_set<std::string> names;
        for (const GeneSet& s : sets.sets) {
            if (!names.insert(s.name).second) {
                throw DomainError("run_genesets: duplicate set name " +
                                  s.name);
            }
        }
    }

    const GroupSplit groups = split_groups(data);
    if (groups.idx1.size() < 4 || groups.idx2.size() < 4) {
        throw InsufficientDataError(
            "run_genesets: each group needs at least 4 samples (got " +
            std::to_string(groups.idx1.size()) + " and " +
            std::to_string(groups.idx2.size()) + ")");
    }

    // One conversion of the whole matrix to the testing scale.
    Eigen::MatrixXd tm;
    if (scale == TestScale::Log2) {
        if (data.log2_scale) {
            tm = data.matrix;
        } else {
            tm = data.matrix.unaryExpr(
                [](double v) { return log2_clamped(v); });
        }
    } else {
        if (data.log2_scale) {
            tm = data.matrix.unaryExpr(
                [](double v) { return std::exp2(v); });
        } else {
            tm = data.matrix;
        }
    }

    std::unordered_map<std::string, Eigen::Index> probe_index;
    probe_index.reserve(data.probe_ids.size());
    for (std::size_t g = 0; g < data.probe_ids.size(); ++g) {
        probe_index.emplace(data.probe_ids[g], static_cast<Eigen::Index>(g));
    }

    std::vector<GeneSetResult> results;
    results.reserve(sets.sets.size());
    for (const GeneSet& set : sets.sets) {
        GeneSetResult r;
        r.name = set.name;

        std::vector<Eigen::Index> avail;
        std::unordered_set<std::string> seen_members;
        for (const std::string& member : set.members) {
            if (!seen_members.insert(member).second) {
                continue;
            }
            const auto it = probe_index.find(member);
            if (it == probe_index.end()) {
                ++r.unknown_members;
            } else {
                avail.push_back(it->second);
            }
        }
        // Probe order of the data, so member ordering cannot matter.
        std::sort(avail.begin(), avail.end());
        r.size_available = static_cast<long>(avail.size());
        if (r.size_available < min_size) {
            results.push_back(std::move(r));
            continue;
        }

        const Eigen::Index n1 = static_cast<Eigen::Index>(groups.idx1.size());
        const Eigen::Index n2 = static_cast<Eigen::Index>(groups.idx2.size());
        const Eigen::Index k_all = static_cast<Eigen::Index>(avail.size());
        Eigen::MatrixXd x1(n1, k_all);
        Eigen::MatrixXd x2(n2, k_all);
        for (Eigen::Index b = 0; b < k_all; ++b) {
            for (Eigen::Index a = 0; a < n1; ++a) {
                x1(a, b) = tm(avail[static_cast<std::size_t>(b)],
                              groups.idx1[static_cast<std::size_t>(a)]);
            }
            for (Eigen::Index a = 0; a < n2; ++a) {
                x2(a, b) = tm(avail[static_cast<std::size_t>(b)],
                              groups.idx2[static_cast<std::size_t>(a)]);
            }
        }

        std::vector<Eigen::Index> usable;
        for (Eigen::Index b = 0; b < k_all; ++b) {
            const bool const1 =
                x1.col(b).maxCoeff() == x1.col(b).minCoeff();
            const bool const2 =
                x2.col(b).maxCoeff() == x2.col(b).minCoeff();
            if (const1 || const2) {
                ++r.dropped_constant;
            } else {
                usable.push_back(b);
            }
        }
        r.size_used = static_cast<long>(usable.size());
        if (r.size_used < min_size) {
            r.error = "only " + std::to_string(r.size_used) +
                      " usable probes after dropping " +
                      std::to_string(r.dropped_constant) +
                      " per-group-constant probes (min_size " +
                      std::to_string(min_size) + ")";
            results.push_back(std::move(r));
            continue;
        }

        Eigen::MatrixXd u1(n1, r.size_used);
        Eigen::MatrixXd u2(n2, r.size_used);
        for (std::size_t b = 0; b < usable.size(); ++b) {
            u1.col(static_cast<Eigen::Index>(b)) = x1.col(usable[b]);
            u2.col(static_cast<Eigen::Index>(b)) = x2.col(usable[b]);
        }

        try {
            const SampleMatrix sx(std::move(u1));
            const SampleMatrix sy(std::move(u2));
            const LcOutcome lc = lc_test(sx, sy);
            const ClxOutcome clx = clx_test(sx, sy);
            const CombinedOutcome fisher = fisher_combine(lc.p, clx.p);
            const CombinedOutcome bonf =
                alt_combine(CombineMethod::Bonferroni, lc.p, clx.p);
            r.p_lc = lc.p;
            r.p_clx = clx.p;
            r.p_fisher = fisher.p;
            r.p_bonferroni = bonf.p;
            r.significant_at_alpha.lc = lc.p.value <= alpha;
            r.significant_at_alpha.clx = clx.p.value <= alpha;
            r.significant_at_alpha.fisher = fisher.p.value <= alpha;
            r.significant_at_alpha.bonferroni = bonf.p.value <= alpha;
            r.tested = true;
        } catch (const Error& e) {
            r.error = e.what();
        }
        results.push_back(std::move(r));
    }

    // BH per method over exactly the sets that were tested.
    std::vector<std::size_t> tested_idx;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].tested) {
            tested_idx.push_back(i);
        }
    }
    if (!tested_idx.empty()) {
        const auto apply_bh = [&](auto pick_p, auto pick_flag) {
            std::vector<double> ps;
            ps.reserve(tested_idx.size());
            for (const std::size_t i : tested_idx) {
                ps.push_back(pick_p(results[i]));
            }
            const std::vector<bool> flags = bh_fdr(ps, alpha);
            for (std::size_t k = 0; k < tested_idx.size(); ++k) {
                pick_flag(results[tested_idx[k]]) = flags[k];
            }
        };
        apply_bh([](const GeneSetResult& r) { return r.p_lc.value; },
                 [](GeneSetResult& r) -> decltype(auto) {
                     return (r.bh_significant.lc);
                 });
        apply_bh([](const GeneSetResult& r) { return r.p_clx.value; },
                 [](GeneSetResult& r) -> decltype(auto) {
                     return (r.bh_significant.clx);
                 });
        apply_bh([](const GeneSetResult& r) { return r.p_fisher.value; },
                 [](GeneSetResult& r) -> decltype(auto) {
                     return (r.bh_significant.fisher);
                 });
        apply_bh([](const GeneSetResult& r) { return r.p_bonferroni.value; },
                 [](GeneSetResult& r) -> decltype(auto) {
                     return (r.bh_significant.bonferroni);
                 });
    }
    return results;
}

GeneSetSummary summarize(const std::vector<GeneSetResult>& results) {
    GeneSetSummary s;
    s.supplied = static_cast<long>(results.size());
    for (const GeneSetResult& r : results) {
        if (r.tested) {
            ++s.tested;
            s.significant_at_alpha.lc += r.significant_at_alpha.lc ? 1 : 0;
            s.significant_at_alpha.clx += r.significant_at_alpha.clx ? 1 : 0;
            s.significant_at_alpha.fisher +=
                r.significant_at_alpha.fisher ? 1 : 0;
            s.significant_at_alpha.bonferroni +=
                r.significant_at_alpha.bonferroni ? 1 : 0;
            s.bh_significant.lc += r.bh_significant.lc ? 1 : 0;
            s.bh_significant.clx += r.bh_significant.clx ? 1 : 0;
            s.bh_significant.fisher += r.bh_significant.fisher ? 1 : 0;
            s.bh_significant.bonferroni +=
                r.bh_significant.bonferroni ? 1 : 0;
        } else if (!r.error.empty()) {
            ++s.errored;
        } else {
            ++s.excluded_small;
        }
    }
    return s;
}

}  // namespace coveq
