#include "coveq/mc.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "coveq/clx.hpp"
#include "coveq/combine.hpp"
#include "coveq/errors.hpp"
#include "coveq/lc.hpp"
#include "coveq/matrix.hpp"

namespace coveq {

namespace {

constexpr std::uint64_t kFrozenPairToken = 0x66726f7a656e5551ULL;

CombineMethod to_combine(TestMethod m) {
    switch (m) {
        case TestMethod::Fisher: return CombineMethod::Fisher;
        case TestMethod::Bonferroni: return CombineMethod::Bonferroni;
        case TestMethod::Tippett: return CombineMethod::Tippett;
        case TestMethod::Stouffer: return CombineMethod::Stouffer;
        case TestMethod::Cauchy: return CombineMethod::Cauchy;
        case TestMethod::Lc:
        case TestMethod::Clx:
            break;
    }
    throw SpecError("mc: method is not a combiner");
}

// Per-cell deterministic work hoisted out of the replication loop. Absent
// fields mean the quantity is seed-dependent and must be rebuilt per
// replication.
struct CellPlan {
    std::optional<Eigen::MatrixXd> l1;
    std::optional<Eigen::MatrixXd> l2;
    std::optional<SymMatrix> sparse_base;
    std::optional<double> sparse_base_lmin;
};

CellPlan make_plan(const CovModelSpec& spec, std::uint64_t seed) {
    CellPlan plan;
    const bool deterministic_model = spec.model != CovModel::M5;
    switch (spec.alternative) {
        case AltKind::Null:
            if (deterministic_model) {
                plan.l1 = cholesky(null_covariance(spec));
                plan.l2 = plan.l1;
            }
            break;
        case AltKind::Sparse:
            if (spec.freeze_u) {
                Rng rng(derive_seed(seed, {kFrozenPairToken}));
                const CovPair pair = build_pair(spec, rng);
                plan.l1 = cholesky(pair.sigma1);
                plan.l2 = cholesky(pair.sigma2);
            } else if (deterministic_model) {
                plan.sparse_base = null_covariance(spec);
                plan.sparse_base_lmin = min_eigenvalue(*plan.sparse_base);
            }
            break;
        case AltKind::Dense:
            if (deterministic_model) {
                const CovPair pair = dense_alternative(spec);
                plan.l1 = cholesky(pair.sigma1);
                plan.l2 = cholesky(pair.sigma2);
            } else {
                plan.l2 = Eigen::MatrixXd::Identity(spec.p, spec.p);
            }
            break;
    }
    return plan;
}

std::vector<RepOutcome> rep_pvalues(const CovModelSpec& spec, Eigen::Index n1,
                                    Eigen::Index n2,
                                    const std::vector<TestMethod>& methods,
                                    std::uint64_t child_seed,
                                    const CellPlan* plan) {
    Rng rng(child_seed);

    // The covariance factors: cached when deterministic, otherwise rebuilt
    // from the replication stream in the same draw order as build_pair.
    Eigen::MatrixXd l1_own;
    Eigen::MatrixXd l2_own;
    const Eigen::MatrixXd* l1 = nullptr;
    const Eigen::MatrixXd* l2 = nullptr;
    switch (spec.alternative) {
        case AltKind::Null: {
            if (plan != nullptr && plan->l1.has_value()) {
                l1 = &*plan->l1;
                l2 = &*plan->l1;
            } else {
                l1_own = cholesky(null_covariance(spec, &rng));
                l1 = &l1_own;
                l2 = &l1_own;
            }
            break;
        }
        case AltKind::Sparse: {
            if (plan != nullptr && plan->l1.has_value()) {
                l1 = &*plan->l1;
                l2 = &*plan->l2;
                break;
            }
            std::optional<SymMatrix> base_own;
            const SymMatrix* base = nullptr;
            std::optional<double> base_lmin;
            if (plan != nullptr && plan->sparse_base.has_value()) {
                base = &*plan->sparse_base;
                base_lmin = plan->sparse_base_lmin;
            } else {
                base_own = null_covariance(spec, &rng);
                base = &*base_own;
            }
            const CovPair pair = sparse_alternative(*base, rng, base_lmin);
            l1_own = cholesky(pair.sigma1);
            l2_own = cholesky(pair.sigma2);
            l1 = &l1_own;
            l2 = &l2_own;
            break;
        }
        case AltKind::Dense: {
            if (plan != nullptr && plan->l1.has_value()) {
                l1 = &*plan->l1;
                l2 = &*plan->l2;
                break;
            }
            const CovPair pair = dense_alternative(spec, &rng);
            l1_own = cholesky(pair.sigma1);
            l1 = &l1_own;
            if (plan != nullptr && plan->l2.has_value()) {
                l2 = &*plan->l2;
            } else {
                l2_own = cholesky(pair.sigma2);
                l2 = &l2_own;
            }
            break;
        }
    }

    const SampleMatrix x = mvn_sample_chol(*l1, n1, rng);
    const SampleMatrix y = mvn_sample_chol(*l2, n2, rng);

    bool need_lc = false;
    bool need_clx = false;
    for (const TestMethod m : methods) {
        if (m == TestMethod::Lc) {
            need_lc = true;
        } else if (m == TestMethod::Clx) {
            need_clx = true;
        } else {
            need_lc = true;
            need_clx = true;
        }
    }
    std::optional<LcOutcome> lc;
    std::optional<ClxOutcome> clx;
    if (need_lc) {
        lc = lc_test(x, y);
    }
    if (need_clx) {
        clx = clx_test(x, y);
    }

    std::vector<RepOutcome> out;
    out.reserve(methods.size());
    for (const TestMethod m : methods) {
        switch (m) {
            case TestMethod::Lc:
                out.push_back({m, lc->p});
                break;
            case TestMethod::Clx:
                out.push_back({m, clx->p});
                break;
            default:
                out.push_back({m, alt_combine(to_combine(m), lc->p, clx->p).p});
                break;
        }
    }
    return out;
}

std::string cell_label(const CovModelSpec& spec, Eigen::Index n1,
                       Eigen::Index n2) {
    return to_string(spec.model) + "/" + to_string(spec.alternative) +
           " n1=" + std::to_string(n1) + " n2=" + std::to_string(n2) +
           " p=" + std::to_string(spec.p);
}

std::string percent(double fraction, int decimals) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, fraction * 100.0);
    return buf;
}

}  // namespace

std::optional<TestMethod> test_method_from_string(std::string_view s) {
    if (s == "lc") return TestMethod::Lc;
    if (s == "clx") return TestMethod::Clx;
    if (s == "fisher") return TestMethod::Fisher;
    if (s == "bonferroni") return TestMethod::Bonferroni;
    if (s == "tippett") return TestMethod::Tippett;
    if (s == "stouffer") return TestMethod::Stouffer;
    if (s == "cauchy") return TestMethod::Cauchy;
    return std::nullopt;
}

std::string to_string(TestMethod m) {
    switch (m) {
        case TestMethod::Lc: return "lc";
        case TestMethod::Clx: return "clx";
        case TestMethod::Fisher: return "fisher";
        case TestMethod::Bonferroni: return "bonferroni";
        case TestMethod::Tippett: return "tippett";
        case TestMethod::Stouffer: return "stouffer";
        case TestMethod::Cauchy: return "cauchy";
    }
    throw SpecError("mc: unknown method tag");
}

void validate(const McConfig& config) {
    if (config.models.empty()) {
        throw SpecError("mc config: no models");
    }
    for (const CovModelSpec& spec : config.models) {
        validate(spec);
    }
    if (config.n1 < 2 || config.n2 < 2) {
        throw SpecError("mc config: n1 and n2 must be at least 2");
    }
    if (config.reps < 1) {
        throw SpecError("mc config: reps must be at least 1");
    }
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
        throw SpecError("mc config: alpha must lie in (0, 1)");
    }
    if (config.methods.empty()) {
        throw SpecError("mc config: no methods");
    }
    std::set<TestMethod> seen;
    for (const TestMethod m : config.methods) {
        if (!seen.insert(m).second) {
            throw SpecError("mc config: duplicate method " + to_string(m));
        }
    }
    if (config.workers < 1) {
        throw SpecError("mc config: workers must be at least 1");
    }
}

std::uint64_t cell_seed(std::uint64_t master_seed, const CovModelSpec& spec,
                        Eigen::Index n1, Eigen::Index n2) {
    const std::uint64_t rho_token =
        spec.rho.has_value() ? std::bit_cast<std::uint64_t>(*spec.rho) : 0;
    return derive_seed(
        master_seed,
        {static_cast<std::uint64_t>(spec.model) + 1,
         static_cast<std::uint64_t>(spec.alternative) + 1,
         static_cast<std::uint64_t>(n1), static_cast<std::uint64_t>(n2),
         static_cast<std::uint64_t>(spec.p), rho_token,
         spec.freeze_u ? 1ULL : 0ULL});
}

std::vector<RepOutcome> run_replication(const CovModelSpec& spec,
                                        Eigen::Index n1, Eigen::Index n2,
                                        const std::vector<TestMethod>& methods,
                                        std::uint64_t child_seed) {
    return rep_pvalues(spec, n1, n2, methods, child_seed, nullptr);
}

std::vector<McRow> run_cell(const CovModelSpec& spec, Eigen::Index n1,
                            Eigen::Index n2, int reps, double alpha,
                            const std::vector<TestMethod>& methods,
                            std::uint64_t seed, int workers) {
    validate(spec);
    if (n1 < 2 || n2 < 2) {
        throw SpecError("run_cell: n1 and n2 must be at least 2");
    }
    if (reps < 1) {
        throw SpecError("run_cell: reps must be at least 1");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw SpecError("run_cell: alpha must lie in [0, 1]");
    }
    if (methods.empty()) {
        throw SpecError("run_cell: no methods");
    }
    if (workers < 1) {
        throw SpecError("run_cell: workers must be at least 1");
    }

    const CellPlan plan = make_plan(spec, seed);
    const std::size_t n_methods = methods.size();

    struct WorkerTally {
        std::vector<long> rejections;
        long failures = 0;
        long first_failed_rep = -1;
        std::string first_error;
    };
    const int n_workers = std::min<int>(workers, reps);
    std::vector<WorkerTally> tallies(static_cast<std::size_t>(n_workers));
    for (WorkerTally& t : tallies) {
        t.rejections.assign(n_methods, 0);
    }
    std::atomic<int> next_rep{0};

    auto work = [&](WorkerTally& tally) {
        for (;;) {
            const int r = next_rep.fetch_add(1, std::memory_order_relaxed);
            if (r >= reps) {
                return;
            }
            const std::uint64_t child =
                derive_seed(seed, {static_cast<std::uint64_t>(r)});
            try {
                const std::vector<RepOutcome> pv =
                    rep_pvalues(spec, n1, n2, methods, child, &plan);
                for (std::size_t k = 0; k < n_methods; ++k) {
                    if (alpha > 0.0 && pv[k].p.value <= alpha) {
                        ++tally.rejections[k];
                    }
                }
            } catch (const std::exception& e) {
                ++tally.failures;
                if (tally.first_failed_rep < 0) {
                    tally.first_failed_rep = r;
                    tally.first_error = e.what();
                }
            }
        }
    };

    if (n_workers == 1) {
        work(tallies[0]);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (WorkerTally& t : tallies) {
            pool.emplace_back(work, std::ref(t));
        }
        for (std::thread& t : pool) {
            t.join();
        }
    }

    std::vector<long> rejections(n_methods, 0);
    long failures = 0;
    long first_failed_rep = -1;
    std::string first_error;
    for (const WorkerTally& t : tallies) {
        for (std::size_t k = 0; k < n_methods; ++k) {
            rejections[k] += t.rejections[k];
        }
        failures += t.failures;
        if (t.first_failed_rep >= 0 &&
            (first_failed_rep < 0 || t.first_failed_rep < first_failed_rep)) {
            first_failed_rep = t.first_failed_rep;
            first_error = t.first_error;
        }
    }
    if (failures * 100 > reps) {
        throw Error("run_cell " + cell_label(spec, n1, n2) + ": " +
                    std::to_string(failures) + " of " + std::to_string(reps) +
                    " replications failed; first failure (rep " +
                    std::to_string(first_failed_rep) + "): " + first_error);
    }

    const long successes = static_cast<long>(reps) - failures;
    std::vector<McRow> rows;
    rows.reserve(n_methods);
    for (std::size_t k = 0; k < n_methods; ++k) {
        McRow row;
        row.model = to_string(spec.model);
        row.alternative = to_string(spec.alternative);
        row.n1 = n1;
        row.n2 = n2;
        row.p = spec.p;
        row.method = methods[k];
        row.rejections = rejections[k];
        row.reps = successes;
        row.rate = successes > 0
                       ? static_cast<double>(rejections[k]) /
                             static_cast<double>(successes)
                       : 0.0;
        row.mc_stderr =
            successes > 0
                ? std::sqrt(row.rate * (1.0 - row.rate) /
                            static_cast<double>(successes))
                : 0.0;
        row.seed = seed;
        row.failures = failures;
        rows.push_back(std::move(row));
    }
    return rows;
}

McReport run_grid(const McConfig& config) {
    validate(config);
    McReport report;
    report.master_seed = config.master_seed;
    for (const CovModelSpec& spec : config.models) {
        const std::uint64_t seed =
            cell_seed(config.master_seed, spec, config.n1, config.n2);
        std::vector<McRow> rows =
            run_cell(spec, config.n1, config.n2, config.reps, config.alpha,
                     config.methods, seed, config.workers);
        for (McRow& row : rows) {
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

std::optional<TableFormat> table_format_from_string(std::string_view s) {
    if (s == "tsv") return TableFormat::Tsv;
    if (s == "json") return TableFormat::Json;
    if (s == "markdown") return TableFormat::Markdown;
    return std::nullopt;
}

namespace {

std::string emit_tsv(const McReport& report) {
    std::string out =
        "model\talternative\tn1\tn2\tp\tmethod\trate\tmc_stderr\treps\tseed\t"
        "failures\n";
    for (const McRow& r : report.rows) {
        out += r.model;
        out += '\t';
        out += r.alternative;
        out += '\t';
        out += std::to_string(r.n1);
        out += '\t';
        out += std::to_string(r.n2);
        out += '\t';
        out += std::to_string(r.p);
        out += '\t';
        out += to_string(r.method);
        out += '\t';
        out += percent(r.rate, 1);
        out += '\t';
        out += percent(r.mc_stderr, 2);
        out += '\t';
        out += std::to_string(r.reps);
        out += '\t';
        out += std::to_string(r.seed);
        out += '\t';
        out += std::to_string(r.failures);
        out += '\n';
    }
    return out;
}

std::string emit_json(const McReport& report) {
    nlohmann::json j;
    j["master_seed"] = report.master_seed;
    j["rows"] = nlohmann::json::array();
    for (const McRow& r : report.rows) {
        j["rows"].push_back({{"model", r.model},
                             {"alternative", r.alternative},
                             {"n1", r.n1},
                             {"n2", r.n2},
                             {"p", r.p},
                             {"method", to_string(r.method)},
                             {"rejections", r.rejections},
                             {"reps", r.reps},
                             {"rate", r.rate},
                             {"mc_stderr", r.mc_stderr},
                             {"seed", r.seed},
                             {"failures", r.failures}});
    }
    return j.dump(2) + "\n";
}

std::string emit_markdown(const McReport& report) {
    // One section per (model, alternative), rows indexed by sample sizes,
    // one column per (p, method).
    std::vector<std::pair<std::string, std::string>> sections;
    for (const McRow& r : report.rows) {
        const std::pair<std::string, std::string> key{r.model, r.alternative};
        if (std::find(sections.begin(), sections.end(), key) ==
            sections.end()) {
            sections.push_back(key);
        }
    }

    std::string out;
    for (const auto& [model, alternative] : sections) {
        std::vector<std::pair<Eigen::Index, Eigen::Index>> sizes;
        std::vector<Eigen::Index> ps;
        std::vector<TestMethod> methods;
        std::map<std::tuple<Eigen::Index, Eigen::Index, Eigen::Index,
                            TestMethod>,
                 double>
            rates;
        for (const McRow& r : report.rows) {
            if (r.model != model || r.alternative != alternative) {
                continue;
            }
            const std::pair<Eigen::Index, Eigen::Index> size{r.n1, r.n2};
            if (std::find(sizes.begin(), sizes.end(), size) == sizes.end()) {
                sizes.push_back(size);
            }
            if (std::find(ps.begin(), ps.end(), r.p) == ps.end()) {
                ps.push_back(r.p);
            }
            if (std::find(methods.begin(), methods.end(), r.method) ==
                methods.end()) {
                methods.push_back(r.method);
            }
            rates[{r.n1, r.n2, r.p, r.method}] = r.rate;
        }

        out += "### " + model + " (" + alternative + ")\n\n";
        out += "| n1 | n2 |";
        for (const Eigen::Index p : ps) {
            for (const TestMethod m : methods) {
                out += " p=" + std::to_string(p) + " " + to_string(m) + " |";
            }
        }
        out += "\n|---|---|";
        for (std::size_t k = 0; k < ps.size() * methods.size(); ++k) {
            out += "---|";
        }
        out += "\n";
        for (const auto& [n1, n2] : sizes) {
            out += "| " + std::to_string(n1) + " | " + std::to_string(n2) +
                   " |";
            for (const Eigen::Index p : ps) {
                for (const TestMethod m : methods) {
                    const auto it = rates.find({n1, n2, p, m});
                    out += it == rates.end()
                               ? " - |"
                               : " " + percent(it->second, 1) + " |";
                }
            }
            out += "\n";
        }
        out += "\n";
    }
    return out;
}

}  // namespace

std::string emit_table(const McReport& report, TableFormat format) {
    if (report.rows.empty()) {
        throw SpecError("emit_table: empty report");
    }
    switch (format) {
        case TableFormat::Tsv: return emit_tsv(report);
        case TableFormat::Json: return emit_json(report);
        case TableFormat::Markdown: return emit_markdown(report);
    }
    throw SpecError("emit_table: unknown format");
}

}  // namespace coveq
