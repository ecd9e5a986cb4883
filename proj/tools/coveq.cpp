// coveq: two-sample covariance equality tests (quadratic form, maximum
// form, Fisher combination), a Monte Carlo harness, and a gene-set
// pipeline. Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coveq/clx.hpp"
#include "coveq/combine.hpp"
#include "coveq/errors.hpp"
#include "coveq/geneset.hpp"
#include "coveq/io.hpp"
#include "coveq/lc.hpp"
#include "coveq/matrix.hpp"
#include "coveq/mc.hpp"
#include "coveq/simgen.hpp"

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

void deliver(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
    } else {
        coveq::atomic_write(out_path, content);
    }
}

int resolve_workers(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("COVEQ_WORKERS")) {
        try {
            std::size_t pos = 0;
            const int n = std::stoi(env, &pos);
            if (pos != std::string(env).size() || n < 1) throw std::invalid_argument(env);
            return n;
        } catch (const std::exception&) {
            throw coveq::SpecError(std::string("COVEQ_WORKERS must be a positive integer, got '") + env + "'");
        }
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// ---------------------------------------------------------------------------
// coveq test

struct TestArgs {
    std::string x_file;
    std::string y_file;
    std::string method = "all";
    std::string format = "text";
    std::string estimator = "full";
    std::string out;
    double alpha = 0.05;
    bool no_center = false;
};

int cmd_test(const TestArgs& args) {
    if (!(args.alpha > 0.0 && args.alpha < 1.0)) {
        throw coveq::SpecError("--alpha must lie in (0, 1)");
    }
    const coveq::SampleMatrix x = coveq::read_sample_matrix(args.x_file);
    const coveq::SampleMatrix y = coveq::read_sample_matrix(args.y_file);

    coveq::LcOptions lc_opts;
    lc_opts.center = !args.no_center;
    lc_opts.estimator = args.estimator == "full" ? coveq::LcEstimator::Full
                                                 : coveq::LcEstimator::Simplified;

    const bool want_lc = args.method == "lc" || args.method == "fisher" || args.method == "all";
    const bool want_clx = args.method == "clx" || args.method == "fisher" || args.method == "all";
    const bool show_lc = args.method == "lc" || args.method == "all";
    const bool show_clx = args.method == "clx" || args.method == "all";
    const bool show_fisher = args.method == "fisher" || args.method == "all";

    std::optional<coveq::LcOutcome> lc;
    std::optional<coveq::ClxOutcome> clx;
    std::optional<coveq::CombinedOutcome> fisher;
    if (want_lc) lc = coveq::lc_test(x, y, lc_opts);
    if (want_clx) clx = coveq::clx_test(x, y);
    if (show_fisher) fisher = coveq::fisher_combine(lc->p, clx->p);

    const auto reject = [&](const coveq::PValue& p) { return p.value <= args.alpha; };

    std::string body;
    if (args.format == "json") {
        json doc;
        doc["n1"] = x.n_obs();
        doc["n2"] = y.n_obs();
        doc["p"] = x.n_vars();
        doc["alpha"] = args.alpha;
        doc["method"] = args.method;
        if (show_lc) {
            doc["lc"] = {{"a_hat", lc->a_hat},
                         {"b_hat", lc->b_hat},
                         {"c_hat", lc->c_hat},
                         {"t_tilde", lc->t_tilde},
                         {"sigma0_hat", lc->sigma0_hat},
                         {"z", lc->z},
                         {"p", lc->p.value},
                         {"log_p", lc->p.log_value},
                         {"reject", reject(lc->p)}};
        }
        if (show_clx) {
            doc["clx"] = {{"m", clx->m},
                          {"m_norm", clx->m_norm},
                          {"argmax_row", clx->argmax.first + 1},
                          {"argmax_col", clx->argmax.second + 1},
                          {"p", clx->p.value},
                          {"log_p", clx->p.log_value},
                          {"reject", reject(clx->p)}};
        }
        if (show_fisher) {
            doc["fisher"] = {{"f", fisher->f},
                             {"p", fisher->p.value},
                             {"log_p", fisher->p.log_value},
                             {"p_lc", fisher->p_t.value},
                             {"p_clx", fisher->p_m.value},
                             {"reject", reject(fisher->p)}};
        }
        body = doc.dump(2) + "\n";
    } else {
        body += "n1 = " + std::to_string(x.n_obs()) + "  n2 = " + std::to_string(y.n_obs()) +
                "  p = " + std::to_string(x.n_vars()) + "  alpha = " + fmt(args.alpha) + "\n";
        if (show_lc) {
            body += "\nLC quadratic-form test\n";
            body += "  a_hat      = " + fmt(lc->a_hat) + "\n";
            body += "  b_hat      = " + fmt(lc->b_hat) + "\n";
            body += "  c_hat      = " + fmt(lc->c_hat) + "\n";
            body += "  t_tilde    = " + fmt(lc->t_tilde) + "\n";
            body += "  sigma0_hat = " + fmt(lc->sigma0_hat) + "\n";
            body += "  z          = " + fmt(lc->z) + "\n";
            body += "  p          = " + fmt(lc->p.value) + "\n";
            body += "  log_p      = " + fmt(lc->p.log_value) + "\n";
            body += "  decision   = " + std::string(reject(lc->p) ? "reject" : "retain") + "\n";
        }
        if (show_clx) {
            body += "\nCLX maximum-form test\n";
            body += "  m        = " + fmt(clx->m) + "\n";
            body += "  m_norm   = " + fmt(clx->m_norm) + "\n";
            body += "  argmax   = (" + std::to_string(clx->argmax.first + 1) + ", " +
                    std::to_string(clx->argmax.second + 1) + ")\n";
            body += "  p        = " + fmt(clx->p.value) + "\n";
            body += "  log_p    = " + fmt(clx->p.log_value) + "\n";
            body += "  decision = " + std::string(reject(clx->p) ? "reject" : "retain") + "\n";
        }
        if (show_fisher) {
            body += "\nFisher combination\n";
            body += "  f        = " + fmt(fisher->f) + "\n";
            body += "  p        = " + fmt(fisher->p.value) + "\n";
            body += "  log_p    = " + fmt(fisher->p.log_value) + "\n";
            body += "  p_lc     = " + fmt(fisher->p_t.value) + "\n";
            body += "  p_clx    = " + fmt(fisher->p_m.value) + "\n";
            body += "  decision = " + std::string(reject(fisher->p) ? "reject" : "retain") + "\n";
        }
    }
    deliver(args.out, body);
    return 0;
}

// ---------------------------------------------------------------------------
// coveq sim

struct SimArgs {
    std::string preset;
    std::string model;
    std::string alt = "null";
    std::optional<double> rho;
    std::vector<long> p_list;
    long n = 0;
    long n1 = 0;
    long n2 = 0;
    int reps = 1000;
    double alpha = 0.05;
    std::string methods = "fisher,clx,lc";
    std::uint64_t seed = 0;
    int workers = 0;
    std::string format = "tsv";
    std::string out;
    bool freeze_u = false;
};

std::vector<coveq::TestMethod> parse_methods(const std::string& csv) {
    std::vector<coveq::TestMethod> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const std::size_t comma = csv.find(',', start);
        const std::string tok = csv.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!tok.empty()) {
            const auto m = coveq::test_method_from_string(tok);
            if (!m) throw coveq::SpecError("unknown method '" + tok + "'");
            out.push_back(*m);
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw coveq::SpecError("--methods must name at least one method");
    return out;
}

struct SizePoint {
    long n1;
    long n2;
};

struct SimPlan {
    std::vector<coveq::CovModelSpec> specs;
    std::vector<SizePoint> sizes;
};

SimPlan preset_plan(const std::string& name) {
    const std::vector<long> dims = {100, 200};
    SimPlan plan;
    plan.sizes = {{100, 100}, {200, 200}};
    const auto add = [&](coveq::CovModel model, coveq::AltKind alt, std::optional<double> rho) {
        for (long p : dims) {
            coveq::CovModelSpec spec;
            spec.model = model;
            spec.p = p;
            spec.alternative = alt;
            spec.rho = rho;
            plan.specs.push_back(spec);
        }
    };
    using coveq::AltKind;
    using coveq::CovModel;
    if (name == "paper-table1-desk") {
        for (auto m : {CovModel::M1, CovModel::M2, CovModel::M3, CovModel::M4, CovModel::M5})
            add(m, AltKind::Null, std::nullopt);
    } else if (name == "paper-table2-desk") {
        for (auto m : {CovModel::M1, CovModel::M2, CovModel::M3, CovModel::M4, CovModel::M5})
            add(m, AltKind::Sparse, std::nullopt);
    } else if (name == "paper-table3-desk") {
        add(CovModel::M1, AltKind::Dense, 0.2);
        add(CovModel::M1, AltKind::Dense, 0.3);
        for (auto m : {CovModel::M2, CovModel::M3, CovModel::M4, CovModel::M5})
            add(m, AltKind::Dense, std::nullopt);
    } else {
        throw coveq::SpecError("unknown preset '" + name + "'");
    }
    return plan;
}

int cmd_sim(const SimArgs& args) {
    SimPlan plan;
    if (!args.preset.empty()) {
        if (!args.model.empty() || !args.p_list.empty() || args.n != 0 || args.n1 != 0 || args.n2 != 0) {
            throw coveq::SpecError("--preset replaces --model/--alt/--p/--n; drop the manual grid flags");
        }
        plan = preset_plan(args.preset);
    } else {
        if (args.model.empty()) throw coveq::SpecError("--model is required without --preset");
        if (args.p_list.empty()) throw coveq::SpecError("--p is required without --preset");
        const auto model = coveq::cov_model_from_string(args.model);
        if (!model) throw coveq::SpecError("unknown model '" + args.model + "'");
        const auto alt = coveq::alt_kind_from_string(args.alt);
        if (!alt) throw coveq::SpecError("unknown alternative '" + args.alt + "'");
        for (long p : args.p_list) {
            coveq::CovModelSpec spec;
            spec.model = *model;
            spec.p = p;
            spec.alternative = *alt;
            spec.rho = args.rho;
            spec.freeze_u = args.freeze_u;
            plan.specs.push_back(spec);
        }
        long n1 = args.n1;
        long n2 = args.n2;
        if (n1 != 0 || n2 != 0) {
            if (args.n != 0) throw coveq::SpecError("give either --n or --n1/--n2, not both");
            if (n1 == 0 || n2 == 0) throw coveq::SpecError("--n1 and --n2 must be given together");
        } else {
            const long n = args.n == 0 ? 100 : args.n;
            n1 = n;
            n2 = n;
        }
        plan.sizes = {{n1, n2}};
    }

    const auto fmt_kind = coveq::table_format_from_string(args.format);
    if (!fmt_kind) throw coveq::SpecError("unknown format '" + args.format + "'");

    coveq::McConfig config;
    config.models = plan.specs;
    config.reps = args.reps;
    config.alpha = args.alpha;
    config.methods = parse_methods(args.methods);
    config.master_seed = args.seed;
    config.workers = resolve_workers(args.workers);

    coveq::McReport report;
    report.master_seed = args.seed;
    for (const SizePoint& size : plan.sizes) {
        config.n1 = size.n1;
        config.n2 = size.n2;
        coveq::McReport part = coveq::run_grid(config);
        report.rows.insert(report.rows.end(), part.rows.begin(), part.rows.end());
    }

    std::cerr << "master seed: " << args.seed << "\n";
    deliver(args.out, coveq::emit_table(report, *fmt_kind));
    return 0;
}

// ---------------------------------------------------------------------------
// coveq genesets

struct GenesetArgs {
    std::string expr_file;
    std::string labels_file;
    std::string gmt_file;
    double alpha = 0.05;
    long min_size = 10;
    bool fdr = true;
    bool log2_input = false;
    std::string scale = "log2";
    std::string format = "tsv";
    std::string out;
    bool filter = false;
    double intensity_floor = 100.0;
    double intensity_fraction = 0.25;
    double iqr_floor = 0.5;
};

std::string geneset_tsv(const std::vector<coveq::GeneSetResult>& results, bool fdr) {
    std::string out =
        "name\tsize_available\tsize_used\tdropped_constant\tunknown_members\ttested\terror"
        "\tp_lc\tp_clx\tp_fisher\tp_bonferroni\tsig_lc\tsig_clx\tsig_fisher\tsig_bonferroni";
    if (fdr) out += "\tbh_lc\tbh_clx\tbh_fisher\tbh_bonferroni";
    out += "\n";
    const auto pcol = [](bool tested, const coveq::PValue& p) {
        if (!tested) return std::string();
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", p.value);
        return std::string(buf);
    };
    const auto fcol = [](bool tested, bool flag) {
        return tested ? std::string(flag ? "1" : "0") : std::string();
    };
    for (const coveq::GeneSetResult& r : results) {
        out += r.name;
        out += "\t" + std::to_string(r.size_available);
        out += "\t" + std::to_string(r.size_used);
        out += "\t" + std::to_string(r.dropped_constant);
        out += "\t" + std::to_string(r.unknown_members);
        out += "\t" + std::string(r.tested ? "1" : "0");
        out += "\t" + r.error;
        out += "\t" + pcol(r.tested, r.p_lc);
        out += "\t" + pcol(r.tested, r.p_clx);
        out += "\t" + pcol(r.tested, r.p_fisher);
        out += "\t" + pcol(r.tested, r.p_bonferroni);
        out += "\t" + fcol(r.tested, r.significant_at_alpha.lc);
        out += "\t" + fcol(r.tested, r.significant_at_alpha.clx);
        out += "\t" + fcol(r.tested, r.significant_at_alpha.fisher);
        out += "\t" + fcol(r.tested, r.significant_at_alpha.bonferroni);
        if (fdr) {
            out += "\t" + fcol(r.tested, r.bh_significant.lc);
            out += "\t" + fcol(r.tested, r.bh_significant.clx);
            out += "\t" + fcol(r.tested, r.bh_significant.fisher);
            out += "\t" + fcol(r.tested, r.bh_significant.bonferroni);
        }
        out += "\n";
    }
    return out;
}

json counts_json(const coveq::GeneSetCounts& c) {
    return {{"lc", c.lc}, {"clx", c.clx}, {"fisher", c.fisher}, {"bonferroni", c.bonferroni}};
}

json flags_json(const coveq::MethodFlags& f) {
    return {{"lc", f.lc}, {"clx", f.clx}, {"fisher", f.fisher}, {"bonferroni", f.bonferroni}};
}

int cmd_genesets(const GenesetArgs& args) {
    if (!(args.alpha > 0.0 && args.alpha < 1.0)) {
        throw coveq::SpecError("--alpha must lie in (0, 1)");
    }
    if (args.min_size < 1) throw coveq::SpecError("--min-size must be at least 1");
    const coveq::TestScale scale =
        args.scale == "absolute" ? coveq::TestScale::Absolute : coveq::TestScale::Log2;

    coveq::ExpressionData data =
        coveq::read_expression(args.expr_file, args.labels_file, args.log2_input);
    std::vector<std::string> tags;
    for (const std::string& label : data.group_labels) {
        if (std::find(tags.begin(), tags.end(), label) == tags.end()) tags.push_back(label);
    }
    if (tags.size() != 2) {
        throw coveq::SpecError("labels must define exactly two groups, got " +
                               std::to_string(tags.size()));
    }
    const coveq::GeneSetCollection sets = coveq::read_gmt(args.gmt_file);

    if (args.filter) {
        data = coveq::iqr_filter(data, args.intensity_floor, args.intensity_fraction,
                                 args.iqr_floor);
    }
    const std::vector<coveq::GeneSetResult> results =
        coveq::run_genesets(data, sets, args.alpha, args.min_size, scale);
    const coveq::GeneSetSummary summary = coveq::summarize(results);

    std::string body;
    if (args.format == "json") {
        json doc;
        doc["alpha"] = args.alpha;
        doc["min_size"] = args.min_size;
        doc["scale"] = args.scale;
        doc["fdr"] = args.fdr;
        doc["summary"] = {{"supplied", summary.supplied},
                          {"tested", summary.tested},
                          {"excluded_small", summary.excluded_small},
                          {"errored", summary.errored},
                          {"significant_at_alpha", counts_json(summary.significant_at_alpha)},
                          {"bh_significant", counts_json(summary.bh_significant)}};
        json rows = json::array();
        for (const coveq::GeneSetResult& r : results) {
            json row = {{"name", r.name},
                        {"size_available", r.size_available},
                        {"size_used", r.size_used},
                        {"dropped_constant", r.dropped_constant},
                        {"unknown_members", r.unknown_members},
                        {"tested", r.tested},
                        {"error", r.error}};
            if (r.tested) {
                row["p"] = {{"lc", r.p_lc.value},
                            {"clx", r.p_clx.value},
                            {"fisher", r.p_fisher.value},
                            {"bonferroni", r.p_bonferroni.value}};
                row["significant_at_alpha"] = flags_json(r.significant_at_alpha);
                if (args.fdr) row["bh_significant"] = flags_json(r.bh_significant);
            }
            rows.push_back(row);
        }
        doc["sets"] = rows;
        body = doc.dump(2) + "\n";
    } else {
        body = geneset_tsv(results, args.fdr);
    }

    deliver(args.out, body);

    if (summary.tested == 0) std::cerr << "warning: no sets tested\n";
    std::cerr << "sets supplied: " << summary.supplied << "\n"
              << "sets tested: " << summary.tested << "\n"
              << "excluded (below min size): " << summary.excluded_small << "\n"
              << "errored: " << summary.errored << "\n"
              << "significant at alpha: lc=" << summary.significant_at_alpha.lc
              << " clx=" << summary.significant_at_alpha.clx
              << " fisher=" << summary.significant_at_alpha.fisher
              << " bonferroni=" << summary.significant_at_alpha.bonferroni << "\n";
    if (args.fdr) {
        std::cerr << "bh significant: lc=" << summary.bh_significant.lc
                  << " clx=" << summary.bh_significant.clx
                  << " fisher=" << summary.bh_significant.fisher
                  << " bonferroni=" << summary.bh_significant.bonferroni << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-sample tests for equality of high-dimensional covariance matrices"};
    app.require_subcommand(1);

    TestArgs test_args;
    CLI::App* test_cmd = app.add_subcommand(
        "test", "run the covariance equality tests on two sample files");
    test_cmd->add_option("x", test_args.x_file, "first sample (rows = observations)")
        ->required();
    test_cmd->add_option("y", test_args.y_file, "second sample")->required();
    test_cmd->add_option("--method", test_args.method, "which statistic to report")
        ->check(CLI::IsMember({"lc", "clx", "fisher", "all"}));
    test_cmd->add_option("--alpha", test_args.alpha, "test level (default 0.05)");
    test_cmd->add_option("--format", test_args.format, "output format")
        ->check(CLI::IsMember({"text", "json"}));
    test_cmd->add_option("--estimator", test_args.estimator,
                         "trace estimator for the LC test (default full)")
        ->check(CLI::IsMember({"simplified", "full"}));
    test_cmd->add_flag("--no-center", test_args.no_center,
                       "skip internal centering in the LC test");
    test_cmd->add_option("--out", test_args.out, "write the report to a file");

    SimArgs sim_args;
    CLI::App* sim_cmd =
        app.add_subcommand("sim", "Monte Carlo size/power tables over covariance models");
    sim_cmd->add_option("--preset", sim_args.preset,
                        "paper-table1-desk | paper-table2-desk | paper-table3-desk");
    sim_cmd->add_option("--model", sim_args.model, "covariance model m1..m5");
    sim_cmd->add_option("--alt", sim_args.alt, "null | sparse | dense");
    sim_cmd->add_option("--rho", sim_args.rho, "AR(1) rho for the m1 dense alternative");
    sim_cmd->add_option("--p", sim_args.p_list, "dimension(s)");
    sim_cmd->add_option("--n", sim_args.n, "common sample size (default 100)");
    sim_cmd->add_option("--n1", sim_args.n1, "first sample size");
    sim_cmd->add_option("--n2", sim_args.n2, "second sample size");
    sim_cmd->add_option("--reps", sim_args.reps, "replications per cell (default 1000)")
        ->check(CLI::Range(1, 1000000000));
    sim_cmd->add_option("--alpha", sim_args.alpha, "test level (default 0.05)");
    sim_cmd->add_option("--methods", sim_args.methods,
                        "comma-separated: lc, clx, fisher, bonferroni, tippett, stouffer, cauchy");
    sim_cmd->add_option("--seed", sim_args.seed, "master seed (default 0)");
    sim_cmd->add_option("--workers", sim_args.workers,
                        "worker threads (default: COVEQ_WORKERS or hardware)");
    sim_cmd->add_option("--format", sim_args.format, "tsv | json | markdown");
    sim_cmd->add_option("--out", sim_args.out, "write the table to a file");
    sim_cmd->add_flag("--freeze-u", sim_args.freeze_u,
                      "freeze one sparse perturbation per cell");

    GenesetArgs gs_args;
    CLI::App* gs_cmd =
        app.add_subcommand("genesets", "test gene sets for covariance differences");
    gs_cmd->add_option("--expr", gs_args.expr_file, "expression matrix (probes x samples)")
        ->required();
    gs_cmd->add_option("--labels", gs_args.labels_file, "two-column sample/group file")
        ->required();
    gs_cmd->add_option("--gmt", gs_args.gmt_file, "gene sets in GMT format")->required();
    gs_cmd->add_option("--alpha", gs_args.alpha, "test level (default 0.05)");
    gs_cmd->add_option("--min-size", gs_args.min_size, "minimum set size (default 10)");
    gs_cmd->add_flag("--fdr,!--no-fdr", gs_args.fdr, "apply Benjamini-Hochberg (default on)");
    gs_cmd->add_flag("--log2-input", gs_args.log2_input,
                     "expression values are already log2");
    gs_cmd->add_option("--scale", gs_args.scale, "scale the tests run on")
        ->check(CLI::IsMember({"log2", "absolute"}));
    gs_cmd->add_option("--format", gs_args.format, "output format")
        ->check(CLI::IsMember({"tsv", "json"}));
    gs_cmd->add_option("--out", gs_args.out, "write the report to a file");
    gs_cmd->add_flag("--filter", gs_args.filter, "apply the intensity/IQR prefilter");
    gs_cmd->add_option("--intensity-floor", gs_args.intensity_floor,
                       "absolute intensity floor (default 100)");
    gs_cmd->add_option("--intensity-fraction", gs_args.intensity_fraction,
                       "fraction of samples above the floor (default 0.25)");
    gs_cmd->add_option("--iqr-floor", gs_args.iqr_floor, "log2 IQR floor (default 0.5)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (test_cmd->parsed()) return cmd_test(test_args);
        if (sim_cmd->parsed()) return cmd_sim(sim_args);
        if (gs_cmd->parsed()) return cmd_genesets(gs_args);
    } catch (const coveq::SpecError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const coveq::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
