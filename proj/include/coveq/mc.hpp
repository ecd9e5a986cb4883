#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coveq/pvalue.hpp"
#include "coveq/simgen.hpp"

namespace coveq {

enum class TestMethod { Lc, Clx, Fisher, Bonferroni, Tippett, Stouffer, Cauchy };

std::optional<TestMethod> test_method_from_string(std::string_view s);
std::string to_string(TestMethod m);

struct McConfig {
    std::vector<CovModelSpec> models;
    Eigen::Index n1 = 0;
    Eigen::Index n2 = 0;
    int reps = 1000;
    double alpha = 0.05;
    std::vector<TestMethod> methods;
    std::uint64_t master_seed = 0;
    int workers = 1;
};

// Throws SpecError on empty models/methods, duplicate methods, reps < 1,
// alpha outside (0,1), n1 or n2 < 2, workers < 1, or an invalid model spec.
void validate(const McConfig& config);

struct McRow {
    std::string model;
    std::string alternative;
    Eigen::Index n1 = 0;
    Eigen::Index n2 = 0;
    Eigen::Index p = 0;
    TestMethod method = TestMethod::Fisher;
    long rejections = 0;
    long reps = 0;  // successful replications
    double rate = 0.0;
    double mc_stderr = 0.0;
    std::uint64_t seed = 0;  // cell seed
    long failures = 0;
};

struct McReport {
    std::vector<McRow> rows;
    std::uint64_t master_seed = 0;
};

// Cell seed: the master seed mixed with the cell identity, so a cell's
// results do not depend on which grid it is part of.
std::uint64_t cell_seed(std::uint64_t master_seed, const CovModelSpec& spec,
                        Eigen::Index n1, Eigen::Index n2);

// One replication recomputed from its child seed; the harness produces
// byte-identical values through its cached fast path. Used to assert the
// paired design.
struct RepOutcome {
    TestMethod method;
    PValue p;
};
std::vector<RepOutcome> run_replication(const CovModelSpec& spec,
                                        Eigen::Index n1, Eigen::Index n2,
                                        const std::vector<TestMethod>& methods,
                                        std::uint64_t child_seed);

// Monte Carlo over one (model, alternative, n1, n2, p) cell: one report row
// per method. Replication r uses child seed derive_seed(seed, {r});
// aggregation is integer counting, so results are independent of worker
// scheduling. alpha may be 0 or 1 here (degenerate levels used by tests).
// A cell with more than 1% failed replications aborts with diagnostics.
std::vector<McRow> run_cell(const CovModelSpec& spec, Eigen::Index n1,
                            Eigen::Index n2, int reps, double alpha,
                            const std::vector<TestMethod>& methods,
                            std::uint64_t seed, int workers = 1);

// run_cell over config.models with cell seeds derived from the master seed.
McReport run_grid(const McConfig& config);

enum class TableFormat { Tsv, Json, Markdown };
std::optional<TableFormat> table_format_from_string(std::string_view s);

// Stable column order: model, alternative, n1, n2, p, method, rate,
// mc_stderr, reps, seed, failures. Rates render as percentages with one
// decimal in tsv/markdown; json carries full-precision values.
std::string emit_table(const McReport& report, TableFormat format);

}  // namespace coveq
