#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "coveq/errors.hpp"
#include "coveq/mc.hpp"

using coveq::AltKind;
using coveq::CovModel;
using coveq::CovModelSpec;
using coveq::McConfig;
using coveq::McRow;
using coveq::TestMethod;

namespace {

CovModelSpec make_spec(CovModel model, Eigen::Index p,
                       AltKind alt = AltKind::Null) {
    CovModelSpec spec;
    spec.model = model;
    spec.p = p;
    spec.alternative = alt;
    return spec;
}

const std::vector<TestMethod> kTrio = {TestMethod::Fisher, TestMethod::Clx,
                                       TestMethod::Lc};

}  // namespace

TEST_CASE("method names round-trip") {
    for (TestMethod m : {TestMethod::Lc, TestMethod::Clx, TestMethod::Fisher,
                         TestMethod::Bonferroni, TestMethod::Tippett,
                         TestMethod::Stouffer, TestMethod::Cauchy}) {
        CHECK(coveq::test_method_from_string(coveq::to_string(m)) == m);
    }
    CHECK_FALSE(coveq::test_method_from_string("fishr").has_value());
}

TEST_CASE("config validation") {
    McConfig config;
    config.models = {make_spec(CovModel::M1, 10)};
    config.n1 = 10;
    config.n2 = 10;
    config.reps = 5;
    config.methods = kTrio;
    CHECK_NOTHROW(coveq::validate(config));

    McConfig bad = config;
    bad.models.clear();
    CHECK_THROWS_AS(coveq::validate(bad), coveq::SpecError);
    bad = config;
    bad.reps = 0;
    CHECK_THROWS_AS(coveq::validate(bad), coveq::SpecError);
    bad = config;
    bad.alpha = 0.0;
    CHECK_THROWS_AS(coveq::validate(bad), coveq::SpecError);
    bad = config;
    bad.alpha = 1.0;
    CHECK_THROWS_AS(coveq::validate(bad), coveq::SpecError);
    bad = config;
    bad.methods = {TestMethod::Lc, TestMethod::Lc};
    CHECK_THROWS_AS(coveq::validate(bad), coveq::SpecError);
    bad = config;
    bad.n1 = 1;
    CHECK_THROWS_AS(coveq::validate(bad), coveq::SpecError);
    bad = config;
    bad.workers = 0;
    CHECK_THROWS_AS(coveq::validate(bad), coveq::SpecError);
}

TEST_CASE("degenerate levels hit the boundary rates") {
    const CovModelSpec spec = make_spec(CovModel::M1, 8);
    const std::vector<McRow> all =
        coveq::run_cell(spec, 10, 10, 20, 1.0, kTrio, 42);
    for (const McRow& row : all) {
        CHECK(row.rate == 1.0);
        CHECK(row.rejections == row.reps);
    }
    const std::vector<McRow> none =
        coveq::run_cell(spec, 10, 10, 20, 0.0, kTrio, 42);
    for (const McRow& row : none) {
        CHECK(row.rate == 0.0);
        CHECK(row.rejections == 0);
    }
}

TEST_CASE("worker count does not change results") {
    const CovModelSpec spec = make_spec(CovModel::M2, 10, AltKind::Sparse);
    const std::vector<McRow> one =
        coveq::run_cell(spec, 12, 12, 30, 0.05, kTrio, 777, 1);
    const std::vector<McRow> three =
        coveq::run_cell(spec, 12, 12, 30, 0.05, kTrio, 777, 3);
    REQUIRE(one.size() == three.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].rejections == three[i].rejections);
        CHECK(one[i].reps == three[i].reps);
        CHECK(one[i].failures == three[i].failures);
        CHECK(one[i].seed == three[i].seed);
    }
}

TEST_CASE("cell results do not depend on the surrounding grid") {
    McConfig small;
    small.models = {make_spec(CovModel::M1, 8)};
    small.n1 = 10;
    small.n2 = 10;
    small.reps = 25;
    small.methods = kTrio;
    small.master_seed = 99;

    McConfig big = small;
    big.models = {make_spec(CovModel::M4, 8), make_spec(CovModel::M1, 8)};

    const coveq::McReport alone = coveq::run_grid(small);
    const coveq::McReport grid = coveq::run_grid(big);
    REQUIRE(alone.rows.size() == 3);
    REQUIRE(grid.rows.size() == 6);
    for (std::size_t i = 0; i < 3; ++i) {
        // m1 rows are the second half of the two-model grid.
        CHECK(grid.rows[3 + i].rejections == alone.rows[i].rejections);
        CHECK(grid.rows[3 + i].seed == alone.rows[i].seed);
    }
}

TEST_CASE("paired design: replications recompute from their child seeds") {
    const CovModelSpec spec = make_spec(CovModel::M3, 10, AltKind::Sparse);
    const Eigen::Index n1 = 14, n2 = 9;
    const int reps = 12;
    const double alpha = 0.3;
    const std::vector<TestMethod> methods = {
        TestMethod::Fisher, TestMethod::Clx,      TestMethod::Lc,
        TestMethod::Tippett, TestMethod::Stouffer, TestMethod::Cauchy,
        TestMethod::Bonferroni};
    const std::uint64_t cell = coveq::cell_seed(31337, spec, n1, n2);
    const std::vector<McRow> rows =
        coveq::run_cell(spec, n1, n2, reps, alpha, methods, cell, 2);

    REQUIRE(rows.size() == methods.size());
    for (const McRow& row : rows) CHECK(row.seed == cell);

    std::vector<long> tally(methods.size(), 0);
    for (int r = 0; r < reps; ++r) {
        const std::uint64_t child = coveq::derive_seed(cell, {static_cast<std::uint64_t>(r)});
        const std::vector<coveq::RepOutcome> first =
            coveq::run_replication(spec, n1, n2, methods, child);
        const std::vector<coveq::RepOutcome> second =
            coveq::run_replication(spec, n1, n2, methods, child);
        REQUIRE(first.size() == methods.size());
        for (std::size_t k = 0; k < methods.size(); ++k) {
            CHECK(first[k].p.value == second[k].p.value);
            CHECK(first[k].method == methods[k]);
            if (first[k].p.value <= alpha) ++tally[k];
        }
    }
    for (std::size_t k = 0; k < methods.size(); ++k) {
        CHECK(rows[k].rejections == tally[k]);
        CHECK(rows[k].reps == reps);
        CHECK(rows[k].failures == 0);
    }
}

TEST_CASE("frozen sparse pairs are stable across runs") {
    CovModelSpec spec = make_spec(CovModel::M1, 8, AltKind::Sparse);
    spec.freeze_u = true;
    const std::vector<McRow> a = coveq::run_cell(spec, 10, 10, 15, 0.2, kTrio, 5);
    const std::vector<McRow> b = coveq::run_cell(spec, 10, 10, 15, 0.2, kTrio, 5);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].rejections == b[i].rejections);
    }
    CHECK(coveq::cell_seed(5, spec, 10, 10) !=
          coveq::cell_seed(5, make_spec(CovModel::M1, 8, AltKind::Sparse), 10, 10));
}

TEST_CASE("every replication failing aborts the cell with diagnostics") {
    // p = 2 breaks the maximum-form test (needs p >= 3) on every replication.
    const CovModelSpec spec = make_spec(CovModel::M1, 2);
    try {
        coveq::run_cell(spec, 10, 10, 10, 0.05, {TestMethod::Clx}, 1);
        FAIL("expected an abort");
    } catch (const coveq::Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("10") != std::string::npos);
    }
}

TEST_CASE("lc-only cells run fine at p = 2") {
    const std::vector<McRow> rows =
        coveq::run_cell(make_spec(CovModel::M1, 2), 10, 10, 10, 0.05,
                        {TestMethod::Lc}, 1);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].failures == 0);
    CHECK(rows[0].reps == 10);
}

TEST_CASE("null rates stay loosely near alpha on a small cell") {
    const std::vector<McRow> rows = coveq::run_cell(make_spec(CovModel::M1, 40), 60,
                                                    60, 300, 0.05, kTrio, 2026);
    for (const McRow& row : rows) {
        CHECK(row.rate >= 0.005);
        CHECK(row.rate <= 0.105);
        CHECK(row.mc_stderr ==
              doctest::Approx(std::sqrt(row.rate * (1.0 - row.rate) / row.reps)));
    }
}

TEST_CASE("tsv table shape and determinism") {
    McConfig config;
    config.models = {make_spec(CovModel::M1, 6)};
    config.n1 = 8;
    config.n2 = 8;
    config.reps = 10;
    config.methods = {TestMethod::Lc};
    config.master_seed = 3;
    const coveq::McReport report = coveq::run_grid(config);
    const std::string tsv = coveq::emit_table(report, coveq::TableFormat::Tsv);
    // One header line plus one data line.
    CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 2);
    CHECK(tsv.rfind("model\talternative\tn1\tn2\tp\tmethod\trate\tmc_stderr\treps\tseed\tfailures\n",
                    0) == 0);
    CHECK(tsv == coveq::emit_table(coveq::run_grid(config), coveq::TableFormat::Tsv));
}

TEST_CASE("json table round-trips") {
    McConfig config;
    config.models = {make_spec(CovModel::M2, 6, AltKind::Sparse)};
    config.n1 = 9;
    config.n2 = 7;
    config.reps = 8;
    config.methods = kTrio;
    config.master_seed = 11;
    const coveq::McReport report = coveq::run_grid(config);
    const std::string text = coveq::emit_table(report, coveq::TableFormat::Json);
    const nlohmann::json doc = nlohmann::json::parse(text);
    CHECK(doc["master_seed"].get<std::uint64_t>() == 11);
    REQUIRE(doc["rows"].size() == report.rows.size());
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const nlohmann::json& row = doc["rows"][i];
        CHECK(row["model"].get<std::string>() == report.rows[i].model);
        CHECK(row["method"].get<std::string>() == coveq::to_string(report.rows[i].method));
        CHECK(row["rate"].get<double>() == report.rows[i].rate);
        CHECK(row["rejections"].get<long>() == report.rows[i].rejections);
        CHECK(row["seed"].get<std::uint64_t>() == report.rows[i].seed);
    }
}

TEST_CASE("markdown table mentions each cell") {
    McConfig config;
    config.models = {make_spec(CovModel::M1, 6), make_spec(CovModel::M4, 6)};
    config.n1 = 8;
    config.n2 = 8;
    config.reps = 5;
    config.methods = {TestMethod::Fisher, TestMethod::Lc};
    config.master_seed = 8;
    const std::string md =
        coveq::emit_table(coveq::run_grid(config), coveq::TableFormat::Markdown);
    CHECK(md.find("m1") != std::string::npos);
    CHECK(md.find("m4") != std::string::npos);
    CHECK(md.find("fisher") != std::string::npos);
    CHECK(md.find("|") != std::string::npos);
}

TEST_CASE("emit_table rejects an empty report") {
    coveq::McReport empty;
    CHECK_THROWS_AS(coveq::emit_table(empty, coveq::TableFormat::Tsv),
                    coveq::SpecError);
}

TEST_CASE("table format names parse") {
    CHECK(coveq::table_format_from_string("tsv") == coveq::TableFormat::Tsv);
    CHECK(coveq::table_format_from_string("json") == coveq::TableFormat::Json);
    CHECK(coveq::table_format_from_string("markdown") == coveq::TableFormat::Markdown);
    CHECK_FALSE(coveq::table_format_from_string("csv").has_value());
}
