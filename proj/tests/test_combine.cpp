#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "coveq/combine.hpp"
#include "coveq/dist.hpp"
#include "coveq/errors.hpp"
#include "support.hpp"

using coveq::CombineMethod;
using coveq::PValue;

namespace {

PValue pv(double v) { return PValue::from_value(v); }

}  // namespace

TEST_CASE("fisher_combine fixed points") {
    const coveq::CombinedOutcome none = coveq::fisher_combine(pv(1.0), pv(1.0));
    CHECK(none.f == 0.0);
    CHECK(none.p.value == 1.0);

    const double e1 = std::exp(-1.0);
    const coveq::CombinedOutcome four = coveq::fisher_combine(pv(e1), pv(e1));
    CHECK(four.f == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(std::abs(four.p.value - 0.406006) < 1e-6);

    const coveq::CombinedOutcome nom = coveq::fisher_combine(pv(0.05), pv(0.05));
    CHECK(std::abs(nom.f - 11.9829) < 1e-4);
    CHECK(std::abs(nom.p.value - 0.01748) < 1e-4);
    // Frozen high-precision references for the same pair.
    CHECK(nom.f == doctest::Approx(11.9829290942).epsilon(1e-10));
    CHECK(nom.p.value == doctest::Approx(0.0174786613678).epsilon(1e-10));
}

TEST_CASE("fisher_combine consumes log space, not values") {
    // A p-value far below double underflow still combines to a finite f.
    const PValue tiny = PValue::from_log(-800.0);
    CHECK(tiny.value == 0.0);
    const coveq::CombinedOutcome out = coveq::fisher_combine(tiny, pv(0.5));
    CHECK(out.f == doctest::Approx(1600.0 - 2.0 * std::log(0.5)).epsilon(1e-12));
    CHECK(out.p.value == 0.0);  // underflows, but the log field is exact
    CHECK(out.p.log_value == doctest::Approx(-out.f / 2.0 + std::log1p(out.f / 2.0))
                                 .epsilon(1e-12));
}

TEST_CASE("fisher_combine with an exact zero p-value") {
    const PValue zero{0.0, -std::numeric_limits<double>::infinity()};
    const coveq::CombinedOutcome out = coveq::fisher_combine(zero, pv(0.3));
    CHECK(std::isinf(out.f));
    CHECK(out.f > 0.0);
    CHECK(out.p.value == 0.0);
    CHECK(std::isinf(out.p.log_value));
}

TEST_CASE("fisher_combine rejects invalid inputs") {
    const PValue bad{1.5, 0.4};  // log_value > 0
    CHECK_THROWS_AS(coveq::fisher_combine(bad, pv(0.5)), coveq::DomainError);
    const PValue nan_log{0.5, std::nan("")};
    CHECK_THROWS_AS(coveq::fisher_combine(nan_log, pv(0.5)), coveq::DomainError);
}

TEST_CASE("fisher_combine is exchangeable") {
    std::mt19937_64 gen(301);
    std::uniform_real_distribution<double> unif(1e-6, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        const PValue a = pv(unif(gen));
        const PValue b = pv(unif(gen));
        const coveq::CombinedOutcome ab = coveq::fisher_combine(a, b);
        const coveq::CombinedOutcome ba = coveq::fisher_combine(b, a);
        CHECK(ab.f == doctest::Approx(ba.f).epsilon(1e-14));
        CHECK(ab.p.value == doctest::Approx(ba.p.value).epsilon(1e-14));
    }
}

TEST_CASE("alternate combiners fixed points") {
    CHECK(coveq::alt_combine(CombineMethod::Bonferroni, pv(0.02), pv(0.5)).p.value ==
          doctest::Approx(0.04).epsilon(1e-13));
    CHECK(coveq::alt_combine(CombineMethod::Bonferroni, pv(0.9), pv(0.8)).p.value ==
          1.0);
    CHECK(coveq::alt_combine(CombineMethod::Cauchy, pv(0.5), pv(0.5)).p.value ==
          doctest::Approx(0.5).epsilon(1e-13));
    CHECK(coveq::alt_combine(CombineMethod::Tippett, pv(0.05), pv(0.05)).p.value ==
          doctest::Approx(0.0975).epsilon(1e-12));
    const coveq::CombinedOutcome st =
        coveq::alt_combine(CombineMethod::Stouffer, pv(0.05), pv(0.05));
    CHECK(std::abs(st.p.value - 0.01001) < 1e-5);
    CHECK(st.p.value == doctest::Approx(0.0100046268581).epsilon(1e-9));
}

TEST_CASE("alternate outcomes keep the Fisher statistic in f") {
    const coveq::CombinedOutcome fisher = coveq::fisher_combine(pv(0.1), pv(0.3));
    for (CombineMethod m : {CombineMethod::Bonferroni, CombineMethod::Tippett,
                            CombineMethod::Stouffer, CombineMethod::Cauchy}) {
        const coveq::CombinedOutcome out = coveq::alt_combine(m, pv(0.1), pv(0.3));
        CHECK(out.f == doctest::Approx(fisher.f).epsilon(1e-14));
        CHECK(out.method == m);
        CHECK(out.p_t.value == doctest::Approx(0.1));
        CHECK(out.p_m.value == doctest::Approx(0.3));
    }
    CHECK(coveq::alt_combine(CombineMethod::Fisher, pv(0.1), pv(0.3)).p.value ==
          doctest::Approx(fisher.p.value).epsilon(1e-14));
}

TEST_CASE("clamping keeps stouffer and cauchy finite at the extremes") {
    const PValue zero{0.0, -std::numeric_limits<double>::infinity()};
    const PValue one = pv(1.0);
    for (CombineMethod m : {CombineMethod::Stouffer, CombineMethod::Cauchy}) {
        for (const auto& pair :
             std::vector<std::pair<PValue, PValue>>{{zero, one}, {one, one}, {zero, zero}}) {
            const coveq::CombinedOutcome out =
                coveq::alt_combine(m, pair.first, pair.second);
            CHECK(std::isfinite(out.p.value));
            CHECK(out.p.value >= 0.0);
            CHECK(out.p.value <= 1.0);
        }
    }
}

TEST_CASE("all five combiners are monotone on a grid") {
    const std::vector<double> grid = {0.001, 0.01, 0.05, 0.2, 0.5, 0.8, 0.99};
    for (CombineMethod m :
         {CombineMethod::Fisher, CombineMethod::Bonferroni, CombineMethod::Tippett,
          CombineMethod::Stouffer, CombineMethod::Cauchy}) {
        for (double fixed : grid) {
            double prev = -1.0;
            for (double moving : grid) {
                const double combined =
                    coveq::alt_combine(m, pv(moving), pv(fixed)).p.value;
                CHECK(combined >= prev - 1e-13);
                prev = combined;
            }
        }
    }
}

TEST_CASE("fisher p-value is uniform under uniform inputs") {
    std::mt19937_64 gen(311);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> sample;
    sample.reserve(10000);
    for (int i = 0; i < 10000; ++i) {
        const double a = unif(gen);
        const double b = unif(gen);
        sample.push_back(coveq::fisher_combine(pv(a), pv(b)).p.value);
    }
    CHECK(testsup::ks_uniform(sample) <= 0.05);
}

TEST_CASE("method names round-trip") {
    for (CombineMethod m :
         {CombineMethod::Fisher, CombineMethod::Bonferroni, CombineMethod::Tippett,
          CombineMethod::Stouffer, CombineMethod::Cauchy}) {
        const auto back = coveq::combine_method_from_string(coveq::to_string(m));
        REQUIRE(back.has_value());
        CHECK(*back == m);
    }
    CHECK_FALSE(coveq::combine_method_from_string("fishr").has_value());
}
