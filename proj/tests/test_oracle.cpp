#include "doctest.h"
#include "test_support.hpp"

#include "henn/error.hpp"
#include "henn/oracle.hpp"

using namespace henn;
using namespace henn::oracle;
using testing::part;

TEST_CASE("mc mean of a flat GDD") {
    const auto p = part(3, {{0}, {1, 2}});
    const auto est = mc_expectation(GddParams::flat(p), Statistic::mean_k(0), 200000, 1);
    CHECK(est.n == 200000);
    CHECK(est.std_error > 0.0);
    CHECK(est.z_score(1.0 / 3.0) <= 3.0);
}

TEST_CASE("mc E[log p_0] under Dir(2,1,1)") {
    const auto p = part(3, {{0}, {1}, {2}});
    const auto est = mc_expectation(GddParams(p, {2, 1, 1}, {0, 0, 0}), Statistic::log_p_k(0), 200000, 2);
    CHECK(est.z_score(-5.0 / 6.0) <= 3.0);
}

TEST_CASE("mc is deterministic and validates inputs") {
    const auto p = part(3, {{0}, {1, 2}});
    const GddParams g(p, {1.5, 0.7, 2}, {0, 1});
    const auto a = mc_expectation(g, Statistic::neg_log_pdf(), 5000, 9);
    const auto b = mc_expectation(g, Statistic::neg_log_pdf(), 5000, 9);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    CHECK_THROWS_AS(mc_expectation(g, Statistic::mean_k(0), 999, 1), DomainError);
    CHECK_THROWS_AS(mc_expectation(g, Statistic::mean_k(3), 1000, 1), DomainError);
    CHECK_THROWS_AS(mc_expectation(g, Statistic::log_group_j(2), 1000, 1), DomainError);
}

TEST_CASE("statistic tags") {
    CHECK(Statistic::parse("mean_2").kind == Statistic::Kind::MeanK);
    CHECK(Statistic::parse("mean_2").index == 2);
    CHECK(Statistic::parse("log_p_0").kind == Statistic::Kind::LogPK);
    CHECK(Statistic::parse("log_group_1").index == 1);
    CHECK(Statistic::parse("neg_log_pdf").kind == Statistic::Kind::NegLogPdf);
    CHECK(Statistic::parse("log_ratio_to_flat").kind == Statistic::Kind::LogRatioToFlat);
    CHECK(Statistic::parse("pce", LabelVector::singleton(3, 1)).kind == Statistic::Kind::Pce);
    CHECK_THROWS_AS(Statistic::parse("pce"), DomainError);
    CHECK_THROWS_AS(Statistic::parse("median_1"), DomainError);
    CHECK_THROWS_AS(Statistic::parse("mean_x"), DomainError);
}

TEST_CASE("finite_diff") {
    const double at[] = {1.0, 2.0};
    const auto g = finite_diff([](std::span<const double> x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); }, at);
    CHECK_NEAR(g[0], 1.0, 1e-8);
    CHECK_NEAR(g[1], 2.0, 1e-8);
    const auto z = finite_diff([](std::span<const double>) { return 3.0; }, at);
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);
    try {
        finite_diff([](std::span<const double> x) { return x[1] > 2.0 ? std::log(-1.0) : 0.0; }, at);
        FAIL("expected a domain error");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("coordinate 1") != std::string::npos);
    }
}

TEST_CASE("quadrature") {
    const auto p2 = part(2, {{0}, {1}});
    CHECK_NEAR(simplex_quadrature(GddParams::flat(p2)), 1.0, 1e-4);
    CHECK_NEAR(simplex_quadrature(GddParams(p2, {2, 1}, {0, 0})), 1.0, 1e-6);
    const auto p3 = part(3, {{0}, {1, 2}});
    CHECK_NEAR(simplex_quadrature(GddParams(p3, {4, 1, 1}, {0, 24})), 1.0, 1e-2);
    const auto p4 = part(4, {{0, 1}, {2, 3}});
    CHECK_THROWS_AS(simplex_quadrature(GddParams::flat(p4)), UnsupportedError);
}

TEST_CASE("relative error") {
    const double a[] = {1, 0}, b[] = {1, 0}, c[] = {0, 1};
    CHECK(relative_error(a, b) == 0.0);
    CHECK_NEAR(relative_error(a, c), std::sqrt(2.0), 1e-15);
    const double z[] = {0, 0};
    CHECK(relative_error(z, z) == 0.0);
}

TEST_CASE("verify suite detects a perturbed digamma") {
    VerifyOptions opt;
    opt.mc_samples = 2000;
    opt.mc_cases = 2;
    auto lib = SpecialFns::library();
    opt.fns.digamma = [lib](double x) { return lib.digamma(x) + 1e-3; };
    const auto checks = run_verify_suite(opt);
    bool caught = false;
    for (const auto& c : checks)
        if (c.name == "digamma = d/dx log_gamma" || c.name == "special values") caught = caught || !c.passed;
    CHECK(caught);

    VerifyOptions clean = opt;
    clean.fns = SpecialFns::library();
    for (const auto& c : run_verify_suite(clean))
        if (c.name.rfind("MC", 0) != 0) CHECK_MESSAGE(c.passed, c.name << ": " << c.measured);
}

TEST_CASE("format_checks lists measured error and tolerance") {
    const std::vector<CheckResult> cs = {{"alpha", 1e-13, 1e-12, true, ""}, {"beta", 4.0, 3.0, false, "z"}};
    const auto text = format_checks(cs);
    CHECK(text.find("PASS") != std::string::npos);
    CHECK(text.find("FAIL") != std::string::npos);
    CHECK(text.find("tol=") != std::string::npos);
    CHECK(text.find("1/2 checks passed") != std::string::npos);
}
