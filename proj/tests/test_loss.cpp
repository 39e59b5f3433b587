#include "doctest.h"
#include "test_support.hpp"

#include "henn/error.hpp"
#include "henn/loss.hpp"
#include "henn/oracle.hpp"
#include "henn/special_fn.hpp"

using namespace henn;
using testing::bits;
using testing::part;

namespace {

const auto p3 = part(3, {{0}, {1, 2}});

struct RandomCase {
    GddParams params;
    LabelVector y;
};

RandomCase random_case(Rng& rng) {
    static const std::vector<std::shared_ptr<const Partition>> parts = {
        part(3, {{0}, {1, 2}}), part(4, {{0, 1}, {2, 3}}), part(5, {{0, 3}, {1}, {2, 4}}),
        part(5, {{0, 1, 2}, {3}, {4}}), part(2, {{0}, {1}})};
    const auto& p = parts[rng.below(parts.size())];
    std::vector<double> a(p->num_classes()), c(p->num_groups(), 0.0);
    for (double& v : a) v = 0.3 + 6.0 * rng.uniform();
    for (GroupIndex j : p->composite_groups()) c[j] = 0.01 + 6.0 * rng.uniform();
    LabelVector y;
    if (p->num_composite() > 0 && rng.uniform() < 0.5)
        y = LabelVector::group_indicator(*p, p->composite_groups()[rng.below(p->num_composite())]);
    else
        y = LabelVector::singleton(p->num_classes(), rng.below(p->num_classes()));
    return {GddParams(p, a, c), y};
}

std::vector<double> coords(const GddParams& g) {
    std::vector<double> v = g.alpha();
    for (GroupIndex j : g.partition().composite_groups()) v.push_back(g.c()[j]);
    return v;
}

GddParams rebuild(const GddParams& like, std::span<const double> v) {
    const auto& p = like.partition();
    std::vector<double> a(v.begin(), v.begin() + p.num_classes()), c(p.num_groups(), 0.0);
    for (std::size_t i = 0; i < p.num_composite(); ++i) c[p.composite_groups()[i]] = v[p.num_classes() + i];
    return GddParams(like.shared_partition(), a, c);
}

}  // namespace

TEST_CASE("pce") {
    const double p[] = {0.5, 0.25, 0.25};
    CHECK_NEAR(pce(p, bits({1, 0, 0})).value, std::log(2.0), 1e-15);
    const double q[] = {0.0, 0.5, 0.5};
    CHECK_NEAR(pce(q, bits({0, 1, 1})).value, 0.0, 1e-15);
    const auto clamped = pce(q, bits({1, 0, 0}));
    CHECK(clamped.clamped);
    CHECK_NEAR(clamped.value, -std::log(kPceFloor), 1e-9);
    CHECK_FALSE(pce(p, bits({1, 0, 0})).clamped);
    // Singleton labels give the ordinary cross-entropy.
    CHECK_NEAR(pce(p, bits({0, 1, 0})).value, -std::log(p[1]), 1e-15);
}

TEST_CASE("upce closed forms") {
    CHECK_NEAR(upce(GddParams(p3, {1, 1, 1}, {0, 3}), bits({0, 1, 1})), 0.2, 1e-14);
    CHECK_NEAR(upce(GddParams(p3, {2, 1, 1}, {0, 0}), bits({1, 0, 0})), 5.0 / 6, 1e-14);
    // Extra concentration on the singleton group {0} is equivalent to raising
    // alpha_0, which is how such a density is represented here.
    CHECK_THROWS_AS(GddParams(p3, {2, 1, 1}, {1, 0}), DomainError);
    CHECK_NEAR(upce(GddParams(p3, {3, 1, 1}, {0, 0}), bits({1, 0, 0})), 7.0 / 12, 1e-14);
    CHECK_THROWS_AS(upce(GddParams::flat(p3), bits({1, 1, 0})), ValidationError);
}

TEST_CASE("upce is positive and reduces to UCE at c = 0") {
    Rng rng(21, 0);
    for (int i = 0; i < 300; ++i) {
        const auto cs = random_case(rng);
        CHECK(upce(cs.params, cs.y) > 0.0);
        const GddParams d(cs.params.shared_partition(), cs.params.alpha(),
                          std::vector<double>(cs.params.partition().num_groups(), 0.0));
        const auto k = rng.below(d.alpha().size());
        double a0 = 0;
        for (double a : d.alpha()) a0 += a;
        CHECK_NEAR(upce(d, LabelVector::singleton(d.alpha().size(), k)),
                   special::digamma(a0) - special::digamma(d.alpha()[k]), 1e-12);
    }
}

TEST_CASE("masking") {
    const GddParams g(p3, {4, 1, 1}, {0, 24});
    const auto mc = masked_params(g, bits({0, 1, 1}));
    CHECK(mc.alpha() == std::vector<double>{4, 1, 1});
    CHECK(mc.c() == std::vector<double>{0, 0});
    const auto ms = masked_params(g, bits({1, 0, 0}));
    CHECK(ms.alpha() == std::vector<double>{1, 1, 1});
    CHECK(ms.c() == std::vector<double>{0, 24});
    const auto mf = masked_params(GddParams::flat(p3), bits({0, 1, 0}));
    CHECK(mf.alpha() == std::vector<double>{1, 1, 1});
    CHECK(mf.c() == std::vector<double>{0, 0});
}

TEST_CASE("regularizer values") {
    CHECK_NEAR(reg(GddParams::flat(p3), bits({1, 0, 0})), 0.0, 1e-13);
    CHECK_NEAR(reg(GddParams(p3, {250, 1, 1}, {0, 0}), bits({1, 0, 0})), 0.0, 1e-14);

    const auto singles = part(3, {{0}, {1}, {2}});
    const GddParams g(singles, {1, 2, 1}, {0, 0, 0});
    const double closed = std::log(3.0) - 5.0 / 6.0;
    CHECK_NEAR(reg(g, bits({1, 0, 0})), closed, 1e-14);
    const auto mc = oracle::mc_expectation(g, oracle::Statistic::log_ratio_to_flat(), 200000, 5);
    CHECK_NEAR(mc.mean, reg(g, bits({1, 0, 0})), 1e-2);
}

TEST_CASE("regularizer modes") {
    const GddParams g(p3, {3, 2, 1.5}, {0, 4});
    const auto y = bits({1, 0, 0});
    CHECK(reg(g, y, RegMode::None) == 0.0);
    CHECK_NEAR(reg(g, y, RegMode::Entropy), -entropy(g), 1e-15);
    const double dir[] = {1, 2, 1.5};
    CHECK_NEAR(reg(g, y, RegMode::DirichletKl), oracle::dirichlet::kl_to_uniform(dir), 1e-12);
    CHECK(parse_reg_mode("dirichlet-kl") == RegMode::DirichletKl);
    CHECK(parse_reg_mode("entropy") == RegMode::Entropy);
    CHECK_FALSE(parse_reg_mode("l2").has_value());
    for (RegMode m : {RegMode::Kl, RegMode::Entropy, RegMode::DirichletKl, RegMode::None})
        CHECK(parse_reg_mode(to_string(m)) == m);
}

TEST_CASE("total loss identity") {
    const auto flat2 = part(2, {{0}, {1}});
    const auto b = total_loss(GddParams::flat(flat2), bits({1, 0}), 0.1);
    CHECK_NEAR(b.upce, 1.0, 1e-14);
    CHECK_NEAR(b.reg, 0.0, 1e-13);
    CHECK_NEAR(b.total, 1.0, 1e-14);
    Rng rng(22, 0);
    for (int i = 0; i < 100; ++i) {
        const auto cs = random_case(rng);
        const double lambda = rng.uniform();
        const auto t = total_loss(cs.params, cs.y, lambda);
        CHECK_NEAR(t.total, t.upce + lambda * t.reg, 1e-12);
        CHECK(total_loss(cs.params, cs.y, 0.0).total == t.upce);
    }
}

TEST_CASE("gradient examples") {
    const auto g = grad_upce(GddParams(p3, {1, 1, 1}, {0, 0}), bits({1, 0, 0}));
    CHECK_NEAR(g.d_c[1], special::trigamma(3.0), 1e-15);
    CHECK_NEAR(g.d_c[1], 0.3949340668482264, 1e-12);
    CHECK(g.d_c[0] == 0.0);
}

TEST_CASE("gradients match finite differences for every mode") {
    Rng rng(23, 0);
    for (RegMode mode : {RegMode::Kl, RegMode::Entropy, RegMode::DirichletKl, RegMode::None}) {
        for (int i = 0; i < 100; ++i) {
            const auto cs = random_case(rng);
            const double lambda = mode == RegMode::None ? 0.0 : rng.uniform();
            const auto an = grad_total(cs.params, cs.y, lambda, mode);
            std::vector<double> a = an.d_alpha;
            for (GroupIndex j : cs.params.partition().composite_groups()) a.push_back(an.d_c[j]);
            const auto fd = oracle::finite_diff(
                [&](std::span<const double> v) { return total_loss(rebuild(cs.params, v), cs.y, lambda, mode).total; },
                coords(cs.params));
            CHECK(oracle::relative_error(a, fd) <= 1e-5);
            for (GroupIndex j = 0; j < cs.params.partition().num_groups(); ++j)
                if (!cs.params.partition().is_composite(j)) CHECK(an.d_c[j] == 0.0);
        }
    }
}

TEST_CASE("upce gradient sign structure") {
    Rng rng(24, 0);
    for (int i = 0; i < 300; ++i) {
        const auto cs = random_case(rng);
        const auto& p = cs.params.partition();
        const auto g = grad_upce(cs.params, cs.y);
        const auto kind = label_kind(cs.y, p);
        if (kind.is_singleton()) {
            const GroupIndex jy = p.containing_group(kind.index);
            CHECK(g.d_alpha[kind.index] < 0.0);
            for (ClassIndex k = 0; k < p.num_classes(); ++k)
                if (p.containing_group(k) != jy) CHECK(g.d_alpha[k] > 0.0);
            if (p.is_composite(jy)) CHECK(g.d_c[jy] < 0.0);
        } else {
            CHECK(g.d_c[kind.index] < 0.0);
            for (GroupIndex j : p.composite_groups())
                if (j != kind.index) CHECK(g.d_c[j] > 0.0);
        }
    }
}

TEST_CASE("upce is bounded below by pce at the mean") {
    Rng rng(25, 0);
    for (int i = 0; i < 200; ++i) {
        const auto cs = random_case(rng);
        CHECK(upce(cs.params, cs.y) - pce(mean(cs.params), cs.y).value >= -1e-10);
    }
}

TEST_CASE("upce equals the Monte-Carlo mean of pce") {
    const auto p5 = part(5, {{0, 3}, {1}, {2, 4}});
    const GddParams g(p5, {1.2, 0.8, 2.5, 3.0, 0.6}, {1.1, 0, 2.0});
    for (const auto& y : {LabelVector::singleton(5, 3), LabelVector::group_indicator(*p5, 2)}) {
        const auto est = oracle::mc_expectation(g, oracle::Statistic::pce(y), 200000, 77);
        CHECK(est.z_score(upce(g, y)) <= 3.0);
    }
}
