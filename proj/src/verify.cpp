#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "henn/error.hpp"
#include "henn/loss.hpp"
#include "henn/net.hpp"
#include "henn/opinion.hpp"
#include "henn/oracle.hpp"
#include "henn/special_fn.hpp"

namespace henn::oracle {

namespace {

struct Case {
    std::shared_ptr<const Partition> partition;
    GddParams params;
};

double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

// Random partition of K in [2, max_k] classes into eta in [2, min(K, max_eta)]
// groups. With need_composite, at least one group has two or more members.
std::shared_ptr<const Partition> random_partition(Rng& rng, std::size_t max_k, std::size_t max_eta,
                                                  bool need_composite) {
    for (;;) {
        const std::size_t k = 2 + rng.below(max_k - 1);
        const std::size_t eta = 2 + rng.below(std::min(k, max_eta) - 1);
        std::vector<ClassIndex> order(k);
        for (std::size_t i = 0; i < k; ++i) order[i] = i;
        for (std::size_t i = k; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        std::vector<std::vector<ClassIndex>> groups(eta);
        for (std::size_t i = 0; i < k; ++i) groups[i < eta ? i : rng.below(eta)].push_back(order[i]);
        auto part = std::make_shared<const Partition>(k, std::move(groups));
        if (!need_composite || part->num_composite() > 0) return part;
    }
}

Case random_case(Rng& rng, double alpha_lo, bool need_composite = false) {
    auto part = random_partition(rng, 5, 3, need_composite);
    std::vector<double> alpha(part->num_classes());
    for (double& a : alpha) a = uniform_in(rng, alpha_lo, 5.0);
    std::vector<double> c(part->num_groups(), 0.0);
    for (GroupIndex j : part->composite_groups()) c[j] = uniform_in(rng, 0.05, 5.0);
    return {part, GddParams(part, std::move(alpha), std::move(c))};
}

LabelVector random_label(Rng& rng, const Partition& part, bool composite) {
    if (composite && part.num_composite() > 0)
        return LabelVector::group_indicator(part, part.composite_groups()[rng.below(part.num_composite())]);
    return LabelVector::singleton(part.num_classes(), rng.below(part.num_classes()));
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

// Worst value of err(x) over a log-spaced grid of n points in [lo, hi].
template <class F>
std::pair<double, double> worst_on_grid(double lo, double hi, std::size_t n, F err) {
    double worst = 0.0, at = lo;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
        const double e = err(x);
        if (!(e <= worst)) {
            worst = e;
            at = x;
            if (std::isnan(e)) break;
        }
    }
    return {worst, at};
}

CheckResult bound(std::string name, double measured, double tol, std::string detail = {}) {
    return {std::move(name), measured, tol, measured <= tol, std::move(detail)};
}

void special_checks(const SpecialFns& f, std::vector<CheckResult>& out) {
    constexpr double kRec = 1e-12;
    auto [lg, lg_at] = worst_on_grid(1e-3, 1e5, 400, [&](double x) {
        const double lhs = f.log_gamma(x + 1.0);
        return std::abs(lhs - f.log_gamma(x) - std::log(x)) / std::max(1.0, std::abs(lhs));
    });
    out.push_back(bound("log_gamma recurrence", lg, kRec, fmt("worst at x=%.4g", lg_at)));

    auto [dg, dg_at] = worst_on_grid(1e-3, 1e5, 400, [&](double x) {
        return std::abs(f.digamma(x + 1.0) - f.digamma(x) - 1.0 / x) / std::max(1.0, 1.0 / x);
    });
    out.push_back(bound("digamma recurrence", dg, kRec, fmt("worst at x=%.4g", dg_at)));

    auto [tg, tg_at] = worst_on_grid(1e-3, 1e5, 400, [&](double x) {
        return std::abs(f.trigamma(x) - f.trigamma(x + 1.0) - 1.0 / (x * x)) / std::max(1.0, 1.0 / (x * x));
    });
    out.push_back(bound("trigamma recurrence", tg, kRec, fmt("worst at x=%.4g", tg_at)));

    // Central differences: derivative of each function against the next one.
    auto fd_err = [](const std::function<double(double)>& g, const std::function<double(double)>& dg) {
        return worst_on_grid(0.1, 1e4, 200, [&](double x) {
            const double h = 1e-5 * std::max(1.0, x);
            const double fd = (g(x + h) - g(x - h)) / (2.0 * h);
            return std::abs(fd - dg(x)) / std::max(1.0, std::abs(dg(x)));
        });
    };
    auto [fd1, fd1_at] = fd_err(f.log_gamma, f.digamma);
    out.push_back(bound("digamma = d/dx log_gamma", fd1, 1e-6, fmt("worst at x=%.4g", fd1_at)));
    auto [fd2, fd2_at] = fd_err(f.digamma, f.trigamma);
    out.push_back(bound("trigamma = d/dx digamma", fd2, 1e-6, fmt("worst at x=%.4g", fd2_at)));

    constexpr double kEuler = 0.57721566490153286061;
    const double pi = std::numbers::pi;
    double known = 0.0;
    known = std::max(known, std::abs(f.log_gamma(1.0)));
    known = std::max(known, std::abs(f.log_gamma(0.5) - 0.5 * std::log(pi)));
    known = std::max(known, std::abs(f.log_gamma(10.0) - std::log(362880.0)));
    known = std::max(known, std::abs(f.digamma(1.0) + kEuler));
    known = std::max(known, std::abs(f.digamma(0.5) + kEuler + 2.0 * std::log(2.0)));
    known = std::max(known, std::abs(f.trigamma(1.0) - pi * pi / 6.0));
    known = std::max(known, std::abs(f.trigamma(0.5) - pi * pi / 2.0));
    out.push_back(bound("special values", known, 1e-12,
                        "lnG(1), lnG(1/2), lnG(10), psi(1), psi(1/2), psi1(1), psi1(1/2)"));

    std::size_t bad = 0;
    double prev = INFINITY;
    for (std::size_t i = 0; i < 400; ++i) {
        const double x = 1e-3 * std::pow(1e8, static_cast<double>(i) / 399.0);
        const double t = f.trigamma(x);
        if (!(t > 0.0) || !(t < prev)) ++bad;
        prev = t;
    }
    out.push_back(bound("trigamma positive and decreasing", static_cast<double>(bad), 0.0, "violations on grid"));
}

void golden_checks(std::vector<CheckResult>& out) {
    const FocalFamily family(3, {{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}});
    struct Row {
        std::vector<double> evidence;
        double u, vag, diss;
    };
    const Row rows[] = {{{3, 0, 0, 0, 0, 24}, 0.1, 0.8, 0.2}, {{3, 12, 12, 0, 0, 0}, 0.1, 0.0, 0.744}};
    double worst = 0.0;
    for (const Row& r : rows) {
        const auto op = opinion_from_evidence(r.evidence, family);
        worst = std::max({worst, std::abs(vacuity(op) - r.u), std::abs(vagueness(op, family) - r.vag),
                          std::abs(dissonance(op, family) - r.diss)});
    }
    out.push_back(bound("golden opinions (vacuity, vagueness, dissonance)", worst, 1e-6));
}

void quadrature_checks(std::uint64_t seed, std::vector<CheckResult>& out) {
    std::vector<GddParams> cases;
    auto two = std::make_shared<const Partition>(2, std::vector<std::vector<ClassIndex>>{{0}, {1}});
    auto three = std::make_shared<const Partition>(3, std::vector<std::vector<ClassIndex>>{{0}, {1, 2}});
    cases.push_back(GddParams::flat(two));
    cases.push_back(GddParams(two, {2.0, 1.0}, {0.0, 0.0}));
    cases.push_back(GddParams(three, {4.0, 1.0, 1.0}, {0.0, 24.0}));
    // Random interior cases with alpha >= 1 so the density stays bounded.
    Rng rng(seed, 0x9ad);
    for (int i = 0; i < 4; ++i) {
        auto part = std::make_shared<const Partition>(
            3, i % 2 ? std::vector<std::vector<ClassIndex>>{{0, 1}, {2}}
                     : std::vector<std::vector<ClassIndex>>{{0}, {1}, {2}});
        std::vector<double> alpha(3), c(part->num_groups(), 0.0);
        for (double& a : alpha) a = uniform_in(rng, 1.0, 5.0);
        for (GroupIndex j : part->composite_groups()) c[j] = uniform_in(rng, 0.0, 5.0);
        cases.emplace_back(part, alpha, c);
    }
    double worst = 0.0;
    for (const auto& p : cases) worst = std::max(worst, std::abs(simplex_quadrature(p) - 1.0));
    out.push_back(bound("normalizer quadrature (K <= 3)", worst, 1e-2,
                        std::to_string(cases.size()) + " parameter sets"));
}

void mc_checks(const VerifyOptions& opt, std::vector<CheckResult>& out) {
    Rng rng(opt.seed, 0x3c);
    struct Family {
        const char* name;
        double worst = 0.0;
        std::size_t count = 0;
    };
    Family fam[] = {{"MC mean"}, {"MC E[log p_k]"}, {"MC E[log group mass]"},
                    {"MC entropy"}, {"MC KL to flat"}, {"MC UPCE"}};
    auto note = [&](int f, const McEstimate& est, double analytic) {
        fam[f].worst = std::max(fam[f].worst, est.z_score(analytic));
        ++fam[f].count;
    };
    for (std::size_t i = 0; i < opt.mc_cases; ++i) {
        const Case cs = random_case(rng, 0.6);
        const auto& part = *cs.partition;
        std::vector<Statistic> stats;
        for (ClassIndex k = 0; k < part.num_classes(); ++k) stats.push_back(Statistic::mean_k(k));
        for (ClassIndex k = 0; k < part.num_classes(); ++k) stats.push_back(Statistic::log_p_k(k));
        for (GroupIndex j = 0; j < part.num_groups(); ++j) stats.push_back(Statistic::log_group_j(j));
        stats.push_back(Statistic::neg_log_pdf());
        stats.push_back(Statistic::log_ratio_to_flat());
        const LabelVector ys = random_label(rng, part, false);
        stats.push_back(Statistic::pce(ys));
        std::optional<LabelVector> yc;
        if (part.num_composite() > 0) {
            yc = random_label(rng, part, true);
            stats.push_back(Statistic::pce(*yc));
        }
        const auto est = mc_expectations(cs.params, stats, opt.mc_samples, opt.seed + 1000 + i);
        const auto m = mean(cs.params);
        std::size_t s = 0;
        for (ClassIndex k = 0; k < part.num_classes(); ++k) note(0, est[s++], m[k]);
        for (ClassIndex k = 0; k < part.num_classes(); ++k) note(1, est[s++], expected_log_singleton(cs.params, k));
        for (GroupIndex j = 0; j < part.num_groups(); ++j) note(2, est[s++], expected_log_group(cs.params, j));
        note(3, est[s++], entropy(cs.params));
        note(4, est[s++], kl_to_flat(cs.params));
        note(5, est[s++], upce(cs.params, ys));
        if (yc) note(5, est[s++], upce(cs.params, *yc));
    }
    for (const auto& f : fam)
        out.push_back(bound(f.name, f.worst, 3.0,
                            "worst |z| over " + std::to_string(f.count) + " comparisons, n=" +
                                std::to_string(opt.mc_samples)));
}

// Free coordinates of a GDD: all alpha, then c of composite groups.
std::vector<double> free_coords(const GddParams& p) {
    std::vector<double> v = p.alpha();
    for (GroupIndex j : p.partition().composite_groups()) v.push_back(p.c()[j]);
    return v;
}

GddParams from_coords(const GddParams& like, std::span<const double> v) {
    const auto& part = like.partition();
    std::vector<double> alpha(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(part.num_classes()));
    std::vector<double> c(part.num_groups(), 0.0);
    for (std::size_t i = 0; i < part.num_composite(); ++i) c[part.composite_groups()[i]] = v[part.num_classes() + i];
    return GddParams(like.shared_partition(), std::move(alpha), std::move(c));
}

void gradient_checks(std::uint64_t seed, std::vector<CheckResult>& out) {
    Rng rng(seed, 0x6d);
    const RegMode modes[] = {RegMode::Kl, RegMode::Entropy, RegMode::DirichletKl, RegMode::None};
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Case cs = random_case(rng, 0.6);
        const LabelVector y = random_label(rng, *cs.partition, rng.uniform() < 0.5);
        const double lambda = rng.uniform();
        const RegMode mode = modes[i % 4];
        const auto g = grad_total(cs.params, y, lambda, mode);
        std::vector<double> analytic = g.d_alpha;
        for (GroupIndex j : cs.partition->composite_groups()) analytic.push_back(g.d_c[j]);
        const auto fd = finite_diff(
            [&](std::span<const double> v) { return total_loss(from_coords(cs.params, v), y, lambda, mode).total; },
            free_coords(cs.params));
        worst = std::max(worst, relative_error(analytic, fd));
    }
    out.push_back(bound("loss gradient vs finite differences", worst, 1e-5, "100 cases, all regularizer modes"));

    double net_worst = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        Rng r(seed + s, 0x7e);
        const Case cs = random_case(r, 0.6);
        const auto& part = cs.partition;
        const Activation act = s % 2 ? Activation::Relu : Activation::Tanh;
        const MlpParams net = init_mlp(3, {8, 8}, part->evidence_width(), act, seed + s);
        std::vector<double> x(3);
        for (double& v : x) v = r.normal();
        const LabelVector y = random_label(r, *part, r.uniform() < 0.5);
        const auto res = backward(net, x, y, part, 0.1, RegMode::Kl);
        MlpParams probe = net;
        const auto fd = finite_diff(
            [&](std::span<const double> w) {
                unflatten(w, probe);
                return example_loss(probe, x, y, part, 0.1, RegMode::Kl).total;
            },
            flatten(net));
        net_worst = std::max(net_worst, relative_error(flatten(res.grad), fd));
    }
    out.push_back(bound("network gradient vs finite differences", net_worst, 1e-4, "20 seeds"));
}

void bound_checks(std::uint64_t seed, std::vector<CheckResult>& out) {
    Rng rng(seed, 0xa2);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const Case cs = random_case(rng, 0.2);
        const LabelVector y = random_label(rng, *cs.partition, rng.uniform() < 0.5);
        const double gap = upce(cs.params, y) - pce(mean(cs.params), y).value;
        worst = std::max(worst, -gap);
    }
    out.push_back(bound("UPCE >= PCE(mean)", worst, 1e-10, "largest violation over 200 cases"));
}

void sign_checks(std::uint64_t seed, std::vector<CheckResult>& out) {
    Rng rng(seed, 0x51);
    std::size_t bad[6] = {};
    for (int i = 0; i < 100; ++i) {
        const Case cs = random_case(rng, 0.2, true);
        const auto& part = *cs.partition;
        const GroupIndex jc = part.composite_groups()[rng.below(part.num_composite())];
        const auto& members = part.group(jc);
        const ClassIndex ks = members[rng.below(members.size())];

        // Singleton label inside a composite group.
        const auto gs = grad_upce(cs.params, LabelVector::singleton(part.num_classes(), ks));
        if (!(gs.d_alpha[ks] < 0.0)) ++bad[0];
        if (!(gs.d_c[jc] < 0.0)) ++bad[1];
        bool other_ok = true;
        for (ClassIndex k = 0; k < part.num_classes(); ++k)
            if (k != ks) other_ok = other_ok && gs.d_alpha[k] > 0.0;
        for (GroupIndex j : part.composite_groups())
            if (j != jc) other_ok = other_ok && gs.d_c[j] > 0.0;
        if (!other_ok) ++bad[2];

        // Composite label.
        const auto gc = grad_upce(cs.params, LabelVector::group_indicator(part, jc));
        if (!(gc.d_c[jc] < 0.0)) ++bad[3];
        bool member_ok = true, rest_ok = true;
        for (ClassIndex k = 0; k < part.num_classes(); ++k) {
            if (part.containing_group(k) == jc)
                member_ok = member_ok && gc.d_alpha[k] < 0.0;
            else
                rest_ok = rest_ok && gc.d_alpha[k] > 0.0;
        }
        for (GroupIndex j : part.composite_groups())
            if (j != jc) rest_ok = rest_ok && gc.d_c[j] > 0.0;
        if (!member_ok) ++bad[4];
        if (!rest_ok) ++bad[5];
    }
    const char* names[] = {
        "sign: singleton label, own alpha < 0",        "sign: singleton label, containing c < 0",
        "sign: singleton label, other params > 0",     "sign: composite label, own c < 0",
        "sign: composite label, member alphas < 0",    "sign: composite label, other params > 0",
    };
    for (int f = 0; f < 6; ++f) out.push_back(bound(names[f], static_cast<double>(bad[f]), 0.0, "violations in 100 draws"));
}

void dirichlet_checks(std::uint64_t seed, std::vector<CheckResult>& out) {
    Rng rng(seed, 0xd1);
    double worst = 0.0, upce_worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const Case cs0 = random_case(rng, 0.2);
        const GddParams p(cs0.partition, cs0.params.alpha(), std::vector<double>(cs0.partition->num_groups(), 0.0));
        const auto& a = p.alpha();
        const std::size_t k = a.size();
        std::vector<double> x(k);
        double s = 0.0;
        for (double& v : x) s += v = uniform_in(rng, 0.05, 1.0);
        for (double& v : x) v /= s;
        double e = std::abs(log_pdf(p, x) - dirichlet::log_pdf(a, x));
        const auto m = mean(p), dm = dirichlet::mean(a);
        for (std::size_t c = 0; c < k; ++c) {
            e = std::max(e, std::abs(m[c] - dm[c]));
            e = std::max(e, std::abs(expected_log_singleton(p, c) - dirichlet::expected_log(a, c)));
        }
        e = std::max(e, std::abs(entropy(p) - dirichlet::entropy(a)));
        e = std::max(e, std::abs(kl_to_flat(p) - dirichlet::kl_to_uniform(a)));
        worst = std::max(worst, e);

        const ClassIndex y = rng.below(k);
        double a0 = 0.0;
        for (double v : a) a0 += v;
        const double uce = special::digamma(a0) - special::digamma(a[y]);
        upce_worst = std::max(upce_worst, std::abs(upce(p, LabelVector::singleton(k, y)) - uce));
    }
    out.push_back(bound("c = 0 reduces to Dirichlet", worst, 1e-10, "pdf, mean, E[log p], entropy, KL"));
    out.push_back(bound("c = 0 singleton UPCE equals UCE", upce_worst, 1e-12));
}

}  // namespace

std::vector<CheckResult> run_verify_suite(const VerifyOptions& options) {
    std::vector<CheckResult> out;
    auto guarded = [&](const char* name, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            out.push_back({name, INFINITY, 0.0, false, std::string("threw: ") + e.what()});
        }
    };
    guarded("special functions", [&] { special_checks(options.fns, out); });
    guarded("golden opinions", [&] { golden_checks(out); });
    guarded("quadrature", [&] { quadrature_checks(options.seed, out); });
    guarded("monte carlo", [&] { mc_checks(options, out); });
    guarded("gradients", [&] { gradient_checks(options.seed, out); });
    guarded("upce bound", [&] { bound_checks(options.seed, out); });
    guarded("signs", [&] { sign_checks(options.seed, out); });
    guarded("dirichlet", [&] { dirichlet_checks(options.seed, out); });
    return out;
}

std::string format_checks(std::span<const CheckResult> checks) {
    std::ostringstream os;
    std::size_t width = 5;
    for (const auto& c : checks) width = std::max(width, c.name.size());
    std::size_t failed = 0;
    for (const auto& c : checks) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "  %-4s  measured=%-12.4g tol=%-10.3g", c.passed ? "PASS" : "FAIL", c.measured,
                      c.tolerance);
        os << c.name << std::string(width - c.name.size(), ' ') << buf;
        if (!c.detail.empty()) os << "  " << c.detail;
        os << '\n';
        if (!c.passed) ++failed;
    }
    os << checks.size() - failed << '/' << checks.size() << " checks passed\n";
    return os.str();
}

}  // namespace henn::oracle
