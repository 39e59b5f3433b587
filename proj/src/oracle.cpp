#include "henn/oracle.hpp"

#include <charconv>
#include <cmath>

#include "henn/error.hpp"
#include "henn/loss.hpp"
#include "henn/special_fn.hpp"

namespace henn::oracle {

double McEstimate::z_score(double value) const {
    if (std_error == 0.0) return value == mean ? 0.0 : INFINITY;
    return std::abs(value - mean) / std_error;
}

namespace {

std::optional<std::size_t> parse_suffix(std::string_view tag, std::string_view prefix) {
    if (tag.substr(0, prefix.size()) != prefix) return std::nullopt;
    const auto rest = tag.substr(prefix.size());
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), v);
    if (ec != std::errc() || ptr != rest.data() + rest.size() || rest.empty()) return std::nullopt;
    return v;
}

}  // namespace

Statistic Statistic::parse(std::string_view tag, std::optional<LabelVector> label) {
    if (tag == "neg_log_pdf") return neg_log_pdf();
    if (tag == "log_ratio_to_flat") return log_ratio_to_flat();
    if (tag == "pce") {
        if (!label) throw DomainError("statistic 'pce' requires a label");
        return pce(std::move(*label));
    }
    if (auto k = parse_suffix(tag, "log_p_")) return log_p_k(*k);
    if (auto j = parse_suffix(tag, "log_group_")) return log_group_j(*j);
    if (auto k = parse_suffix(tag, "mean_")) return mean_k(*k);
    throw DomainError("unknown statistic tag '" + std::string(tag) + "'");
}

namespace {

constexpr std::size_t kChunk = 10'000;

// Running mean / sum of squared deviations (Welford), mergeable (Chan et al.).
struct Moments {
    double n = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        n += 1.0;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    void merge(const Moments& o) {
        if (o.n == 0.0) return;
        const double total = n + o.n;
        const double d = o.mean - mean;
        mean += d * o.n / total;
        m2 += o.m2 + d * d * n * o.n / total;
        n = total;
    }
};

void check_stat(const GddParams& params, const Statistic& s) {
    const auto& part = params.partition();
    switch (s.kind) {
        case Statistic::Kind::MeanK:
        case Statistic::Kind::LogPK:
            if (s.index >= part.num_classes()) throw DomainError("statistic class index out of range");
            break;
        case Statistic::Kind::LogGroupJ:
            if (s.index >= part.num_groups()) throw DomainError("statistic group index out of range");
            break;
        case Statistic::Kind::Pce:
            label_kind(s.label, part);
            break;
        default: break;
    }
}

double evaluate(const GddParams& params, const Statistic& s, std::span<const double> x, double log_flat) {
    switch (s.kind) {
        case Statistic::Kind::MeanK: return x[s.index];
        case Statistic::Kind::LogPK: return std::log(x[s.index]);
        case Statistic::Kind::LogGroupJ: {
            double sum = 0.0;
            for (ClassIndex l : params.partition().group(s.index)) sum += x[l];
            return std::log(sum);
        }
        case Statistic::Kind::Pce: return henn::pce(x, s.label).value;
        case Statistic::Kind::NegLogPdf: return -henn::log_pdf(params, x);
        case Statistic::Kind::LogRatioToFlat: return henn::log_pdf(params, x) - log_flat;
    }
    return 0.0;
}

}  // namespace

std::vector<McEstimate> mc_expectations(const GddParams& params, std::span<const Statistic> stats, std::size_t n,
                                        std::uint64_t seed) {
    if (n < 1000) throw DomainError("mc_expectation: need at least 1000 samples");
    for (const auto& s : stats) check_stat(params, s);
    const double log_flat = special::log_gamma(static_cast<double>(params.partition().num_classes()));

    std::vector<Moments> total(stats.size());
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    for (std::size_t ci = 0; ci < chunks; ++ci) {
        const std::size_t count = std::min(kChunk, n - ci * kChunk);
        Rng rng(seed, ci);
        std::vector<Moments> local(stats.size());
        for (std::size_t i = 0; i < count; ++i) {
            auto x = sample(params, rng);
            // Gamma draws with small shape can underflow a coordinate to 0; such
            // points are outside the open simplex and are redrawn.
            bool interior = true;
            for (double v : x) interior = interior && v > 0.0;
            if (!interior) {
                --i;
                continue;
            }
            for (std::size_t s = 0; s < stats.size(); ++s) local[s].add(evaluate(params, stats[s], x, log_flat));
        }
        for (std::size_t s = 0; s < stats.size(); ++s) total[s].merge(local[s]);
    }
    std::vector<McEstimate> out;
    out.reserve(stats.size());
    for (const auto& m : total) {
        const double var = m.m2 / (m.n - 1.0);
        out.push_back({m.mean, std::sqrt(var / m.n), static_cast<std::size_t>(m.n)});
    }
    return out;
}

McEstimate mc_expectation(const GddParams& params, const Statistic& stat, std::size_t n, std::uint64_t seed) {
    return mc_expectations(params, std::span<const Statistic>(&stat, 1), n, seed).front();
}

std::vector<double> finite_diff(const std::function<double(std::span<const double>)>& f, std::span<const double> at) {
    std::vector<double> x(at.begin(), at.end());
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = 1e-5 * std::max(1.0, std::abs(at[i]));
        x[i] = at[i] + h;
        const double fp = f(x);
        x[i] = at[i] - h;
        const double fm = f(x);
        x[i] = at[i];
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw DomainError("finite_diff: function is not finite around coordinate " + std::to_string(i));
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

double relative_error(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DomainError("relative_error: length mismatch");
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    const double scale = std::max({std::sqrt(na), std::sqrt(nb), 1e-300});
    return std::sqrt(diff) / scale;
}

double simplex_quadrature(const GddParams& params, std::size_t resolution) {
    const std::size_t k = params.partition().num_classes();
    if (k == 2) {
        const std::size_t n = resolution ? resolution : 200'000;
        const double h = 1.0 / static_cast<double>(n);
        double acc = 0.0;
        double x[2];
        for (std::size_t i = 0; i < n; ++i) {
            x[0] = (static_cast<double>(i) + 0.5) * h;
            x[1] = 1.0 - x[0];
            acc += std::exp(henn::log_pdf(params, x));
        }
        return acc * h;
    }
    if (k == 3) {
        // x1 = u, x2 = (1-u) v, x3 = (1-u)(1-v); Jacobian (1-u).
        const std::size_t n = resolution ? resolution : 1000;
        const double h = 1.0 / static_cast<double>(n);
        double acc = 0.0;
        double x[3];
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (static_cast<double>(i) + 0.5) * h;
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double v = (static_cast<double>(j) + 0.5) * h;
                x[0] = u;
                x[1] = (1.0 - u) * v;
                x[2] = (1.0 - u) * (1.0 - v);
                row += std::exp(henn::log_pdf(params, x));
            }
            acc += row * (1.0 - u);
        }
        return acc * h * h;
    }
    throw UnsupportedError("simplex_quadrature: only K = 2 or K = 3 is supported");
}

namespace dirichlet {

using special::digamma;
using special::log_gamma;

namespace {
double sum_of(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v;
    return s;
}
}  // namespace

double log_pdf(std::span<const double> alpha, std::span<const double> x) {
    double lp = log_gamma(sum_of(alpha));
    for (std::size_t k = 0; k < alpha.size(); ++k) lp += (alpha[k] - 1.0) * std::log(x[k]) - log_gamma(alpha[k]);
    return lp;
}

std::vector<double> mean(std::span<const double> alpha) {
    const double s = sum_of(alpha);
    std::vector<double> m;
    for (double a : alpha) m.push_back(a / s);
    return m;
}

double expected_log(std::span<const double> alpha, std::size_t k) { return digamma(alpha[k]) - digamma(sum_of(alpha)); }

double entropy(std::span<const double> alpha) {
    const double a0 = sum_of(alpha);
    const double kk = static_cast<double>(alpha.size());
    double log_b = -log_gamma(a0);
    double acc = (a0 - kk) * digamma(a0);
    for (double a : alpha) {
        log_b += log_gamma(a);
        acc -= (a - 1.0) * digamma(a);
    }
    return log_b + acc;
}

double kl_to_uniform(std::span<const double> alpha) {
    const double a0 = sum_of(alpha);
    const double kk = static_cast<double>(alpha.size());
    double kl = log_gamma(a0) - log_gamma(kk);
    for (double a : alpha) kl += -log_gamma(a) + (a - 1.0) * (digamma(a) - digamma(a0));
    return kl;
}

std::vector<double> sample(std::span<const double> alpha, Rng& rng) {
    std::vector<double> x;
    double s = 0.0;
    for (double a : alpha) {
        x.push_back(rng.gamma(a));
        s += x.back();
    }
    for (double& v : x) v /= s;
    return x;
}

}  // namespace dirichlet

SpecialFns SpecialFns::library() {
    return {[](double x) { return special::log_gamma(x); }, [](double x) { return special::digamma(x); },
            [](double x) { return special::trigamma(x); }};
}

}  // namespace henn::oracle
