#include "henn/gdd.hpp"

#include <cmath>
#include <string>

#include "henn/error.hpp"
#include "henn/special_fn.hpp"

namespace henn {

using special::digamma;
using special::log_beta_multi;
using special::log_gamma;
using special::trigamma;

GddParams::GddParams(std::shared_ptr<const Partition> partition, std::vector<double> alpha, std::vector<double> c)
    : partition_(std::move(partition)), alpha_(std::move(alpha)), c_(std::move(c)) {
    if (!partition_) throw DomainError("GddParams: null partition");
    const auto& part = *partition_;
    if (alpha_.size() != part.num_classes())
        throw DomainError("GddParams: alpha has length " + std::to_string(alpha_.size()) + ", expected K=" +
                          std::to_string(part.num_classes()));
    if (c_.size() != part.num_groups())
        throw DomainError("GddParams: c has length " + std::to_string(c_.size()) + ", expected eta=" +
                          std::to_string(part.num_groups()));
    for (std::size_t k = 0; k < alpha_.size(); ++k)
        if (!(alpha_[k] > 0.0) || !std::isfinite(alpha_[k]))
            throw DomainError("GddParams: alpha[" + std::to_string(k) + "] must be finite and > 0");
    for (std::size_t j = 0; j < c_.size(); ++j) {
        if (!(c_[j] >= 0.0) || !std::isfinite(c_[j]))
            throw DomainError("GddParams: c[" + std::to_string(j) + "] must be finite and >= 0");
        if (!part.is_composite(j) && c_[j] != 0.0)
            throw DomainError("GddParams: c[" + std::to_string(j) + "] must be 0 for a singleton-size group");
    }
    group_alpha_.assign(part.num_groups(), 0.0);
    beta_.assign(part.num_groups(), 0.0);
    for (GroupIndex j = 0; j < part.num_groups(); ++j) {
        for (ClassIndex l : part.group(j)) group_alpha_[j] += alpha_[l];
        beta_[j] = group_alpha_[j] + c_[j];
        beta0_ += beta_[j];
    }
}

GddParams GddParams::flat(std::shared_ptr<const Partition> partition) {
    const std::size_t k = partition->num_classes();
    const std::size_t eta = partition->num_groups();
    return GddParams(std::move(partition), std::vector<double>(k, 1.0), std::vector<double>(eta, 0.0));
}

GddParams params_from_evidence(std::span<const double> evidence, std::shared_ptr<const Partition> partition) {
    const auto& part = *partition;
    if (evidence.size() != part.evidence_width())
        throw DomainError("params_from_evidence: evidence width must be K + m = " +
                          std::to_string(part.evidence_width()));
    for (double e : evidence)
        if (!(e >= 0.0) || !std::isfinite(e))
            throw DomainError("params_from_evidence: evidence must be finite and non-negative");
    const std::size_t k = part.num_classes();
    std::vector<double> alpha(k);
    for (std::size_t i = 0; i < k; ++i) alpha[i] = evidence[i] + 1.0;
    std::vector<double> c(part.num_groups(), 0.0);
    const auto& comp = part.composite_groups();
    for (std::size_t i = 0; i < comp.size(); ++i) c[comp[i]] = evidence[k + i];
    return GddParams(std::move(partition), std::move(alpha), std::move(c));
}

double log_normalizer(const GddParams& p) {
    const auto& part = p.partition();
    double acc = 0.0;
    std::vector<double> buf;
    for (GroupIndex j = 0; j < part.num_groups(); ++j) {
        buf.clear();
        for (ClassIndex l : part.group(j)) buf.push_back(p.alpha()[l]);
        acc += log_beta_multi(buf);
    }
    buf.clear();
    for (GroupIndex j = 0; j < part.num_groups(); ++j) buf.push_back(p.beta(j));
    return acc + log_beta_multi(buf);
}

double log_pdf(const GddParams& p, std::span<const double> x) {
    const auto& part = p.partition();
    if (x.size() != part.num_classes()) throw DomainError("log_pdf: point has wrong dimension");
    double sum = 0.0;
    for (double v : x) {
        if (!(v > 0.0)) throw DomainError("log_pdf: point must have strictly positive coordinates");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DomainError("log_pdf: point is not on the simplex");
    double lp = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) lp += (p.alpha()[k] - 1.0) * std::log(x[k]);
    for (GroupIndex j = 0; j < part.num_groups(); ++j) {
        if (p.c()[j] == 0.0) continue;
        double s = 0.0;
        for (ClassIndex l : part.group(j)) s += x[l];
        lp += p.c()[j] * std::log(s);
    }
    return lp - log_normalizer(p);
}

std::vector<double> mean(const GddParams& p) {
    const auto& part = p.partition();
    std::vector<double> m(part.num_classes());
    for (ClassIndex k = 0; k < m.size(); ++k) {
        const GroupIndex j = part.containing_group(k);
        m[k] = (p.alpha()[k] / p.beta0()) * (p.beta(j) / p.group_alpha(j));
    }
    return m;
}

double expected_log_singleton(const GddParams& p, ClassIndex k) {
    const GroupIndex j = p.partition().containing_group(k);
    return digamma(p.alpha()[k]) - digamma(p.beta0()) + digamma(p.beta(j)) - digamma(p.group_alpha(j));
}

double expected_log_group(const GddParams& p, GroupIndex j) {
    if (j >= p.partition().num_groups()) throw DomainError("expected_log_group: group out of range");
    return digamma(p.beta(j)) - digamma(p.beta0());
}

namespace {

// sum_k (alpha_k - 1) E[ln p_k] + sum_j c_j E[ln sum p_l]
double natural_dot_stats(const GddParams& p) {
    const auto& part = p.partition();
    double acc = 0.0;
    for (ClassIndex k = 0; k < part.num_classes(); ++k) {
        const double a = p.alpha()[k] - 1.0;
        if (a != 0.0) acc += a * expected_log_singleton(p, k);
    }
    for (GroupIndex j = 0; j < part.num_groups(); ++j)
        if (p.c()[j] != 0.0) acc += p.c()[j] * expected_log_group(p, j);
    return acc;
}

}  // namespace

double entropy(const GddParams& p) { return log_normalizer(p) - natural_dot_stats(p); }

double kl_to_flat(const GddParams& p) {
    const double log_z_flat = -log_gamma(static_cast<double>(p.partition().num_classes()));
    return log_z_flat - log_normalizer(p) + natural_dot_stats(p);
}

ParamGrad kl_to_flat_grad(const GddParams& p) {
    const auto& part = p.partition();
    const std::size_t eta = part.num_groups();
    // Natural-parameter mass per group: s_j = sum (alpha_l - 1), t_j = s_j + c_j.
    std::vector<double> s(eta, 0.0), t(eta, 0.0);
    double total = 0.0;
    for (GroupIndex j = 0; j < eta; ++j) {
        for (ClassIndex l : part.group(j)) s[j] += p.alpha()[l] - 1.0;
        t[j] = s[j] + p.c()[j];
        total += t[j];
    }
    const double tri0 = trigamma(p.beta0()) * total;
    std::vector<double> tri_group_alpha(eta), tri_beta(eta);
    for (GroupIndex j = 0; j < eta; ++j) {
        tri_group_alpha[j] = trigamma(p.group_alpha(j)) * s[j];
        tri_beta[j] = trigamma(p.beta(j)) * t[j];
    }
    ParamGrad g{std::vector<double>(part.num_classes()), std::vector<double>(eta)};
    for (ClassIndex k = 0; k < part.num_classes(); ++k) {
        const GroupIndex j = part.containing_group(k);
        g.d_alpha[k] = trigamma(p.alpha()[k]) * (p.alpha()[k] - 1.0) - tri_group_alpha[j] + tri_beta[j] - tri0;
    }
    for (GroupIndex j = 0; j < eta; ++j) g.d_c[j] = tri_beta[j] - tri0;
    return g;
}

namespace {

void dirichlet_draw(std::span<const double> conc, Rng& rng, std::span<double> out) {
    double sum = 0.0;
    for (std::size_t i = 0; i < conc.size(); ++i) {
        out[i] = rng.gamma(conc[i]);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
}

}  // namespace

std::vector<double> sample(const GddParams& p, Rng& rng) {
    const auto& part = p.partition();
    const std::size_t eta = part.num_groups();
    std::vector<double> weights(eta);
    std::vector<double> betas(eta);
    for (GroupIndex j = 0; j < eta; ++j) betas[j] = p.beta(j);
    dirichlet_draw(betas, rng, weights);

    std::vector<double> x(part.num_classes());
    std::vector<double> conc, within;
    for (GroupIndex j = 0; j < eta; ++j) {
        const auto& members = part.group(j);
        if (members.size() == 1) {
            x[members[0]] = weights[j];
            continue;
        }
        conc.clear();
        for (ClassIndex l : members) conc.push_back(p.alpha()[l]);
        within.assign(members.size(), 0.0);
        dirichlet_draw(conc, rng, within);
        for (std::size_t i = 0; i < members.size(); ++i) x[members[i]] = weights[j] * within[i];
    }
    return x;
}

ClassIndex projected_prediction(const GddParams& p) {
    const auto m = mean(p);
    ClassIndex best = 0;
    for (ClassIndex k = 1; k < m.size(); ++k)
        if (m[k] > m[best]) best = k;
    return best;
}

}  // namespace henn
