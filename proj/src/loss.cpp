#include "henn/loss.hpp"

#include <cmath>

#include "henn/error.hpp"
#include "henn/special_fn.hpp"

namespace henn {

using special::digamma;
using special::log_gamma;
using special::trigamma;

std::string_view to_string(RegMode mode) {
    switch (mode) {
        case RegMode::Kl: return "kl";
        case RegMode::Entropy: return "entropy";
        case RegMode::DirichletKl: return "dirichlet-kl";
        case RegMode::None: return "none";
    }
    return "kl";
}

std::optional<RegMode> parse_reg_mode(std::string_view name) {
    if (name == "kl") return RegMode::Kl;
    if (name == "entropy") return RegMode::Entropy;
    if (name == "dirichlet-kl") return RegMode::DirichletKl;
    if (name == "none") return RegMode::None;
    return std::nullopt;
}

PceResult pce(std::span<const double> p, const LabelVector& y) {
    if (p.size() != y.size()) throw DomainError("pce: probability and label lengths differ");
    double inner = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k)
        if (y.bits[k]) inner += p[k];
    if (inner < kPceFloor) return {-std::log(kPceFloor), true};
    return {-std::log(inner), false};
}

double upce(const GddParams& params, const LabelVector& y) {
    const auto& part = params.partition();
    const LabelKind kind = label_kind(y, part);
    if (kind.is_composite()) return digamma(params.beta0()) - digamma(params.beta(kind.index));
    const ClassIndex k = kind.index;
    const GroupIndex j = part.containing_group(k);
    return (digamma(params.beta0()) - digamma(params.alpha()[k])) -
           (digamma(params.beta(j)) - digamma(params.group_alpha(j)));
}

GddParams masked_params(const GddParams& params, const LabelVector& y) {
    const LabelKind kind = label_kind(y, params.partition());
    auto alpha = params.alpha();
    auto c = params.c();
    if (kind.is_singleton())
        alpha[kind.index] = 1.0;
    else
        c[kind.index] = 0.0;
    return GddParams(params.shared_partition(), std::move(alpha), std::move(c));
}

namespace {

GddParams drop_composite(const GddParams& params) {
    return GddParams(params.shared_partition(), params.alpha(),
                     std::vector<double>(params.partition().num_groups(), 0.0));
}

}  // namespace

double reg(const GddParams& params, const LabelVector& y, RegMode mode) {
    switch (mode) {
        case RegMode::Kl: return kl_to_flat(masked_params(params, y));
        case RegMode::Entropy: return -entropy(params);
        case RegMode::DirichletKl: return kl_to_flat(drop_composite(masked_params(params, y)));
        case RegMode::None: label_kind(y, params.partition()); return 0.0;
    }
    return 0.0;
}

LossBreakdown total_loss(const GddParams& params, const LabelVector& y, double lambda, RegMode mode) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("total_loss: lambda must be >= 0");
    LossBreakdown out;
    out.upce = upce(params, y);
    out.reg = (mode == RegMode::None || lambda == 0.0) ? 0.0 : reg(params, y, mode);
    out.lambda = lambda;
    out.total = out.upce + lambda * out.reg;
    return out;
}

namespace {

void zero_pinned_groups(const Partition& part, std::vector<double>& d_c) {
    for (GroupIndex j = 0; j < part.num_groups(); ++j)
        if (!part.is_composite(j)) d_c[j] = 0.0;
}

}  // namespace

LossGrad grad_upce(const GddParams& params, const LabelVector& y) {
    const auto& part = params.partition();
    const LabelKind kind = label_kind(y, part);
    const double tri0 = trigamma(params.beta0());
    LossGrad g{std::vector<double>(part.num_classes(), tri0), std::vector<double>(part.num_groups(), tri0)};
    if (kind.is_composite()) {
        // psi(beta_0) - psi(beta_IC)
        const GroupIndex ic = kind.index;
        const double tri_ic = trigamma(params.beta(ic));
        for (ClassIndex l : part.group(ic)) g.d_alpha[l] -= tri_ic;
        g.d_c[ic] -= tri_ic;
    } else {
        // psi(beta_0) - psi(alpha_IS) - psi(beta_j) + psi(alpha_{S_j})
        const ClassIndex is = kind.index;
        const GroupIndex j = part.containing_group(is);
        const double tri_beta = trigamma(params.beta(j));
        const double tri_group = trigamma(params.group_alpha(j));
        for (ClassIndex l : part.group(j)) g.d_alpha[l] += tri_group - tri_beta;
        g.d_alpha[is] -= trigamma(params.alpha()[is]);
        g.d_c[j] -= tri_beta;
    }
    zero_pinned_groups(part, g.d_c);
    return g;
}

LossGrad grad_reg(const GddParams& params, const LabelVector& y, RegMode mode) {
    const auto& part = params.partition();
    LossGrad g{std::vector<double>(part.num_classes(), 0.0), std::vector<double>(part.num_groups(), 0.0)};
    if (mode == RegMode::None) {
        label_kind(y, part);
        return g;
    }
    if (mode == RegMode::Entropy) {
        // -H = KL(q || flat) + ln Gamma(K): same gradient as the unmasked KL.
        auto kg = kl_to_flat_grad(params);
        g.d_alpha = std::move(kg.d_alpha);
        g.d_c = std::move(kg.d_c);
        zero_pinned_groups(part, g.d_c);
        return g;
    }
    const LabelKind kind = label_kind(y, part);
    GddParams masked = masked_params(params, y);
    if (mode == RegMode::DirichletKl) masked = drop_composite(masked);
    auto kg = kl_to_flat_grad(masked);
    g.d_alpha = std::move(kg.d_alpha);
    g.d_c = std::move(kg.d_c);
    // Masked coordinates are constants of the regularizer.
    if (kind.is_singleton())
        g.d_alpha[kind.index] = 0.0;
    else
        g.d_c[kind.index] = 0.0;
    if (mode == RegMode::DirichletKl) std::fill(g.d_c.begin(), g.d_c.end(), 0.0);
    zero_pinned_groups(part, g.d_c);
    return g;
}

LossGrad grad_total(const GddParams& params, const LabelVector& y, double lambda, RegMode mode) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("grad_total: lambda must be >= 0");
    LossGrad g = grad_upce(params, y);
    if (mode == RegMode::None || lambda == 0.0) return g;
    const LossGrad r = grad_reg(params, y, mode);
    for (std::size_t k = 0; k < g.d_alpha.size(); ++k) g.d_alpha[k] += lambda * r.d_alpha[k];
    for (std::size_t j = 0; j < g.d_c.size(); ++j) g.d_c[j] += lambda * r.d_c[j];
    return g;
}

}  // namespace henn
