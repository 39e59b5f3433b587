#pragma once

#include <memory>
#include <span>
#include <vector>

#include "henn/hyperdomain.hpp"
#include "henn/rng.hpp"

namespace henn {

/// Grouped Dirichlet parameters (alpha, c) over a partition.
///
/// Invariants: alpha_k > 0, c_j >= 0, and c_j == 0 for every singleton-size
/// group. Derived quantities are cached at construction:
///   alpha_{S_j} = sum_{l in S_j} alpha_l
///   beta_j      = alpha_{S_j} + c_j
///   beta_0      = sum_j beta_j
class GddParams {
public:
    GddParams(std::shared_ptr<const Partition> partition, std::vector<double> alpha, std::vector<double> c);

    /// alpha = 1, c = 0: the uniform distribution on the simplex.
    static GddParams flat(std::shared_ptr<const Partition> partition);

    const Partition& partition() const { return *partition_; }
    const std::shared_ptr<const Partition>& shared_partition() const { return partition_; }
    const std::vector<double>& alpha() const { return alpha_; }
    const std::vector<double>& c() const { return c_; }

    double group_alpha(GroupIndex j) const { return group_alpha_.at(j); }
    double beta(GroupIndex j) const { return beta_.at(j); }
    double beta0() const { return beta0_; }

private:
    std::shared_ptr<const Partition> partition_;
    std::vector<double> alpha_;
    std::vector<double> c_;
    std::vector<double> group_alpha_;
    std::vector<double> beta_;
    double beta0_ = 0.0;
};

/// alpha_k = e_k + 1; c_j = evidence of composite group j, 0 for singleton
/// groups. Evidence has width K + m.
GddParams params_from_evidence(std::span<const double> evidence, std::shared_ptr<const Partition> partition);

/// ln Z = sum_j ln B({alpha_l}_{l in S_j}) + ln B({beta_j}).
double log_normalizer(const GddParams& p);

/// Log density at a strictly interior point of the simplex. DomainError if
/// |sum x - 1| > 1e-9 or any x_k <= 0.
double log_pdf(const GddParams& p, std::span<const double> x);

/// E[p_k] = (alpha_k / beta_0) * (beta_j / alpha_{S_j}) for the group j holding k.
std::vector<double> mean(const GddParams& p);

/// E[ln p_k].
double expected_log_singleton(const GddParams& p, ClassIndex k);

/// E[ln sum_{l in S_j} p_l] = psi(beta_j) - psi(beta_0).
double expected_log_group(const GddParams& p, GroupIndex j);

/// Differential entropy -E[ln pdf].
double entropy(const GddParams& p);

/// KL(GDD(alpha, c) || GDD(1, 0)).
double kl_to_flat(const GddParams& p);

struct ParamGrad {
    std::vector<double> d_alpha;
    std::vector<double> d_c;
};

/// Gradient of kl_to_flat with respect to (alpha, c). Since the KL is
/// A*(theta) - theta^T grad A(theta) evaluated against a fixed reference, its
/// gradient is Hessian(A) applied to the natural parameters (alpha - 1, c),
/// which reduces to trigamma terms. d_c is reported for every group; entries for
/// singleton-size groups are not free parameters and callers may ignore them.
ParamGrad kl_to_flat_grad(const GddParams& p);

/// Hierarchical draw: w ~ Dir(beta_1..beta_eta), q^(j) ~ Dir(alpha_{S_j}),
/// p_l = w_j q^(j)_l.
std::vector<double> sample(const GddParams& p, Rng& rng);

/// Argmax of mean(p), lowest index on ties.
ClassIndex projected_prediction(const GddParams& p);

}  // namespace henn
