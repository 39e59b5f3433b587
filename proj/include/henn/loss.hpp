#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "henn/gdd.hpp"
#include "henn/hyperdomain.hpp"

namespace henn {

/// Regularizer applied on top of UPCE.
///   kl           KL(GDD(masked params) || flat GDD)  (default)
///   entropy      negative entropy of the unmasked GDD
///   dirichlet_kl KL(Dir(masked alpha) || Dir(1)), composite evidence ignored
///   none         UPCE only
enum class RegMode { Kl, Entropy, DirichletKl, None };

std::string_view to_string(RegMode mode);
std::optional<RegMode> parse_reg_mode(std::string_view name);

inline constexpr double kDefaultLambda = 0.1;
inline constexpr double kPceFloor = 1e-300;

struct PceResult {
    double value;
    bool clamped;  // inner product was below kPceFloor
};

/// -ln(sum_k y_k p_k).
PceResult pce(std::span<const double> p, const LabelVector& y);

/// Closed-form E_{p ~ GDD}[PCE(p, y)].
double upce(const GddParams& params, const LabelVector& y);

/// Removes the ground-truth parameter before regularization: a singleton label
/// k resets alpha_k to 1; a composite label S_j resets c_j to 0.
GddParams masked_params(const GddParams& params, const LabelVector& y);

double reg(const GddParams& params, const LabelVector& y, RegMode mode = RegMode::Kl);

struct LossBreakdown {
    double upce = 0.0;
    double reg = 0.0;
    double total = 0.0;
    double lambda = 0.0;
};

LossBreakdown total_loss(const GddParams& params, const LabelVector& y, double lambda,
                         RegMode mode = RegMode::Kl);

/// Gradient of total_loss w.r.t. alpha (length K) and c (length eta). Entries
/// of d_c for singleton-size groups are always 0: those c_j are pinned.
struct LossGrad {
    std::vector<double> d_alpha;
    std::vector<double> d_c;
};

LossGrad grad_upce(const GddParams& params, const LabelVector& y);
LossGrad grad_reg(const GddParams& params, const LabelVector& y, RegMode mode = RegMode::Kl);
LossGrad grad_total(const GddParams& params, const LabelVector& y, double lambda, RegMode mode = RegMode::Kl);

}  // namespace henn
