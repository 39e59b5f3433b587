#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "henn/hyperdomain.hpp"

namespace henn {

/// Ordered family of focal sets drawn from the reduced power set of {0..K-1}:
/// every set is non-empty, a proper subset of the domain, and distinct.
class FocalFamily {
public:
    static std::optional<std::string> validate(std::size_t k, const std::vector<std::vector<ClassIndex>>& sets);

    FocalFamily(std::size_t k, std::vector<std::vector<ClassIndex>> sets);

    /// Singletons {0}..{K-1} followed by the partition's composite groups, in
    /// the same order as the evidence head.
    static FocalFamily from_partition(const Partition& partition);

    std::size_t domain_size() const { return k_; }
    std::size_t size() const { return sets_.size(); }
    const std::vector<ClassIndex>& set(std::size_t i) const { return sets_.at(i); }
    const std::vector<std::vector<ClassIndex>>& sets() const { return sets_; }

private:
    std::size_t k_;
    std::vector<std::vector<ClassIndex>> sets_;
};

struct HyperOpinion {
    std::vector<double> beliefs;  // aligned with the focal family
    double uncertainty = 1.0;     // vacuity mass u
};

/// b_S = e_S / T and u = K / T with T = sum e_S + K.
HyperOpinion opinion_from_evidence(std::span<const double> evidence, const FocalFamily& family);

double vacuity(const HyperOpinion& op);

/// Total belief on focal sets of size >= 2.
double vagueness(const HyperOpinion& op, const FocalFamily& family);

/// Balance-weighted conflict between focal sets, with pairwise distance given
/// by the size of the symmetric difference. Zero-belief sets contribute nothing
/// and a zero inner denominator yields a zero term.
double dissonance(const HyperOpinion& op, const FocalFamily& family);

/// Set prediction: the focal set with the largest evidence.
struct SetPrediction {
    LabelKind kind;
    /// Member classes of the predicted set, ascending.
    std::vector<ClassIndex> members;
};

/// Argmax over an evidence vector of width K + m (singletons first, then the
/// composite groups in partition order). Ties go to the lowest index.
SetPrediction argmax_evidence(std::span<const double> evidence, const Partition& partition);

}  // namespace henn
