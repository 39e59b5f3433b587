#include "henn/opinion.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "henn/error.hpp"

namespace henn {

std::optional<std::string> FocalFamily::validate(std::size_t k,
                                                 const std::vector<std::vector<ClassIndex>>& sets) {
    if (k == 0) return "focal family over an empty domain";
    std::set<std::vector<ClassIndex>> distinct;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        auto s = sets[i];
        std::sort(s.begin(), s.end());
        if (s.empty()) return "focal set " + std::to_string(i) + " is empty";
        if (std::adjacent_find(s.begin(), s.end()) != s.end())
            return "focal set " + std::to_string(i) + " repeats a class";
        if (s.back() >= k) return "focal set " + std::to_string(i) + " has an out-of-range class";
        if (s.size() == k) return "focal set " + std::to_string(i) + " equals the full domain";
        if (!distinct.insert(s).second) return "focal set " + std::to_string(i) + " is a duplicate";
    }
    return std::nullopt;
}

FocalFamily::FocalFamily(std::size_t k, std::vector<std::vector<ClassIndex>> sets)
    : k_(k), sets_(std::move(sets)) {
    if (auto report = validate(k_, sets_)) throw ValidationError("invalid focal family: " + *report);
    for (auto& s : sets_) std::sort(s.begin(), s.end());
}

FocalFamily FocalFamily::from_partition(const Partition& partition) {
    std::vector<std::vector<ClassIndex>> sets;
    const std::size_t k = partition.num_classes();
    for (ClassIndex c = 0; c < k; ++c) sets.push_back({c});
    for (GroupIndex j : partition.composite_groups()) sets.push_back(partition.group(j));
    return FocalFamily(k, std::move(sets));
}

HyperOpinion opinion_from_evidence(std::span<const double> evidence, const FocalFamily& family) {
    if (evidence.size() != family.size())
        throw DomainError("opinion_from_evidence: evidence length does not match focal family");
    double total = static_cast<double>(family.domain_size());
    for (double e : evidence) {
        if (!(e >= 0.0) || !std::isfinite(e))
            throw DomainError("opinion_from_evidence: evidence must be finite and non-negative");
        total += e;
    }
    HyperOpinion op;
    op.beliefs.reserve(evidence.size());
    for (double e : evidence) op.beliefs.push_back(e / total);
    op.uncertainty = static_cast<double>(family.domain_size()) / total;
    return op;
}

double vacuity(const HyperOpinion& op) { return op.uncertainty; }

double vagueness(const HyperOpinion& op, const FocalFamily& family) {
    double v = 0.0;
    for (std::size_t i = 0; i < family.size(); ++i)
        if (family.set(i).size() >= 2) v += op.beliefs.at(i);
    return v;
}

namespace {

std::size_t symmetric_difference_size(const std::vector<ClassIndex>& a, const std::vector<ClassIndex>& b) {
    std::size_t common = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++common;
            ++ia;
            ++ib;
        }
    }
    return a.size() + b.size() - 2 * common;
}

double balance(double b_other, double b_self) {
    const double s = b_other + b_self;
    if (s <= 0.0) return 0.0;
    return 1.0 - std::abs(b_other - b_self) / s;
}

}  // namespace

double dissonance(const HyperOpinion& op, const FocalFamily& family) {
    const std::size_t n = family.size();
    if (op.beliefs.size() != n) throw DomainError("dissonance: belief length does not match focal family");
    double diss = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        const double bs = op.beliefs[s];
        if (bs <= 0.0) continue;
        double num = 0.0;
        double den = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            if (t == s) continue;
            const double bt = op.beliefs[t];
            const double w = static_cast<double>(symmetric_difference_size(family.set(s), family.set(t))) * bt;
            num += w * balance(bt, bs);
            den += w;
        }
        if (den > 0.0) diss += bs * num / den;
    }
    return diss;
}

SetPrediction argmax_evidence(std::span<const double> evidence, const Partition& partition) {
    if (evidence.empty()) throw DomainError("argmax_evidence: empty evidence vector");
    if (evidence.size() != partition.evidence_width())
        throw DomainError("argmax_evidence: evidence width must be K + m");
    std::size_t best = 0;
    for (std::size_t i = 1; i < evidence.size(); ++i)
        if (evidence[i] > evidence[best]) best = i;
    const std::size_t k = partition.num_classes();
    if (best < k) return {{LabelKind::Kind::Singleton, best}, {best}};
    const GroupIndex j = partition.composite_groups()[best - k];
    return {{LabelKind::Kind::Composite, j}, partition.group(j)};
}

}  // namespace henn
