#include "henn/hyperdomain.hpp"

#include <algorithm>

#include "henn/error.hpp"

namespace henn {

std::optional<std::string> Partition::validate(
    std::size_t k, const std::vector<std::vector<ClassIndex>>& groups) {
    if (k == 0) return "partition has zero classes";
    if (groups.empty()) return "partition has no groups";
    std::vector<int> seen(k, 0);
    for (std::size_t j = 0; j < groups.size(); ++j) {
        if (groups[j].empty()) return "group " + std::to_string(j) + " is empty";
        for (ClassIndex c : groups[j]) {
            if (c >= k) {
                return "group " + std::to_string(j) + " contains out-of-range class " +
                       std::to_string(c);
            }
            if (seen[c]++) return "class " + std::to_string(c) + " appears in more than one group (overlap)";
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (!seen[c]) return "class " + std::to_string(c) + " is not covered by any group (incomplete cover)";
    }
    if (k >= 2 && groups.size() < 2) return "a single group may not cover the whole domain";
    return std::nullopt;
}

Partition::Partition(std::size_t k, std::vector<std::vector<ClassIndex>> groups)
    : k_(k), groups_(std::move(groups)) {
    if (auto report = validate(k_, groups_)) throw ValidationError("invalid partition: " + *report);
    owner_.assign(k_, 0);
    for (GroupIndex j = 0; j < groups_.size(); ++j) {
        std::sort(groups_[j].begin(), groups_[j].end());
        for (ClassIndex c : groups_[j]) owner_[c] = j;
        if (groups_[j].size() >= 2) composite_.push_back(j);
    }
}

std::optional<std::size_t> Partition::composite_slot(GroupIndex j) const {
    auto it = std::find(composite_.begin(), composite_.end(), j);
    if (it == composite_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - composite_.begin());
}

GroupIndex Partition::containing_group(ClassIndex k) const {
    if (k >= k_) {
        throw DomainError("containing_group: class " + std::to_string(k) + " out of range for K=" +
                          std::to_string(k_));
    }
    return owner_[k];
}

std::size_t LabelVector::popcount() const {
    return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](auto b) { return b != 0; }));
}

std::vector<ClassIndex> LabelVector::support() const {
    std::vector<ClassIndex> out;
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) out.push_back(i);
    return out;
}

LabelVector LabelVector::singleton(std::size_t k, ClassIndex cls) {
    if (cls >= k) throw DomainError("singleton label: class out of range");
    LabelVector y{std::vector<std::uint8_t>(k, 0)};
    y.bits[cls] = 1;
    return y;
}

LabelVector LabelVector::group_indicator(const Partition& partition, GroupIndex j) {
    LabelVector y{std::vector<std::uint8_t>(partition.num_classes(), 0)};
    for (ClassIndex c : partition.group(j)) y.bits[c] = 1;
    return y;
}

std::optional<std::string> validate_label(const LabelVector& y, const Partition& partition) {
    if (y.size() != partition.num_classes()) {
        return "label has length " + std::to_string(y.size()) + ", expected " +
               std::to_string(partition.num_classes());
    }
    for (auto b : y.bits)
        if (b > 1) return "label bits must be 0 or 1";
    const auto supp = y.support();
    if (supp.empty()) return "label has no bit set";
    if (supp.size() == 1) return std::nullopt;
    const GroupIndex j = partition.containing_group(supp.front());
    if (partition.group(j) != supp) return "label support does not match any composite group";
    return std::nullopt;
}

LabelKind label_kind(const LabelVector& y, const Partition& partition) {
    if (auto report = validate_label(y, partition)) throw ValidationError("invalid label: " + *report);
    const auto supp = y.support();
    if (supp.size() == 1) return {LabelKind::Kind::Singleton, supp.front()};
    return {LabelKind::Kind::Composite, partition.containing_group(supp.front())};
}

}  // namespace henn
