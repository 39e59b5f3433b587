#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace henn {

// Class and group indices are 0-based throughout the library and in every file
// format it reads or writes.
using ClassIndex = std::size_t;
using GroupIndex = std::size_t;

/// Disjoint cover of the K singleton classes by an ordered list of groups.
/// Groups of size >= 2 are "composite" and receive their own evidence output;
/// singleton-size groups exist only to complete the cover.
class Partition {
public:
    /// Returns the first violated invariant, or nullopt if `groups` is a valid
    /// partition of {0..k-1}.
    static std::optional<std::string> validate(std::size_t k,
                                               const std::vector<std::vector<ClassIndex>>& groups);

    /// Throws ValidationError with the report from validate().
    Partition(std::size_t k, std::vector<std::vector<ClassIndex>> groups);

    std::size_t num_classes() const { return k_; }
    std::size_t num_groups() const { return groups_.size(); }
    /// Number of composite (size >= 2) groups, m.
    std::size_t num_composite() const { return composite_.size(); }

    const std::vector<std::vector<ClassIndex>>& groups() const { return groups_; }
    const std::vector<ClassIndex>& group(GroupIndex j) const { return groups_.at(j); }
    bool is_composite(GroupIndex j) const { return groups_.at(j).size() >= 2; }

    /// Composite group indices in partition order. Evidence slot K + i maps to
    /// composite_groups()[i].
    const std::vector<GroupIndex>& composite_groups() const { return composite_; }
    /// Inverse of composite_groups(); nullopt for singleton-size groups.
    std::optional<std::size_t> composite_slot(GroupIndex j) const;

    /// The unique group containing class k; DomainError if k >= K.
    GroupIndex containing_group(ClassIndex k) const;

    /// Evidence-head width K + m.
    std::size_t evidence_width() const { return k_ + composite_.size(); }

    friend bool operator==(const Partition& a, const Partition& b) {
        return a.k_ == b.k_ && a.groups_ == b.groups_;
    }

private:
    std::size_t k_;
    std::vector<std::vector<ClassIndex>> groups_;
    std::vector<GroupIndex> owner_;
    std::vector<GroupIndex> composite_;
};

/// Binary label vector y~ over K classes.
struct LabelVector {
    std::vector<std::uint8_t> bits;

    std::size_t size() const { return bits.size(); }
    std::size_t popcount() const;
    /// Indices of the set bits, ascending.
    std::vector<ClassIndex> support() const;

    static LabelVector singleton(std::size_t k, ClassIndex cls);
    static LabelVector group_indicator(const Partition& partition, GroupIndex j);

    friend bool operator==(const LabelVector&, const LabelVector&) = default;
};

struct LabelKind {
    enum class Kind { Singleton, Composite };
    Kind kind;
    /// Class index for Singleton, group index for Composite.
    std::size_t index;

    bool is_singleton() const { return kind == Kind::Singleton; }
    bool is_composite() const { return kind == Kind::Composite; }
    friend bool operator==(const LabelKind&, const LabelKind&) = default;
};

/// Classifies a label against the partition. Throws ValidationError if the
/// label is empty, has the wrong length, or its multi-bit support is not
/// exactly one composite group.
LabelKind label_kind(const LabelVector& y, const Partition& partition);

/// Non-throwing validity check for a label vector.
std::optional<std::string> validate_label(const LabelVector& y, const Partition& partition);

}  // namespace henn
