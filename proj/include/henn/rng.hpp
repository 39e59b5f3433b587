#pragma once

#include <cstdint>

namespace henn {

/// Counter-based random stream: the i-th draw is a pure function of
/// (seed, stream, i), so streams can be split across chunks or workers and
/// replayed exactly. Each output is a SplitMix64 finalizer applied to a
/// keyed Weyl sequence.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();
    /// Uniform in the open interval (0, 1).
    double uniform();
    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);
    double normal();
    /// Gamma(shape, 1). Marsaglia-Tsang squeeze/rejection; for shape < 1 the
    /// draw is boosted to shape + 1 and scaled by U^(1/shape).
    double gamma(double shape);

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace henn
