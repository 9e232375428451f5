#pragma once

#include <cstdint>
#include <limits>

namespace wibp {

/// Splittable 64-bit generator keyed by (seed, stream_id).
///
/// Output number k of a stream is a pure function of (seed, stream_id, k):
/// the k-th value is mix64(base + k * gamma), where base and the odd
/// increment gamma are both derived from the key. Distinct stream ids map
/// to distinct bases (mix64 is a bijection), and the per-stream gamma keeps
/// two streams from being shifted copies of one another.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    std::uint64_t operator()() noexcept {
        ++counter_;
        return mix64(base_ + counter_ * gamma_);
    }

    /// Uniform double in the open interval (0, 1), 53 random bits.
    double uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }
    /// Number of 64-bit outputs consumed so far.
    std::uint64_t counter() const noexcept { return counter_; }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    static constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    friend bool operator==(const RngStream&, const RngStream&) = default;

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t base_;
    std::uint64_t gamma_;
    std::uint64_t counter_ = 0;
};

/// Derive a sub-seed from a base seed and a tag (e.g. a suite name).
std::uint64_t derive_seed(std::uint64_t base_seed, const char* tag) noexcept;

}  // namespace wibp
