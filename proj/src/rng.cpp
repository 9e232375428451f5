#include "wibp/rng.hpp"

#include <bit>

namespace wibp {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Increment selection as in SplitMix's split(): odd, and with enough bit
// transitions that consecutive multiples are well mixed.
std::uint64_t mix_gamma(std::uint64_t z) noexcept {
    z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
    z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
    z = (z ^ (z >> 33)) | 1ULL;
    if (std::popcount(z ^ (z >> 1)) < 24) z ^= 0xaaaaaaaaaaaaaaaaULL;
    return z;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : seed_(seed), stream_id_(stream_id) {
    const std::uint64_t key = mix64(seed + kGolden);
    base_ = mix64(stream_id ^ key);
    gamma_ = mix_gamma(base_ + kGolden);
}

std::uint64_t derive_seed(std::uint64_t base_seed, const char* tag) noexcept {
    // FNV-1a over the tag, folded into the seed.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char* p = tag; *p != '\0'; ++p) {
        h ^= static_cast<unsigned char>(*p);
        h *= 0x100000001b3ULL;
    }
    return RngStream::mix64(base_seed ^ RngStream::mix64(h));
}

}  // namespace wibp
