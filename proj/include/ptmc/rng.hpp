#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace ptmc {

/// Philox4x32-10 counter-based block cipher (Salmon et al., Random123).
/// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter apply(Counter ctr, Key key) noexcept {
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            ctr = round(ctr, key);
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static constexpr Counter round(const Counter& c, const Key& k) noexcept {
        const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

/// SplitMix64 finalizer; used to derive seeds from (seed, tag) tuples.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept {
    return mix64(seed ^ mix64(value));
}

/// Deterministic random stream identified by (master seed, stream id).
///
/// Draw number n is the n-th 64-bit half of the Philox block at counter
/// (n / 2, stream id). Streams are therefore seekable, and two streams
/// with different ids never share a counter.
class RngStream {
public:
    RngStream() = default;
    RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t position = 0) noexcept
        : seed_(seed), stream_(stream_id), position_(position) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_; }
    /// Number of 64-bit draws consumed so far.
    std::uint64_t position() const noexcept { return position_; }
    void seek(std::uint64_t position) noexcept { position_ = position; }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t block = position_ >> 1;
        if (!cached_ || block != cached_block_) {
            refill(block);
        }
        const std::uint64_t out = (position_ & 1u) ? cache_[1] : cache_[0];
        ++position_;
        return out;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Integer in [0, bound) by 128-bit multiply-shift; consumes exactly one draw.
    std::uint64_t below(std::uint64_t bound) noexcept {
        const auto wide = static_cast<unsigned __int128>(next_u64()) * bound;
        return static_cast<std::uint64_t>(wide >> 64);
    }

private:
    void refill(std::uint64_t block) noexcept {
        const Philox4x32::Counter ctr{
            static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
            static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        const Philox4x32::Key key{static_cast<std::uint32_t>(seed_),
                                  static_cast<std::uint32_t>(seed_ >> 32)};
        const auto out = Philox4x32::apply(ctr, key);
        cache_[0] = (std::uint64_t{out[1]} << 32) | out[0];
        cache_[1] = (std::uint64_t{out[3]} << 32) | out[2];
        cached_block_ = block;
        cached_ = true;
    }

    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
    std::uint64_t position_ = 0;
    std::uint64_t cached_block_ = 0;
    std::array<std::uint64_t, 2> cache_{};
    bool cached_ = false;
};

/// Stream-id families. MH streams are indexed by replica slot, swap streams
/// by |R| + lower pair index, and lattice initialization uses a tagged range
/// that cannot collide with either.
namespace streams {
constexpr std::uint64_t mh(std::size_t replica) noexcept { return replica; }
constexpr std::uint64_t swap(std::size_t replica_count, std::size_t pair_index) noexcept {
    return replica_count + pair_index;
}
constexpr std::uint64_t init(std::size_t replica) noexcept {
    return (std::uint64_t{1} << 63) | replica;
}
}  // namespace streams

}  // namespace ptmc
