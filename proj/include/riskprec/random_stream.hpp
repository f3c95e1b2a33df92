#pragma once

#include <array>
#include <cstdint>

namespace riskprec {

/// Philox4x32-10 block function (Salmon et al., SC'11).
///
/// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits. Being a
/// pure function of (counter, key), any block of any stream can be produced
/// independently, which is what makes trial-level parallelism reproducible.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr int kRounds = 10;

    [[nodiscard]] static constexpr Counter apply(Counter ctr, Key key) noexcept {
        for (int r = 0; r < kRounds; ++r) {
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

/// Identifies one independent stream: the key is the master seed, the three
/// upper counter words are the stream coordinates, the lowest word is the
/// block index within the stream. Distinct coordinates never share a counter.
struct StreamId {
    std::uint64_t master_seed = 0;
    std::uint32_t group = 0;   // distribution id, or 0 under common random numbers
    std::uint32_t sample_size = 0;
    std::uint32_t trial = 0;

    friend bool operator==(const StreamId&, const StreamId&) = default;
};

/// Single-owner uniform stream over one StreamId. Each Philox block yields
/// two doubles; consumption order is fixed, so a stream replays bit-exactly.
class RandomStream {
public:
    explicit RandomStream(const StreamId& id) noexcept
        : key_{static_cast<std::uint32_t>(id.master_seed),
               static_cast<std::uint32_t>(id.master_seed >> 32)},
          ctr_{0u, id.trial, id.sample_size, id.group} {}

    RandomStream(const RandomStream&) = delete;
    RandomStream& operator=(const RandomStream&) = delete;
    RandomStream(RandomStream&&) noexcept = default;
    RandomStream& operator=(RandomStream&&) noexcept = default;

    /// Uniform double strictly inside (0, 1) with 53 random bits.
    [[nodiscard]] double uniform();

    /// Raw 64 bits (two counter words of the current block).
    [[nodiscard]] std::uint64_t next_u64();

    [[nodiscard]] std::uint64_t draws() const noexcept { return consumed_; }

private:
    Philox4x32::Key key_;
    Philox4x32::Counter ctr_;
    Philox4x32::Counter block_{};
    int cursor_ = 4;  // words of block_ already used, in pairs
    std::uint64_t consumed_ = 0;
};

}  // namespace riskprec
