#pragma once

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2,
// 3"). Counter-based: block(counter, key) is a pure function, so every
// (seed, trial, stream) triple owns an independent substream and results do
// not depend on how trials are spread over threads.

#include <array>
#include <cstdint>

namespace votelab {

struct Philox4x32 {
    using counter_type = std::array<std::uint32_t, 4>;
    using key_type = std::array<std::uint32_t, 2>;

    static constexpr std::uint32_t m0 = 0xD2511F53u;
    static constexpr std::uint32_t m1 = 0xCD9E8D57u;
    static constexpr std::uint32_t w0 = 0x9E3779B9u;
    static constexpr std::uint32_t w1 = 0xBB67AE85u;

    static constexpr counter_type block(counter_type ctr, key_type key) noexcept {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += w0;
            key[1] += w1;
        }
        return ctr;
    }
};

/// Sequential draws from the substream (seed, stream, trial). Word 0 of the
/// counter walks through blocks; words 1..3 pin the substream.
class TrialRng {
public:
    TrialRng(std::uint64_t seed, std::uint64_t trial, std::uint32_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          ctr_{0u, stream, static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)} {}

    std::uint32_t next_u32() noexcept {
        if (used_ == 4) refill();
        return buf_[used_++];
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform on the open interval (0, 1), 53 random bits.
    double uniform() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    void refill() noexcept {
        buf_ = Philox4x32::block(ctr_, key_);
        ++ctr_[0];
        used_ = 0;
    }

    Philox4x32::key_type key_;
    Philox4x32::counter_type ctr_;
    Philox4x32::counter_type buf_{};
    int used_ = 4;
};

} // namespace votelab
