#ifndef SEMLINK_RNG_HPP
#define SEMLINK_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>

namespace semlink {

/// Philox4x32-10 counter-based generator (Salmon et al. constants).
///
/// A substream is addressed by (seed, stream_id, trial_id): the seed forms
/// the 64-bit key and the two ids occupy the upper counter words, so
/// substreams never overlap. Draws are reproducible across platforms;
/// gaussian() uses Box-Muller rather than std::normal_distribution, whose
/// output is implementation-defined.
class Philox {
public:
    explicit Philox(uint64_t seed, uint32_t stream_id = 0, uint32_t trial_id = 0)
        : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
          counter_{0, 0, stream_id, trial_id} {}

    uint32_t next_u32() {
        if (pos_ == 4) refill();
        return block_[pos_++];
    }

    uint64_t next_u64() {
        uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; pairs are cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    static constexpr uint32_t kM0 = 0xD2511F53u;
    static constexpr uint32_t kM1 = 0xCD9E8D57u;
    static constexpr uint32_t kW0 = 0x9E3779B9u;
    static constexpr uint32_t kW1 = 0xBB67AE85u;

    static void round(std::array<uint32_t, 4>& c, std::array<uint32_t, 2>& k) {
        uint64_t p0 = static_cast<uint64_t>(kM0) * c[0];
        uint64_t p1 = static_cast<uint64_t>(kM1) * c[2];
        uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
        uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kW0;
        k[1] += kW1;
    }

    void refill() {
        std::array<uint32_t, 4> c = counter_;
        std::array<uint32_t, 2> k = key_;
        for (int i = 0; i < 10; ++i) round(c, k);
        block_ = c;
        pos_ = 0;
        if (++counter_[0] == 0) ++counter_[1];  // 64-bit block index
    }

    std::array<uint32_t, 2> key_;
    std::array<uint32_t, 4> counter_;
    std::array<uint32_t, 4> block_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace semlink

#endif
