#ifndef SEMLINK_BITS_HPP
#define SEMLINK_BITS_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace semlink {

/// Bit vectors are std::vector<uint8_t> holding one 0/1 value per element.
using BitVec = std::vector<uint8_t>;

/// Appends bits MSB-first into a byte buffer.
class BitWriter {
public:
    void put(int bit) {
        if (nbits_ % 8 == 0) bytes_.push_back(0);
        if (bit) bytes_.back() |= static_cast<uint8_t>(0x80u >> (nbits_ % 8));
        ++nbits_;
    }

    // value written in `width` bits, most significant first
    void put_uint(uint64_t value, int width) {
        for (int i = width - 1; i >= 0; --i) put(static_cast<int>((value >> i) & 1u));
    }

    // Elias-gamma code of n >= 1
    void put_gamma(uint64_t n) {
        if (n == 0) throw std::invalid_argument("gamma code undefined for 0");
        int top = 63;
        while (((n >> top) & 1u) == 0) --top;
        for (int i = 0; i < top; ++i) put(0);
        put_uint(n, top + 1);
    }

    size_t bit_count() const { return nbits_; }
    const std::vector<uint8_t>& bytes() const { return bytes_; }

private:
    std::vector<uint8_t> bytes_;
    size_t nbits_ = 0;
};

class BitReader {
public:
    BitReader(std::span<const uint8_t> bytes, size_t nbits)
        : bytes_(bytes), nbits_(nbits) {}

    int get() {
        if (pos_ >= nbits_) throw std::out_of_range("BitReader: past end");
        int bit = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1;
        ++pos_;
        return bit;
    }

    uint64_t get_uint(int width) {
        uint64_t v = 0;
        for (int i = 0; i < width; ++i) v = (v << 1) | static_cast<uint64_t>(get());
        return v;
    }

    uint64_t get_gamma() {
        int zeros = 0;
        while (get() == 0) ++zeros;
        uint64_t v = 1;
        for (int i = 0; i < zeros; ++i) v = (v << 1) | static_cast<uint64_t>(get());
        return v;
    }

    size_t remaining() const { return nbits_ - pos_; }

private:
    std::span<const uint8_t> bytes_;
    size_t nbits_;
    size_t pos_ = 0;
};

/// Packs a 0/1 bit vector into bytes, MSB-first, zero padded.
inline std::vector<uint8_t> pack_bits(std::span<const uint8_t> bits) {
    std::vector<uint8_t> out((bits.size() + 7) / 8, 0);
    for (size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) out[i / 8] |= static_cast<uint8_t>(0x80u >> (i % 8));
    return out;
}

inline BitVec unpack_bits(std::span<const uint8_t> bytes, size_t nbits) {
    if (nbits > bytes.size() * 8) throw std::invalid_argument("unpack_bits: not enough bytes");
    BitVec bits(nbits);
    for (size_t i = 0; i < nbits; ++i)
        bits[i] = (bytes[i / 8] >> (7 - i % 8)) & 1;
    return bits;
}

inline int ceil_log2(uint64_t n) {
    if (n == 0) throw std::invalid_argument("ceil_log2(0)");
    int b = 0;
    while ((uint64_t{1} << b) < n) ++b;
    return b;
}

inline int gamma_length(uint64_t n) {
    int top = 63;
    while (((n >> top) & 1u) == 0) --top;
    return 2 * top + 1;
}

}  // namespace semlink

#endif
