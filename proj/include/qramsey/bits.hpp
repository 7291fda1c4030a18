#pragma once

#include <bit>
#include <cstdint>
#include <cstddef>
#include <vector>

namespace qramsey {

// Fixed-size bit array indexed by cube-point encodings. Size is always a
// power of two (2^n flags for Q_n); the last word is kept zero-padded.
class DenseBits {
public:
    DenseBits() = default;
    explicit DenseBits(std::uint64_t nbits)
        : nbits_(nbits), words_((nbits + 63) / 64, 0) {
        if (words_.empty()) words_.resize(1, 0);
    }

    std::uint64_t size() const { return nbits_; }

    bool test(std::uint64_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::uint64_t i) { words_[i >> 6] |= (std::uint64_t(1) << (i & 63)); }
    void reset(std::uint64_t i) { words_[i >> 6] &= ~(std::uint64_t(1) << (i & 63)); }

    std::uint64_t count() const {
        std::uint64_t c = 0;
        for (std::uint64_t w : words_) c += std::popcount(w);
        return c;
    }

    void clear() { std::fill(words_.begin(), words_.end(), 0); }

    DenseBits& operator|=(const DenseBits& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
        return *this;
    }
    DenseBits& operator&=(const DenseBits& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
        return *this;
    }

    std::uint64_t and_count(const DenseBits& o) const {
        std::uint64_t c = 0;
        for (std::size_t i = 0; i < words_.size(); ++i) c += std::popcount(words_[i] & o.words_[i]);
        return c;
    }

    bool operator==(const DenseBits& o) const { return nbits_ == o.nbits_ && words_ == o.words_; }

    // OR-in this set translated by XOR with 2^bit (one cube-graph direction).
    // bit < 6 permutes inside each word, bit >= 6 swaps word pairs.
    void or_xor_shift_into(DenseBits& out, unsigned bit) const {
        if (bit < 6) {
            unsigned s = 1u << bit;
            std::uint64_t mask = xor_masks_[bit];
            for (std::size_t i = 0; i < words_.size(); ++i) {
                std::uint64_t w = words_[i];
                out.words_[i] |= ((w & mask) << s) | ((w >> s) & mask);
            }
        } else {
            std::size_t stride = std::size_t(1) << (bit - 6);
            for (std::size_t base = 0; base < words_.size(); base += 2 * stride)
                for (std::size_t i = 0; i < stride; ++i) {
                    out.words_[base + i] |= words_[base + i + stride];
                    out.words_[base + i + stride] |= words_[base + i];
                }
        }
    }

    const std::vector<std::uint64_t>& words() const { return words_; }
    std::vector<std::uint64_t>& words() { return words_; }

private:
    static constexpr std::uint64_t xor_masks_[6] = {
        0x5555555555555555ull, 0x3333333333333333ull, 0x0f0f0f0f0f0f0f0full,
        0x00ff00ff00ff00ffull, 0x0000ffff0000ffffull, 0x00000000ffffffffull,
    };

    std::uint64_t nbits_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace qramsey
