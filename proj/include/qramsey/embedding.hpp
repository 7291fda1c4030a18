#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "qramsey/cube.hpp"
#include "qramsey/metric.hpp"

namespace qramsey {

// A rescaled-isometric copy of Q_k in Q_N in block form: the vertex-labeled
// map alpha |-> b XOR (XOR of blocks[i] over alpha_i = 1). With b pinned to
// the image of 0^k this representation is one-to-one with the map.
struct UndistortedForm {
    unsigned k = 0;
    unsigned N = 0;
    unsigned r = 0;
    std::uint64_t b = 0;
    std::vector<std::uint64_t> blocks;  // blocks[i] = coordinate mask of I_{i+1}, |I_i| = r, pairwise disjoint

    std::uint64_t image(std::uint64_t alpha) const {
        std::uint64_t y = b;
        for (unsigned i = 0; i < k; ++i)
            if ((alpha >> i) & 1u) y ^= blocks[i];
        return y;
    }

    EmbeddingMap induced_map() const;

    // unordered block family, sorted by minimum element; used to compare
    // forms modulo relabeling of source coordinates
    std::vector<std::uint64_t> sorted_blocks() const;

    // sorted image set, the key for unlabeled image-set deduplication
    std::vector<std::uint64_t> image_set() const;

    bool operator==(const UndistortedForm& o) const {
        return k == o.k && N == o.N && r == o.r && b == o.b && blocks == o.blocks;
    }
};

// The k pairs (x_0^i, x_1^i) of a (roughly) equitable block copy of Q_k in
// Q_{kn}; eps1 = 0 means all block distances are equal.
struct BlockCopySpec {
    unsigned k = 0;
    unsigned n = 0;
    Rat eps1;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
    bool sampled = false;  // set when the pair search fell back to sampling

    // encoding of (x_{alpha_1}^1, ..., x_{alpha_k}^k) in Q_{kn}
    std::uint64_t concatenation(std::uint64_t alpha) const {
        std::uint64_t enc = 0;
        for (unsigned i = 0; i < k; ++i) {
            std::uint64_t block = ((alpha >> i) & 1u) ? pairs[i].second : pairs[i].first;
            enc |= block << (i * n);
        }
        return enc;
    }

    void validate() const;  // invariants: shell bounds (eps1 > 0) or equal distances (eps1 == 0)
};

// Decomposes f : Q_k -> Q_N as an r-rescaled isometry (Prop.-5.1-style block
// form) or reports the first pair violating the constant-ratio test.
struct NotUndistorted {
    std::uint64_t alpha = 0;
    std::uint64_t alpha_prime = 0;
};
std::variant<UndistortedForm, NotUndistorted> canonical_form(const EmbeddingMap& f);

struct EnumerationOptions {
    BigInt cap = BigInt(1) << 26;
    bool force = false;
    unsigned workers = 1;
};

// Pull-based stream over all forms (b ascending by encoding, then the k
// disjoint r-subsets in lexicographic order). With a filter, emits only
// copies whose full 2^k image lies inside it.
class UndistortedStream {
public:
    UndistortedStream(unsigned k, unsigned N, unsigned r,
                      const CubeSubset* filter = nullptr,
                      EnumerationOptions opts = {});

    std::optional<UndistortedForm> next();
    BigInt predicted_size() const { return predicted_; }

private:
    bool advance_blocks();

    unsigned k_, N_, r_;
    const CubeSubset* filter_;
    BigInt predicted_;
    std::uint64_t b_ = 0;
    bool fresh_b_ = true;
    bool done_ = false;
    std::vector<std::vector<unsigned>> idx_;    // idx_[i] = chosen coordinate indices of block i
    std::vector<std::uint64_t> masks_;
};

BigInt predicted_form_count(unsigned k, unsigned N, unsigned r);

// First form (deterministic order: r ascending over the inclusive range,
// then b ascending, then blocks lexicographically) whose image lies in D.
struct CopySearchResult {
    std::optional<UndistortedForm> form;
    BigInt forms_checked = 0;   // forms whose enumeration was begun
    bool capped = false;        // search aborted by the enumeration cap
};
CopySearchResult find_copy_brute(const CubeSubset& d, unsigned k,
                                 unsigned r_min, unsigned r_max,
                                 EnumerationOptions opts = {});

// mu^{k,n}_{eps1}(D) = |V^{k,n}_{eps1}(D)| / |V^{k,n}_{eps1}| by direct
// enumeration; D lives over Q_{kn}.
Rat block_pair_measure(const CubeSubset& d, unsigned k, const Rat& eps1);

}  // namespace qramsey
