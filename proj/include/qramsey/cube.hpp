#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qramsey/bits.hpp"
#include "qramsey/rational.hpp"

namespace qramsey {

// Largest dimension for which a 2^n membership array is allowed.
struct CubeLimits {
    unsigned dense_limit = 28;
};
CubeLimits& cube_limits();

class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class RepresentationTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A vertex of Q_n. Coordinate i (1-based) is bit i-1 of the encoding, so the
// encoding x = sum_i bits_i * 2^(i-1) ranges over {0, ..., 2^n - 1}.
struct CubePoint {
    unsigned n = 0;
    std::uint64_t bits = 0;

    CubePoint() = default;
    CubePoint(unsigned dim, std::uint64_t enc) : n(dim), bits(enc) {
        if (dim > 64) throw std::invalid_argument("cube dimension > 64");
        if (dim < 64 && (enc >> dim) != 0) throw std::invalid_argument("encoding out of range for Q_n");
    }

    bool coord(unsigned i) const { return (bits >> (i - 1)) & 1u; }  // i in [1..n]
    unsigned weight() const { return (unsigned)__builtin_popcountll(bits); }

    // coordinate 1 leftmost
    std::string str() const;
    static CubePoint parse(const std::string& s);

    bool operator==(const CubePoint& o) const { return n == o.n && bits == o.bits; }
};

unsigned hamming_distance(const CubePoint& a, const CubePoint& b);

inline unsigned hamming_distance(std::uint64_t a, std::uint64_t b) {
    return (unsigned)__builtin_popcountll(a ^ b);
}

// Exact binomial prefix sums for one dimension: cumulative[j] = sum_{s<=j} C(n,s).
struct TailTable {
    unsigned n;
    std::vector<BigInt> cumulative;

    explicit TailTable(unsigned dim);

    // |[n]^{<=t}| for rational t (closed threshold, empty when t < 0)
    BigInt count_weight_at_most(const Rat& t) const;
    BigInt total() const { return cumulative[n]; }
};

const TailTable& tail_table(unsigned n);  // cached per dimension
BigInt binomial(unsigned n, unsigned k);

// W(eps, n): measure of the lower tail at weight (1-eps) n/2; equals the
// upper tail at (1+eps) n/2 by symmetry.
Rat tail_size(const Rat& eps, unsigned n);

// A subset of Q_n with exact uniform measure. Dense = 2^n membership flags,
// sparse = strictly increasing encodings.
class CubeSubset {
public:
    enum class Repr { Dense, Sparse };

    static CubeSubset empty_dense(unsigned n);
    static CubeSubset empty_sparse(unsigned n);
    static CubeSubset full(unsigned n);
    static CubeSubset from_points(unsigned n, std::vector<std::uint64_t> encodings);  // sparse
    static CubeSubset from_bits(unsigned n, DenseBits bits);

    unsigned dim() const { return n_; }
    Repr repr() const { return repr_; }
    std::uint64_t card() const { return card_; }
    bool empty() const { return card_ == 0; }

    Rat measure() const { return Rat(BigInt(card_), pow2(n_)); }
    bool measure_at_least(const Rat& delta) const { return measure() >= delta; }
    bool measure_exceeds(const Rat& delta) const { return measure() > delta; }

    bool contains(std::uint64_t enc) const;
    void insert(std::uint64_t enc);  // single-owner during construction

    // dense view (densifies sparse sets when n <= dense limit, else throws)
    const DenseBits& dense_bits() const;
    CubeSubset densified() const;
    std::vector<std::uint64_t> to_points() const;  // ascending encodings

    CubeSubset intersect(const CubeSubset& o) const;
    bool operator==(const CubeSubset& o) const;

private:
    CubeSubset(unsigned n, Repr r);

    unsigned n_ = 0;
    Repr repr_ = Repr::Sparse;
    std::uint64_t card_ = 0;
    DenseBits bits_;                        // dense repr
    std::vector<std::uint64_t> points_;    // sparse repr, strictly increasing
};

// {x : exists x' in D with ||x - x'|| <= eps * n}; BFS over the cube graph
// for floor(eps*n) rounds on the dense representation.
CubeSubset epsilon_neighborhood(const CubeSubset& d, const Rat& eps);

// Section of D c= Q_{n+N} on the leading block x in Q_n: {y : (x, y) in D}.
// The leading block occupies coordinates 1..n (low bits of the encoding).
CubeSubset section(const CubeSubset& d, const CubePoint& x);

// {x' : (1-eps1) n/2 < ||x - x'|| < (1+eps1) n/2}, both bounds strict.
CubeSubset central_shell(const CubePoint& x, const Rat& eps1);

// Strict shell test on a weight/distance value.
bool in_central_shell(unsigned dist, unsigned n, const Rat& eps1);

// Membership given by a function instead of stored flags; used where 2^n is
// far beyond any representable set (sampled search paths).
struct ImplicitCubeSet {
    unsigned n = 0;
    std::function<bool(std::uint64_t)> member;
};

// Bernoulli(p) membership keyed by (seed, encoding).
ImplicitCubeSet bernoulli_implicit(unsigned n, const Rat& p, std::uint64_t seed);

// Points within Hamming distance <= radius of `base` (radius kept small).
ImplicitCubeSet ball_inflate(const ImplicitCubeSet& base, unsigned radius);

// --- QSET v1 ---
void write_qset(std::ostream& out, const CubeSubset& d);
CubeSubset read_qset(std::istream& in);
void save_qset(const std::string& path, const CubeSubset& d);
CubeSubset load_qset(const std::string& path);

}  // namespace qramsey
