#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qramsey/rational.hpp"

namespace qramsey {

// The three finite metric spaces in play. Points are addressed by index:
//   cube Q_n:  index = encoding, 0 .. 2^n - 1
//   path [n]:  index i stands for the integer i + 1, 0 .. n - 1
//   Tree(n):   heap id = index + 1 in 1 .. 2^n - 1; the binary word of a
//              vertex is the heap id's bits below the leading one, MSB first.
struct FiniteMetric {
    enum class Kind { Cube, Path, Tree };

    Kind kind = Kind::Cube;
    unsigned dim = 0;

    std::uint64_t size() const;
    std::uint64_t distance(std::uint64_t a, std::uint64_t b) const;
    std::string point_str(std::uint64_t idx) const;
    std::uint64_t parse_point(const std::string& s) const;

    static FiniteMetric cube(unsigned n) { return {Kind::Cube, n}; }
    static FiniteMetric path(unsigned n) { return {Kind::Path, n}; }
    static FiniteMetric tree(unsigned n) { return {Kind::Tree, n}; }

    bool operator==(const FiniteMetric& o) const { return kind == o.kind && dim == o.dim; }
};

// An explicit injective map between two finite metric spaces.
struct EmbeddingMap {
    FiniteMetric source;
    FiniteMetric target;
    std::vector<std::uint64_t> images;  // images[i] = target index of source point i

    std::uint64_t apply(std::uint64_t src_idx) const { return images[src_idx]; }
};

struct DistortionReport {
    Rat expansion;     // max over pairs of d_target / d_source
    Rat contraction;   // max over pairs of d_source / d_target
    Rat distortion;    // expansion * contraction
    std::pair<std::uint64_t, std::uint64_t> expansion_witness;    // source indices
    std::pair<std::uint64_t, std::uint64_t> contraction_witness;  // source indices
};

// Exact rational distortion with argmax witnesses. Throws on non-injective
// maps or sources with fewer than 2 points.
DistortionReport distortion(const EmbeddingMap& f);

// --- EMB v1 ---
void write_emb(std::ostream& out, const EmbeddingMap& f);
EmbeddingMap read_emb(std::istream& in);
void save_emb(const std::string& path, const EmbeddingMap& f);
EmbeddingMap load_emb(const std::string& path);

}  // namespace qramsey
