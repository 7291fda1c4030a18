#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qramsey/metric.hpp"
#include "qramsey/pathspace.hpp"
#include "qramsey/rational.hpp"

namespace qramsey {

// Vertices of Tree(N) are binary words of length 0..N-1. Internally a word
// is its heap id: root = 1, children of v = 2v and 2v+1; the word is the
// id's bits below the leading one, most significant first.
struct TreeVertex {
    std::string word;

    unsigned level() const { return (unsigned)word.size(); }
    std::uint64_t heap_id() const;
    static TreeVertex from_heap(std::uint64_t id);
    static TreeVertex parse(const std::string& s);  // "." denotes the root
    std::string str() const { return word.empty() ? "." : word; }

    bool operator==(const TreeVertex& o) const { return word == o.word; }
};

unsigned tree_level(std::uint64_t heap_id);
std::uint64_t tree_lca(std::uint64_t a, std::uint64_t b);
unsigned tree_distance_ids(std::uint64_t a, std::uint64_t b);
unsigned tree_distance(const TreeVertex& a, const TreeVertex& b);
bool tree_is_ancestor(std::uint64_t anc, std::uint64_t v);  // ancestor-or-equal

// The unique vertex on all three pairwise geodesics (deepest pairwise LCA);
// the three additive identities are asserted.
std::uint64_t tripod_median_ids(std::uint64_t a, std::uint64_t b, std::uint64_t c);
TreeVertex tripod_median(const TreeVertex& a, const TreeVertex& b, const TreeVertex& c);

// vertices on the geodesic a -> lca -> b, inclusive
std::vector<std::uint64_t> tree_geodesic(std::uint64_t a, std::uint64_t b);

// Explicit vertex subset of Tree(n) with mu(D) = (1/N) sum 2^{-l(w)}.
struct TreeSubset {
    unsigned n = 0;
    std::vector<std::uint64_t> heap_ids;  // sorted

    Rat measure() const;
    bool contains(std::uint64_t id) const;
    void validate() const;
};

// Level-set subset: membership depends only on the level. Materializable
// when n is small; the measure is exact at any n.
struct TreeLevelSet {
    unsigned n = 0;
    std::vector<unsigned> levels;  // sorted, values in 0..n-1

    Rat measure() const { return Rat(BigInt(levels.size()), BigInt(n)); }
    bool contains_level(unsigned l) const;
    TreeSubset materialize(unsigned max_dim = 24) const;
};

// D = {w : l(w) + 1 in Cantor(n, k) members}; level l corresponds to the
// path integer l + 1.
std::pair<TreeLevelSet, CantorTrace> tree_level_set(unsigned n, unsigned k);

// --- TSET v1 ---
void write_tset(std::ostream& out, const TreeSubset& d);
TreeSubset read_tset(std::istream& in);
void save_tset(const std::string& path, const TreeSubset& d);
TreeSubset load_tset(const std::string& path);

// Checks that a rescaled path f : [k] -> Tree(N) with distortion <= 1.001
// hugs the geodesic from f(1) to f(k): d_T(f(i), gamma) <= 0.01 r. Also
// reproduces the tripod medians g(i) and additionally reports whether the
// tighter 0.0005 r bound holds, without requiring it.
struct GeodesicClosenessReport {
    bool ok = false;                       // stated bound holds everywhere
    Rat max_distance_to_geodesic;          // max over i of d_T(f(i), gamma)
    Rat stated_bound;                      // 0.01 r
    bool tight_bound_holds = false;        // max median distance <= 0.0005 r
    Rat max_median_distance;               // max over i of d_T(f(i), g(i))
    std::vector<std::uint64_t> medians;    // g(1..k), heap ids
};
GeodesicClosenessReport geodesic_closeness_check(const std::vector<std::uint64_t>& path_ids,
                                                 unsigned tree_dim, unsigned rescaling);

// Tree-replica conditions: equal source levels map to equal target levels,
// and each child's image descends from the matching immediate child of the
// parent's image.
struct ReplicaViolation {
    std::string kind;  // "level" or "branching"
    TreeVertex w;
    std::string detail;
};
struct ReplicaReport {
    bool valid = true;
    std::vector<ReplicaViolation> violations;
};
ReplicaReport replica_verify(const EmbeddingMap& f);

// Branch-and-bound over injective maps [k] -> ground vertices with the tree
// metric; mirrors the path-space oracle.
struct TreeSearchResult {
    std::optional<std::vector<std::uint64_t>> first;
    std::vector<std::vector<std::uint64_t>> all;
    std::uint64_t nodes = 0;
    bool capped = false;
};
TreeSearchResult tree_path_search(const std::vector<std::uint64_t>& ground_ids, unsigned tree_dim,
                                  unsigned k, const Rat& max_distortion, PathSearchOptions opts = {});

}  // namespace qramsey
