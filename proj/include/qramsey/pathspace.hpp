#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qramsey/metric.hpp"
#include "qramsey/rational.hpp"

namespace qramsey {

// D c= [n] = {1, ..., n}, members strictly increasing.
struct PathSubset {
    unsigned n = 0;
    std::vector<std::uint32_t> members;

    Rat measure() const { return Rat(BigInt(members.size()), BigInt(n)); }
    bool contains(std::uint32_t v) const;
    // smallest member in [lo, hi], if any
    std::optional<std::uint32_t> first_in(std::int64_t lo, std::int64_t hi) const;
    void validate() const;
};

// --- PSET v1 ---
void write_pset(std::ostream& out, const PathSubset& d);
PathSubset read_pset(std::istream& in);
void save_pset(const std::string& path, const PathSubset& d);
PathSubset load_pset(const std::string& path);

struct Interval {
    std::int64_t lo = 0;
    std::int64_t hi = -1;  // closed; empty when hi < lo
    std::int64_t length() const { return hi < lo ? 0 : hi - lo + 1; }
    bool operator==(const Interval& o) const { return lo == o.lo && hi == o.hi; }
};

// Full recursion record of the middle-interval removal. Leaves stop when the
// interval is a singleton, the middle removal would be empty, or a split
// would leave an empty child.
struct CantorTrace {
    unsigned n = 0;
    unsigned k = 0;

    struct Removal {
        Interval parent;
        Interval removed;   // length floor(4 |parent| / k)
        Interval left;
        Interval right;
    };
    struct Level {
        std::vector<Interval> intervals;  // surviving intervals after this round
        std::vector<Removal> removals;    // splits performed this round
        std::int64_t surviving = 0;       // |U_m|
        double diameter_bound = 0;        // (2/3)^m * n
        std::int64_t max_diameter = 0;    // observed; slack = max(0, diam - bound)
    };
    std::vector<Level> levels;

    struct Leaf {
        Interval interval;
        std::string reason;
    };
    std::vector<Leaf> leaves;

    std::string to_json() const;
};

// Middle-interval Cantor construction; density recorded exactly.
std::pair<PathSubset, CantorTrace> cantor_build(unsigned n, unsigned k);

// Porosity-based (1+eps) embedding search. On success, `map` holds a
// verified (1+eps)-bi-Lipschitz f : [k] -> [n]; otherwise `gaps` is the
// recursion tree of certified-empty intervals.
struct PorosityGap {
    Interval ambient;   // interval being processed
    unsigned index;     // which p_i was empty (1-based)
    Interval empty;     // the certified-empty I_i
};
struct PorosityLeaf {
    Interval interval;
    std::string reason;
};
struct PorosityResult {
    std::optional<EmbeddingMap> map;
    std::vector<PorosityGap> gaps;
    std::vector<PorosityLeaf> leaves;
    // surviving length per recursion depth; the per-step shrink factor is
    // measured from this rather than assumed
    std::vector<std::int64_t> depth_lengths;
};
PorosityResult porosity_embed(const PathSubset& d, unsigned k, const Rat& eps);

// Exact branch-and-bound oracle over injective maps [k] -> ground set.
struct PathSearchOptions {
    std::uint64_t node_cap = 50000000;
    std::uint64_t enumerate_cap = 1000000;  // max maps collected in enumerate mode
    bool enumerate = false;
};
struct PathSearchResult {
    std::optional<std::vector<std::uint32_t>> first;      // f(1..k) as path values
    std::vector<std::vector<std::uint32_t>> all;          // enumerate mode
    std::uint64_t nodes = 0;
    bool capped = false;  // node budget exhausted; result inconclusive
};
PathSearchResult path_distortion_search(const std::vector<std::uint32_t>& ground, unsigned k,
                                        const Rat& max_distortion, PathSearchOptions opts = {});
PathSearchResult path_distortion_search(const PathSubset& d, unsigned k, const Rat& max_distortion,
                                        PathSearchOptions opts = {});

// Exact distortion of an explicit integer tuple viewed as f : [k] -> [N].
Rat path_map_distortion(const std::vector<std::uint32_t>& values);

}  // namespace qramsey
