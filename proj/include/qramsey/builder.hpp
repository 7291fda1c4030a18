#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qramsey/cube.hpp"
#include "qramsey/embedding.hpp"
#include "qramsey/metric.hpp"

namespace qramsey {

enum class Policy { Require, BestEffort };

// Pair of events with (argmax) intersection measure. `guaranteed` records
// whether the preconditions held (average measure >= delta, m > 2/delta), in
// which case the measure provably exceeds delta^2 / 2.
struct PairSelection {
    std::size_t i = 0;
    std::size_t j = 0;
    Rat measure;
    bool guaranteed = false;
};

// Lexicographically-first argmax pair over all unordered event pairs.
// Policy::Require errors when a precondition fails, naming it.
PairSelection best_intersecting_pair(const std::vector<CubeSubset>& events, const Rat& delta,
                                     Policy policy = Policy::Require);

// One inductive step over Q_block_dim x Q_rest: restrict to the middle
// layers, maximize layer average, maximize star average over (j-1)-sets,
// then take the best intersecting pair inside the star.
struct InductiveStepResult {
    CubePoint x0, x1;        // same layer, distance exactly 2
    CubeSubset rest;         // section(D, x0) intersect section(D, x1)
    Rat density_before;
    Rat density_after;
    unsigned layer = 0;      // chosen layer j
    std::uint64_t star = 0;  // chosen (j-1)-set, coordinate mask
};
InductiveStepResult inductive_step(const CubeSubset& d, unsigned block_dim, const Rat& delta,
                                   Policy policy = Policy::Require);

// gamma(delta) = max{8 ln(4/delta), 8/delta}, integerized by ceiling
unsigned gamma_dim(const Rat& delta);

// log2 of the density threshold delta_k = (2^k W(eps1, n))^{1/2^{k-1}} above
// which the greedy block-copy recursion is guaranteed to go through
double log2_delta_k(unsigned k, const Rat& tail);
// N(k, delta) = 2 + sum_i ceil(gamma(delta_i)), delta_i = delta^{2^{i-1}} / 2^{2^{i-1}-1}
BigInt rescaling2_required_dim(unsigned k, const Rat& delta);

struct InductiveTraceStep {
    unsigned block_dim = 0;
    CubePoint x0, x1;
    Rat density_before;
    Rat density_after;
};
struct InductiveTrace {
    std::vector<InductiveTraceStep> steps;
    std::optional<CubePoint> final_tail;  // residual point completing the copy
};

std::string trace_to_jsonl(const InductiveTrace& trace);

// Iterates the inductive step k times to build an isometric copy of Q_k with
// rescaling 2. Guaranteed when N >= N(k, delta); otherwise best-effort with
// an even dimension split.
struct Rescaling2Result {
    bool success = false;
    InductiveTrace trace;
    std::optional<EmbeddingMap> map;
    std::string failure_stage;
};
Rescaling2Result build_rescaling2_copy(const CubeSubset& d, unsigned k, const Rat& delta);

struct BlockCopyOptions {
    std::uint64_t pair_enum_cap = std::uint64_t(1) << 26;  // max 4^n before sampling kicks in
    std::uint64_t sample_pairs = 1000000;                  // candidate pairs per level in sampled mode
    std::uint64_t sample_density = 2048;                   // membership samples per measure estimate
    std::uint64_t seed = 0;                                // sampled mode only
    unsigned workers = 1;
};

// Greedy constructive search for a roughly equitable block copy: at each
// level pick the shell pair (y, y') whose section-intersection V_{(y,y')}
// has maximum measure (ties: first in enumeration order) and recurse.
std::optional<BlockCopySpec> find_block_copy(const CubeSubset& d, unsigned k, const Rat& eps1,
                                             BlockCopyOptions opts = {});
std::optional<BlockCopySpec> find_block_copy(const ImplicitCubeSet& d, unsigned k, const Rat& eps1,
                                             BlockCopyOptions opts);

struct LiftParams {
    Rat eps1;
    Rat eps2;
    unsigned k = 0;
    unsigned n = 0;
    bool relax_eps_cap = false;  // permit eps > 1/4 (large-error regimes); the
                                 // two-sided bound is still verified exactly

    Rat eps() const { return Rat(9) * (eps1 + eps2 * k); }
    Rat rescale() const { return Rat(n) / 2 * (Rat(1) - eps1 - Rat(4) * eps2 * k); }
};

// Moves each concatenation X(alpha) of a block copy found in the eps2
// neighborhood to the nearest point of D (ties: smallest encoding) and
// verifies r ||a-a'|| <= ||f(a)-f(a')|| <= r (1+eps) ||a-a'|| for all pairs.
EmbeddingMap lift_block_copy(const CubeSubset& d, const BlockCopySpec& spec, const LiftParams& params);
EmbeddingMap lift_block_copy(const ImplicitCubeSet& d, const BlockCopySpec& spec, const LiftParams& params,
                             unsigned scan_radius);

// End-to-end (1+eps) embedding: splits Q_N into k blocks of n = floor(N/k)
// (fixing the most popular trailing pattern), inflates by eps2 = eps/(18k),
// finds a block copy at eps1 = eps/18, lifts it into D.
struct DriverResult {
    bool success = false;
    std::optional<EmbeddingMap> map;  // into the original Q_N
    std::string failure_stage;
    std::uint64_t suffix = 0;      // fixed trailing coordinate pattern
    unsigned suffix_bits = 0;
    Rat restricted_density;
    Rat inflated_density;
    std::optional<BlockCopySpec> spec;
    LiftParams params;
};
DriverResult embed_cube_driver(const CubeSubset& d, unsigned k, const Rat& eps, const Rat& delta,
                               BlockCopyOptions opts = {});

}  // namespace qramsey
