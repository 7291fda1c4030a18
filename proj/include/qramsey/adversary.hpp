#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "qramsey/cube.hpp"
#include "qramsey/embedding.hpp"

namespace qramsey {

// Reproducible Bernoulli(p) subset of Q_n; inclusion of a point depends only
// on (seed, encoding). Rejection mode resamples until the set is delta-dense
// and exhaustive search certifies no copy in the requested rescaling range.
struct RandomSetRecipe {
    unsigned n = 0;
    Rat p;
    std::uint64_t seed = 0;

    struct Rejection {
        unsigned k = 1;
        unsigned r_min = 1;
        unsigned r_max = 1;
        Rat delta;  // density floor, mu(D) >= delta
        unsigned max_attempts = 1000;
    };
    std::optional<Rejection> rejection;
};

struct SampleStats {
    unsigned attempts = 0;        // sets drawn
    BigInt forms_checked = 0;     // enumeration nodes over all attempts
};

struct SampleResult {
    std::optional<CubeSubset> set;
    SampleStats stats;
    std::string failure;  // non-empty when max_attempts exhausted
};

SampleResult sample_set(const RandomSetRecipe& recipe, unsigned workers = 1);

// P_bad = exp(-delta 2^N / 12) + (2(k+1))^N (3 delta / 2)^{2^k}, both
// summands evaluated in log space.
struct PBadReport {
    double log_first;    // natural log of the Chernoff summand
    double log_second;   // natural log of the union-bound summand
    double p_bad;        // clamped sum, +inf-safe
    bool existence_regime;  // p_bad < 1
};
PBadReport p_bad(unsigned n, unsigned k, const Rat& delta);

// Largest N passing both the 4 d p <= 1 check (p = delta^{2^k},
// d = 2^k R N^{Rk}) and the density-survival display
// N <= (2^{-k}/12R) e^{ln(1/delta)(2^k - 1)/(Rk)}; log-space arithmetic.
struct LllBudget {
    unsigned k = 0;
    unsigned R = 1;
    Rat delta;
    double log_p_event;   // ln p = 2^k ln(delta)
    double n_max_lll;     // largest N with 4 d p <= 1
    double n_max_survival;
    std::uint64_t n_max;  // floor(min of the two), 0 when no N >= 1 passes
};
LllBudget lll_certificate(unsigned k, unsigned R, const Rat& delta);

// Wraps find_copy_brute in a signed record. Status is never silently
// upgraded: a capped search reports Inconclusive.
struct NoCopyCertificate {
    enum class Status { CertifiedNone, Counterexample, Inconclusive };
    Status status = Status::Inconclusive;
    unsigned k = 0;
    unsigned r_min = 1, r_max = 1;
    BigInt forms_checked = 0;
    std::optional<UndistortedForm> counterexample;
    std::uint64_t set_hash = 0;  // FNV-1a over the QSET serialization

    std::string to_json() const;
};
NoCopyCertificate certify_no_copy(const CubeSubset& d, unsigned k, unsigned r_min, unsigned r_max,
                                  EnumerationOptions opts = {});

std::uint64_t qset_content_hash(const CubeSubset& d);

}  // namespace qramsey
