#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qramsey/rational.hpp"

namespace qramsey {

// Shannon binary entropy, log base 2; h(0) = h(1) = 0 by convention.
double entropy(double p);
// inverse on [0, 1/2], bisection to 1e-12
double entropy_inverse(double y);

// Harper-style guaranteed inflation: the largest r with |Ball(r)| <= start
// is found exactly, and |Ball(r + floor(eps3 N))| is returned.
BigInt ball_size(unsigned n, unsigned radius);  // sum_{s<=radius} C(n, s)
BigInt harper_inflation(unsigned n, const BigInt& start_card, const Rat& eps3);

// An explicit map Q_k -> R^m given by rational coordinates, tested against
// the Enflo type-p inequality: sum over antipodal pairs of d^p vs sum over
// edges of d^p. Antipodal pairs are unordered (2^{k-1} of them).
struct EnfloWitness {
    unsigned k = 0;
    std::vector<std::vector<Rat>> images;  // 2^k vectors
    double p = 2.0;
};

struct EnfloReport {
    double diagonal_sum = 0;
    double edge_sum = 0;
    double ratio = 0;             // diagonal / edge
    double implied_type_const = 0;  // (diagonal/edge)^{1/p}, a lower witness for T_p
    bool exact = false;           // p == 2 path: sums computed as exact rationals
    Rat diagonal_exact;
    Rat edge_exact;
};
EnfloReport enflo_check(const EnfloWitness& witness);

// distortion >= k^{1 - 1/p} / T_p
double distortion_lower_bound(unsigned k, double p, double t_p);

// Configured stand-ins for the universal constants; the defaults are
// validated by numeric sweep, not taken from any closed form.
struct BoundChainConfig {
    double C = 1.0;        // eps3 = C sqrt(gamma); must keep h(1/2 - C sqrt(gamma)) < 1 - gamma
    double c = 1.0;        // regime: N >= c gamma^{-3/2}
    double c_prime = 1.0;  // scale of the final lower bound
};

struct BoundChainReport {
    bool regime_ok = false;          // N >= c gamma^{-3/2}
    bool entropy_margin_ok = false;  // h(1/2 - eps3) < 1 - gamma
    bool density_ok = false;         // h^{-1}(1 - gamma) + eps3 > 1/2 (inflation crosses half density)
    double eps3 = 0;
    unsigned k = 0;                  // ceil(1/(36 eps3))
    double eps3_used = 0;            // 1/(36k)
    double entropy_at_shift = 0;     // h(1/2 - eps3)
    double p_ball = 0;               // h^{-1}(1 - gamma)
    double lower_bound = 0;          // c' T_p^{-1} gamma^{-(1/2)(1 - 1/p)}
    double alt_exponent = 0;         // density exponent shape 2p/(p-1), the companion algebraic form
    std::string failure;             // first inequality that failed, empty when all hold

    std::string to_json() const;
};
BoundChainReport bound_chain(double gamma, double n_dim, double p, double t_p,
                                BoundChainConfig config = {});

}  // namespace qramsey
