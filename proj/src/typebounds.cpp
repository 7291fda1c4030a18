#include "qramsey/typebounds.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qramsey/cube.hpp"

namespace qramsey {

double entropy(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("entropy: p outside [0,1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double entropy_inverse(double y) {
    if (y < 0.0 || y > 1.0) throw std::invalid_argument("entropy_inverse: y outside [0,1]");
    double lo = 0.0, hi = 0.5;
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        if (entropy(mid) < y)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

BigInt ball_size(unsigned n, unsigned radius) {
    const TailTable& t = tail_table(n);
    return t.cumulative[std::min(radius, n)];
}

BigInt harper_inflation(unsigned n, const BigInt& start_card, const Rat& eps3) {
    if (start_card < 1 || start_card > pow2(n))
        throw std::invalid_argument("harper_inflation: start cardinality outside [1, 2^n]");
    if (eps3 < 0 || eps3 > 1) throw std::invalid_argument("harper_inflation: eps3 outside [0,1]");
    unsigned r = 0;
    while (r < n && ball_size(n, r + 1) <= start_card) ++r;
    if (ball_size(n, r) > start_card)
        throw std::invalid_argument("harper_inflation: start below |Ball(0)| = 1");  // unreachable
    unsigned grow = (unsigned)rat_floor(eps3 * n);
    return ball_size(n, std::min(n, r + grow));
}

EnfloReport enflo_check(const EnfloWitness& w) {
    std::uint64_t m = std::uint64_t(1) << w.k;
    if (w.images.size() != m) throw std::invalid_argument("enflo_check: need an image for every vertex");
    std::size_t dims = w.images.empty() ? 0 : w.images[0].size();
    for (const auto& v : w.images)
        if (v.size() != dims) throw std::invalid_argument("enflo_check: image dimensions disagree");

    auto sq_dist = [&](std::uint64_t a, std::uint64_t b) {
        Rat s = 0;
        for (std::size_t i = 0; i < dims; ++i) {
            Rat d = w.images[a][i] - w.images[b][i];
            s += d * d;
        }
        return s;
    };

    EnfloReport rep;
    std::uint64_t full = m - 1;
    bool exact2 = w.p == 2.0;
    Rat diag_exact = 0, edge_exact = 0;
    double diag = 0, edge = 0;
    for (std::uint64_t a = 0; a < m; ++a) {
        std::uint64_t anti = a ^ full;
        if (a < anti) {  // unordered antipodal pairs, 2^{k-1} of them
            Rat s = sq_dist(a, anti);
            if (exact2)
                diag_exact += s;
            else
                diag += std::pow(to_double(s), w.p / 2.0);
        }
        for (unsigned i = 0; i < w.k; ++i) {
            std::uint64_t b = a ^ (std::uint64_t(1) << i);
            if (a < b) {  // each edge once
                Rat s = sq_dist(a, b);
                if (exact2)
                    edge_exact += s;
                else
                    edge += std::pow(to_double(s), w.p / 2.0);
            }
        }
    }
    if (exact2) {
        rep.exact = true;
        rep.diagonal_exact = diag_exact;
        rep.edge_exact = edge_exact;
        rep.diagonal_sum = to_double(diag_exact);
        rep.edge_sum = to_double(edge_exact);
    } else {
        rep.diagonal_sum = diag;
        rep.edge_sum = edge;
    }
    rep.ratio = rep.edge_sum == 0 ? 0 : rep.diagonal_sum / rep.edge_sum;
    rep.implied_type_const = rep.ratio <= 0 ? 0 : std::pow(rep.ratio, 1.0 / w.p);
    return rep;
}

double distortion_lower_bound(unsigned k, double p, double t_p) {
    if (k < 1) throw std::invalid_argument("distortion_lower_bound: k >= 1 required");
    if (p <= 1.0) throw std::invalid_argument("distortion_lower_bound: p > 1 required");
    if (t_p <= 0.0) throw std::invalid_argument("distortion_lower_bound: T_p > 0 required");
    return std::pow((double)k, 1.0 - 1.0 / p) / t_p;
}

BoundChainReport bound_chain(double gamma, double n_dim, double p, double t_p,
                                BoundChainConfig config) {
    if (gamma <= 0.0 || gamma >= 1.0) throw std::invalid_argument("bound_chain: gamma outside (0,1)");
    if (p <= 1.0) throw std::invalid_argument("bound_chain: p > 1 required");
    if (t_p <= 0.0) throw std::invalid_argument("bound_chain: T_p > 0 required");

    BoundChainReport rep;
    rep.eps3 = config.C * std::sqrt(gamma);
    rep.regime_ok = n_dim >= config.c * std::pow(gamma, -1.5);
    if (!rep.regime_ok) rep.failure = "N below c gamma^{-3/2}";

    double shift = 0.5 - rep.eps3;
    if (shift <= 0.0) {
        // gamma close to 1: the entropy shift leaves [0, 1/2] and the chain
        // degenerates before the margin can be tested
        rep.entropy_at_shift = 0.0;
        rep.entropy_margin_ok = false;
        if (rep.failure.empty()) rep.failure = "C sqrt(gamma) >= 1/2: entropy shift degenerates";
    } else {
        rep.entropy_at_shift = entropy(shift);
        rep.entropy_margin_ok = rep.entropy_at_shift < 1.0 - gamma;
        if (rep.failure.empty() && !rep.entropy_margin_ok)
            rep.failure = "h(1/2 - C sqrt(gamma)) >= 1 - gamma";
    }

    rep.k = (unsigned)std::ceil(1.0 / (36.0 * rep.eps3));
    if (rep.k < 1) rep.k = 1;
    rep.eps3_used = 1.0 / (36.0 * rep.k);

    rep.p_ball = entropy_inverse(1.0 - gamma);
    rep.density_ok = rep.p_ball + rep.eps3 > 0.5;
    if (rep.failure.empty() && !rep.density_ok) rep.failure = "inflation does not reach half density";

    rep.lower_bound = config.c_prime / t_p * std::pow(gamma, -0.5 * (1.0 - 1.0 / p));
    rep.alt_exponent = 2.0 * p / (p - 1.0);
    return rep;
}

std::string BoundChainReport::to_json() const {
    std::ostringstream out;
    out.precision(12);
    out << "{\"regime_ok\":" << (regime_ok ? "true" : "false")
        << ",\"entropy_margin_ok\":" << (entropy_margin_ok ? "true" : "false")
        << ",\"density_ok\":" << (density_ok ? "true" : "false") << ",\"eps3\":" << eps3
        << ",\"k\":" << k << ",\"eps3_used\":" << eps3_used
        << ",\"entropy_at_shift\":" << entropy_at_shift << ",\"p_ball\":" << p_ball
        << ",\"lower_bound\":" << lower_bound << ",\"alt_exponent\":" << alt_exponent
        << ",\"failure\":\"" << failure << "\"}";
    return out.str();
}

}  // namespace qramsey
