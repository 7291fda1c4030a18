#include "qramsey/builder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "qramsey/rng.hpp"

namespace qramsey {

PairSelection best_intersecting_pair(const std::vector<CubeSubset>& events, const Rat& delta,
                                     Policy policy) {
    if (events.size() < 2) throw std::invalid_argument("best_intersecting_pair: need at least 2 events");
    Rat avg = 0;
    for (const CubeSubset& e : events) avg += e.measure();
    avg /= BigInt(events.size());

    bool pre_avg = delta > 0 && avg >= delta;
    bool pre_count = delta > 0 && Rat(BigInt(events.size())) > Rat(2) / delta;
    if (policy == Policy::Require) {
        if (!pre_avg)
            throw std::invalid_argument("best_intersecting_pair: precondition failed: average measure " +
                                        rat_str(avg) + " < delta " + rat_str(delta));
        if (!pre_count)
            throw std::invalid_argument("best_intersecting_pair: precondition failed: m = " +
                                        std::to_string(events.size()) + " <= 2/delta");
    }

    PairSelection best;
    best.measure = -1;
    for (std::size_t i = 0; i < events.size(); ++i)
        for (std::size_t j = i + 1; j < events.size(); ++j) {
            Rat m = events[i].intersect(events[j]).measure();
            if (m > best.measure) best = {i, j, m, false};
        }
    best.guaranteed = pre_avg && pre_count;
    return best;
}

namespace {

}  // namespace

InductiveStepResult inductive_step(const CubeSubset& d, unsigned block_dim, const Rat& delta,
                                   Policy policy) {
    unsigned n = block_dim;
    if (n > d.dim()) throw DimensionMismatch("inductive_step: block dimension exceeds ambient dimension");
    unsigned rest = d.dim() - n;

    if (policy == Policy::Require) {
        if (!d.measure_at_least(delta))
            throw std::invalid_argument("inductive_step: mu(D) = " + rat_str(d.measure()) +
                                        " below delta = " + rat_str(delta));
        double t1 = 8.0 * std::log(4.0 / to_double(delta));
        Rat t2 = Rat(8) / delta;
        if (Rat(n) < t2 || double(n) < t1) {
            std::ostringstream msg;
            msg << "inductive_step: n = " << n << " below max{8 ln(4/delta), 8/delta} = max{" << t1
                << ", " << rat_str(t2) << "}";
            throw std::invalid_argument(msg.str());
        }
    }
    if (n > 24) throw RepresentationTooLarge("inductive_step: block dimension above 24");

    // section cardinalities over the leading block
    std::uint64_t block_mask = (std::uint64_t(1) << n) - 1;
    std::vector<std::uint32_t> sec_card(std::size_t(1) << n, 0);
    for (std::uint64_t e : d.to_points()) ++sec_card[e & block_mask];

    // middle layers: |j - n/2| < n/4, strictly
    std::vector<unsigned> layers;
    for (unsigned j = 0; j <= n; ++j)
        if (Rat(4) * (Rat(j) - Rat(n) / 2) < Rat(n) && Rat(4) * (Rat(n) / 2 - Rat(j)) < Rat(n))
            layers.push_back(j);
    if (layers.empty()) throw std::invalid_argument("inductive_step: no middle layer exists (n too small)");

    // layer maximizing average section density; ties -> smallest j
    std::vector<BigInt> layer_total(n + 1, BigInt(0));
    for (std::uint64_t x = 0; x < (std::uint64_t(1) << n); ++x)
        layer_total[__builtin_popcountll(x)] += sec_card[x];
    unsigned best_j = layers.front();
    Rat best_layer_avg = -1;
    for (unsigned j : layers) {
        Rat avg = Rat(layer_total[j], binomial(n, j) * pow2(rest));
        if (avg > best_layer_avg) {
            best_layer_avg = avg;
            best_j = j;
        }
    }

    // (j-1)-set star maximizing average section density; ties -> smallest mask
    unsigned j = best_j;
    std::unordered_map<std::uint64_t, std::uint64_t> star_sum;
    for (std::uint64_t x = 0; x < (std::uint64_t(1) << n); ++x) {
        if ((unsigned)__builtin_popcountll(x) != j || sec_card[x] == 0) continue;
        std::uint64_t rem = x;
        while (rem) {
            std::uint64_t low = rem & (~rem + 1);
            star_sum[x ^ low] += sec_card[x];
            rem ^= low;
        }
    }
    if (star_sum.empty()) {
        // no section in the chosen layer is populated; fall back to the
        // lexicographically first star so the step stays total
        std::uint64_t y0 = (std::uint64_t(1) << (j ? j - 1 : 0)) - 1;
        star_sum[y0] = 0;
    }
    std::uint64_t best_y = ~std::uint64_t(0);
    std::uint64_t best_sum = 0;
    for (const auto& [y, total] : star_sum)
        if (best_y == ~std::uint64_t(0) || total > best_sum || (total == best_sum && y < best_y)) {
            best_y = y;
            best_sum = total;
        }
    if (best_y == ~std::uint64_t(0)) throw std::logic_error("inductive_step: empty star family");

    // star members in ascending encoding order
    std::vector<std::uint64_t> star_members;
    for (unsigned c = 0; c < n; ++c) {
        std::uint64_t x = best_y | (std::uint64_t(1) << c);
        if (x != best_y && (unsigned)__builtin_popcountll(x) == j) star_members.push_back(x);
    }
    std::sort(star_members.begin(), star_members.end());

    std::vector<CubeSubset> events;
    events.reserve(star_members.size());
    for (std::uint64_t x : star_members) events.push_back(section(d, CubePoint(n, x)));
    PairSelection sel = best_intersecting_pair(events, delta / 2, Policy::BestEffort);

    InductiveStepResult out{CubePoint(n, star_members[sel.i]), CubePoint(n, star_members[sel.j]),
                            events[sel.i].intersect(events[sel.j]),
                            d.measure(), Rat(0), j, best_y};
    out.density_after = out.rest.measure();
    return out;
}

double log2_delta_k(unsigned k, const Rat& tail) {
    if (k < 1) throw std::invalid_argument("log2_delta_k: k >= 1 required");
    if (tail <= 0) return -std::numeric_limits<double>::infinity();
    double log2_tail =
        std::log2(static_cast<double>(numerator(tail))) - std::log2(static_cast<double>(denominator(tail)));
    return ((double)k + log2_tail) / std::ldexp(1.0, (int)k - 1);
}

unsigned gamma_dim(const Rat& delta) {
    if (delta <= 0 || delta > 1) throw std::invalid_argument("gamma_dim: delta outside (0,1]");
    BigInt a = rat_ceil(Rat(8) / delta);
    double b = 8.0 * std::log(4.0 / to_double(delta));
    BigInt bc = BigInt((long long)std::ceil(b));
    BigInt g = std::max(a, bc);
    return (unsigned)g;
}

BigInt rescaling2_required_dim(unsigned k, const Rat& delta) {
    BigInt total = 2;
    Rat cur = delta;
    for (unsigned i = 0; i < k; ++i) {
        total += gamma_dim(cur);
        cur = cur * cur / 2;
    }
    return total;
}

std::string trace_to_jsonl(const InductiveTrace& trace) {
    std::ostringstream out;
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& s = trace.steps[i];
        out << "{\"step\":" << (i + 1) << ",\"block_dim\":" << s.block_dim
            << ",\"x0\":\"" << s.x0.str() << "\",\"x1\":\"" << s.x1.str()
            << "\",\"density_before\":\"" << rat_str(s.density_before)
            << "\",\"density_after\":\"" << rat_str(s.density_after) << "\"}\n";
    }
    if (trace.final_tail)
        out << "{\"final_tail\":\"" << trace.final_tail->str() << "\"}\n";
    return out.str();
}

Rescaling2Result build_rescaling2_copy(const CubeSubset& d, unsigned k, const Rat& delta) {
    Rescaling2Result res;
    unsigned N = d.dim();
    if (k == 0) {
        res.failure_stage = "k must be positive";
        return res;
    }

    // dimension split: the guarantee split when N is large enough, otherwise
    // an even best-effort split
    std::vector<unsigned> dims;
    BigInt needed = rescaling2_required_dim(k, delta);
    if (BigInt(N) >= needed) {
        Rat cur = delta;
        for (unsigned i = 0; i < k; ++i) {
            dims.push_back(gamma_dim(cur));
            cur = cur * cur / 2;
        }
    } else {
        unsigned per = N / k;
        if (per < 2) {
            res.failure_stage = "dimension budget: floor(N/k) < 2";
            return res;
        }
        dims.assign(k, per);
    }

    CubeSubset current = d;
    std::vector<std::pair<CubePoint, CubePoint>> pairs;
    for (unsigned i = 0; i < k; ++i) {
        if (current.empty()) {
            res.failure_stage = "residual density hit 0 before step " + std::to_string(i + 1);
            return res;
        }
        InductiveStepResult step = inductive_step(current, dims[i], delta, Policy::BestEffort);
        res.trace.steps.push_back({dims[i], step.x0, step.x1, step.density_before, step.density_after});
        if (step.rest.empty() && i + 1 < k) {
            res.failure_stage = "residual density hit 0 at step " + std::to_string(i + 1);
            return res;
        }
        pairs.emplace_back(step.x0, step.x1);
        current = step.rest;
    }
    if (current.empty()) {
        res.failure_stage = "final residual empty";
        return res;
    }
    unsigned tail_dim = current.dim();
    std::uint64_t tail = current.to_points().front();
    res.trace.final_tail = CubePoint(tail_dim, tail);

    EmbeddingMap f;
    f.source = FiniteMetric::cube(k);
    f.target = FiniteMetric::cube(N);
    f.images.resize(std::uint64_t(1) << k);
    for (std::uint64_t alpha = 0; alpha < f.images.size(); ++alpha) {
        std::uint64_t enc = 0;
        unsigned offset = 0;
        for (unsigned i = 0; i < k; ++i) {
            std::uint64_t blk = ((alpha >> i) & 1u) ? pairs[i].second.bits : pairs[i].first.bits;
            enc |= blk << offset;
            offset += dims[i];
        }
        enc |= tail << offset;
        f.images[alpha] = enc;
    }
    res.map = std::move(f);
    res.success = true;
    return res;
}

// --- find_block_copy ---

namespace {

struct ShellInfo {
    std::vector<bool> by_weight;
    std::vector<unsigned> weights;  // qualifying weights, ascending
};

ShellInfo shell_info(unsigned n, const Rat& eps1) {
    ShellInfo s;
    s.by_weight.resize(n + 1);
    for (unsigned w = 0; w <= n; ++w) {
        s.by_weight[w] = in_central_shell(w, n, eps1);
        if (s.by_weight[w]) s.weights.push_back(w);
    }
    return s;
}

// argmax over shell pairs (y, y') of |T_y & T_y'|; deterministic merge order
struct BestPair {
    std::uint64_t count = 0;
    std::uint64_t y = 0, yp = 0;
    bool found = false;

    bool better_than(const BestPair& o) const {
        if (!o.found) return found;
        if (count != o.count) return count > o.count;
        if (y != o.y) return y < o.y;
        return yp < o.yp;
    }
};

BestPair best_pair_exact(const std::vector<DenseBits>& sections, const ShellInfo& shell,
                         unsigned n, unsigned workers) {
    std::uint64_t yn = std::uint64_t(1) << n;
    auto scan = [&](std::uint64_t lo, std::uint64_t hi) {
        BestPair best;
        for (std::uint64_t y = lo; y < hi; ++y)
            for (std::uint64_t yp = 0; yp < yn; ++yp) {
                if (!shell.by_weight[hamming_distance(y, yp)]) continue;
                std::uint64_t c = sections[y].and_count(sections[yp]);
                BestPair cand{c, y, yp, true};
                if (cand.better_than(best)) best = cand;
            }
        return best;
    };
    if (workers <= 1) return scan(0, yn);
    std::vector<BestPair> parts(workers);
    std::vector<std::thread> pool;
    std::uint64_t chunk = (yn + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            std::uint64_t lo = w * chunk, hi = std::min(yn, lo + chunk);
            if (lo < hi) parts[w] = scan(lo, hi);
        });
    for (auto& t : pool) t.join();
    BestPair best;
    for (const BestPair& p : parts)
        if (p.better_than(best)) best = p;
    return best;
}

std::optional<BlockCopySpec> find_block_copy_exact(const CubeSubset& d, unsigned k, unsigned n,
                                                   const Rat& eps1, const BlockCopyOptions& opts) {
    ShellInfo shell = shell_info(n, eps1);
    if (shell.weights.empty()) return std::nullopt;

    BlockCopySpec spec;
    spec.k = k;
    spec.n = n;
    spec.eps1 = eps1;

    CubeSubset current = d.densified();
    for (unsigned level = k; level >= 1; --level) {
        unsigned rest = (level - 1) * n;
        // sections over the trailing blocks, one bitset per leading value
        std::vector<DenseBits> sections(std::size_t(1) << n, DenseBits(std::uint64_t(1) << rest));
        const DenseBits& bits = current.dense_bits();
        std::uint64_t mask = (std::uint64_t(1) << n) - 1;
        for (std::uint64_t e = 0; e < bits.size(); ++e)
            if (bits.test(e)) sections[e & mask].set(e >> n);

        BestPair best = best_pair_exact(sections, shell, n, opts.workers);
        if (!best.found || best.count == 0) return std::nullopt;
        spec.pairs.emplace_back(best.y, best.yp);
        if (level == 1) break;
        DenseBits v = sections[best.y];
        v &= sections[best.yp];
        current = CubeSubset::from_bits(rest, std::move(v));
    }
    return spec;
}

// sampled fallback over a membership functional
std::optional<BlockCopySpec> find_block_copy_sampled(unsigned n, unsigned k,
                                                     const std::function<bool(std::uint64_t)>& member,
                                                     const Rat& eps1, const BlockCopyOptions& opts) {
    ShellInfo shell = shell_info(n, eps1);
    if (shell.weights.empty()) return std::nullopt;

    // weight sampled proportionally to C(n, w) over qualifying weights
    std::vector<std::uint64_t> cum;
    std::uint64_t total = 0;
    for (unsigned w : shell.weights) {
        BigInt c = binomial(n, w);
        if (c > BigInt(~std::uint64_t(0))) throw std::overflow_error("shell layer too large to sample");
        total += (std::uint64_t)c;
        cum.push_back(total);
    }

    BlockCopySpec spec;
    spec.k = k;
    spec.n = n;
    spec.eps1 = eps1;
    spec.sampled = true;

    std::uint64_t point_mask = n == 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << n) - 1;

    // context(x): every concatenation of the fixed pairs with tail x is a member
    auto in_context = [&](unsigned fixed, std::uint64_t x) {
        for (std::uint64_t alpha = 0; alpha < (std::uint64_t(1) << fixed); ++alpha) {
            std::uint64_t enc = 0;
            for (unsigned i = 0; i < fixed; ++i) {
                std::uint64_t blk = ((alpha >> i) & 1u) ? spec.pairs[i].second : spec.pairs[i].first;
                enc |= blk << (i * n);
            }
            enc |= x << (fixed * n);
            if (!member(enc)) return false;
        }
        return true;
    };

    CounterRng rng(opts.seed, 0x626c6f636bull);  // stream tag for pair search
    for (unsigned level = 0; level < k; ++level) {
        unsigned rest_blocks = k - level - 1;
        std::uint64_t rest_bits = std::uint64_t(rest_blocks) * n;
        std::uint64_t best_score = 0;
        std::optional<std::pair<std::uint64_t, std::uint64_t>> best;
        for (std::uint64_t trial = 0; trial < opts.sample_pairs; ++trial) {
            std::uint64_t y = rng.next_u64() & point_mask;
            // random mask of a shell weight
            std::uint64_t pick = rng.next_below(total);
            unsigned w = shell.weights[(std::size_t)(std::lower_bound(cum.begin(), cum.end(), pick + 1) -
                                                     cum.begin())];
            std::uint64_t mask = 0;
            unsigned placed = 0;
            while (placed < w) {
                unsigned c = (unsigned)rng.next_below(n);
                std::uint64_t bit = std::uint64_t(1) << c;
                if (!(mask & bit)) {
                    mask |= bit;
                    ++placed;
                }
            }
            std::uint64_t yp = y ^ mask;

            if (rest_blocks == 0) {
                // final level: need both endpoints in the current context
                spec.pairs.emplace_back(y, yp);
                bool ok = true;
                for (std::uint64_t alpha = 0; alpha < (std::uint64_t(1) << (level + 1)) && ok; ++alpha) {
                    std::uint64_t enc = 0;
                    for (unsigned i = 0; i <= level; ++i) {
                        std::uint64_t blk = ((alpha >> i) & 1u) ? spec.pairs[i].second : spec.pairs[i].first;
                        enc |= blk << (i * n);
                    }
                    ok = member(enc);
                }
                spec.pairs.pop_back();
                if (ok) {
                    best = {y, yp};
                    break;
                }
                continue;
            }
            // estimate |V_{(y,y')}| by sampling tails
            std::uint64_t rest_mask = rest_bits == 64 ? ~std::uint64_t(0)
                                                      : (std::uint64_t(1) << rest_bits) - 1;
            std::uint64_t hits = 0;
            for (std::uint64_t s = 0; s < opts.sample_density; ++s) {
                std::uint64_t x = rng.next_u64() & rest_mask;
                if (in_context(level, y | (x << n)) && in_context(level, yp | (x << n))) ++hits;
            }
            if (hits > best_score || (!best && hits > 0)) {
                best_score = hits;
                best = {y, yp};
            }
        }
        if (!best) return std::nullopt;
        spec.pairs.push_back(*best);
    }

    // soundness: verify every concatenation by direct membership
    for (std::uint64_t alpha = 0; alpha < (std::uint64_t(1) << k); ++alpha)
        if (!member(spec.concatenation(alpha))) return std::nullopt;
    return spec;
}

}  // namespace

std::optional<BlockCopySpec> find_block_copy(const CubeSubset& d, unsigned k, const Rat& eps1,
                                             BlockCopyOptions opts) {
    if (k < 1) throw std::invalid_argument("find_block_copy: k >= 1 required");
    if (d.dim() % k != 0) throw DimensionMismatch("find_block_copy: dimension not divisible by k");
    unsigned n = d.dim() / k;
    if (k > n) throw std::invalid_argument("find_block_copy: k <= n required");

    bool exact_feasible = n <= 31 && d.dim() <= cube_limits().dense_limit &&
                          (std::uint64_t(1) << (2 * std::min(n, 31u))) <= opts.pair_enum_cap;
    std::optional<BlockCopySpec> spec;
    if (exact_feasible) {
        spec = find_block_copy_exact(d, k, n, eps1, opts);
    } else {
        auto member = [&d](std::uint64_t e) { return d.contains(e); };
        spec = find_block_copy_sampled(n, k, member, eps1, opts);
    }
    if (spec) {
        for (std::uint64_t alpha = 0; alpha < (std::uint64_t(1) << k); ++alpha)
            if (!d.contains(spec->concatenation(alpha)))
                throw std::logic_error("find_block_copy: emitted concatenation escapes D");
        spec->validate();
    }
    return spec;
}

std::optional<BlockCopySpec> find_block_copy(const ImplicitCubeSet& d, unsigned k, const Rat& eps1,
                                             BlockCopyOptions opts) {
    if (k < 1) throw std::invalid_argument("find_block_copy: k >= 1 required");
    if (d.n % k != 0) throw DimensionMismatch("find_block_copy: dimension not divisible by k");
    unsigned n = d.n / k;
    auto spec = find_block_copy_sampled(n, k, d.member, eps1, opts);
    if (spec) spec->validate();
    return spec;
}

// --- lift_block_copy ---

namespace {

EmbeddingMap lift_common(unsigned kn, const BlockCopySpec& spec, const LiftParams& params,
                         const std::function<std::pair<std::uint64_t, std::uint64_t>(std::uint64_t)>& nearest) {
    if (params.k != spec.k || params.n != spec.n)
        throw std::invalid_argument("lift_block_copy: params disagree with spec dimensions");
    Rat eps = params.eps();
    if (!params.relax_eps_cap && eps > Rat(1, 4))
        throw std::invalid_argument("lift_block_copy: eps = " + rat_str(eps) + " exceeds 1/4");
    Rat r = params.rescale();
    if (r <= 0) throw std::invalid_argument("lift_block_copy: rescaling factor is not positive");

    BigInt radius = rat_floor(params.eps2 * kn);

    EmbeddingMap f;
    f.source = FiniteMetric::cube(spec.k);
    f.target = FiniteMetric::cube(kn);
    f.images.resize(std::uint64_t(1) << spec.k);
    for (std::uint64_t alpha = 0; alpha < f.images.size(); ++alpha) {
        auto [point, dist] = nearest(spec.concatenation(alpha));
        if (BigInt(dist) > radius)
            throw std::invalid_argument(
                "lift_block_copy: concatenation outside the eps2 neighborhood of D (distance " +
                std::to_string(dist) + ")");
        f.images[alpha] = point;
    }

    // exact two-sided verification; a violation here is a parameter
    // bookkeeping bug, never a data condition
    for (std::uint64_t a = 0; a < f.images.size(); ++a)
        for (std::uint64_t ap = a + 1; ap < f.images.size(); ++ap) {
            unsigned ds = hamming_distance(a, ap);
            unsigned dt = hamming_distance(f.images[a], f.images[ap]);
            if (Rat(dt) < r * ds || Rat(dt) > r * (Rat(1) + eps) * ds)
                throw std::logic_error("lift_block_copy: two-sided bound violated internally");
        }
    return f;
}

}  // namespace

EmbeddingMap lift_block_copy(const CubeSubset& d, const BlockCopySpec& spec, const LiftParams& params) {
    if (d.empty()) throw std::invalid_argument("lift_block_copy: D is empty");
    std::vector<std::uint64_t> pts = d.to_points();
    auto nearest = [&pts](std::uint64_t x) {
        std::uint64_t best = pts.front();
        unsigned best_d = hamming_distance(pts.front(), x);
        for (std::uint64_t p : pts) {
            unsigned dd = hamming_distance(p, x);
            if (dd < best_d || (dd == best_d && p < best)) {
                best_d = dd;
                best = p;
            }
        }
        return std::make_pair(best, std::uint64_t(best_d));
    };
    return lift_common(d.dim(), spec, params, nearest);
}

EmbeddingMap lift_block_copy(const ImplicitCubeSet& d, const BlockCopySpec& spec, const LiftParams& params,
                             unsigned scan_radius) {
    unsigned kn = d.n;
    auto member = d.member;
    auto nearest = [member, kn, scan_radius](std::uint64_t x) {
        if (member(x)) return std::make_pair(x, std::uint64_t(0));
        if (scan_radius >= 1) {
            std::uint64_t best = ~std::uint64_t(0);
            for (unsigned i = 0; i < kn; ++i) {
                std::uint64_t cand = x ^ (std::uint64_t(1) << i);
                if (member(cand) && cand < best) best = cand;
            }
            if (best != ~std::uint64_t(0)) return std::make_pair(best, std::uint64_t(1));
        }
        if (scan_radius >= 2) {
            std::uint64_t best = ~std::uint64_t(0);
            for (unsigned i = 0; i + 1 < kn; ++i)
                for (unsigned j = i + 1; j < kn; ++j) {
                    std::uint64_t cand = x ^ (std::uint64_t(1) << i) ^ (std::uint64_t(1) << j);
                    if (member(cand) && cand < best) best = cand;
                }
            if (best != ~std::uint64_t(0)) return std::make_pair(best, std::uint64_t(2));
        }
        return std::make_pair(~std::uint64_t(0), std::uint64_t(~0u));
    };
    return lift_common(kn, spec, params, nearest);
}

DriverResult embed_cube_driver(const CubeSubset& d, unsigned k, const Rat& eps, const Rat& delta,
                               BlockCopyOptions opts) {
    DriverResult res;
    if (!(eps > 0) || eps > Rat(1, 4))
        throw std::invalid_argument("embed_cube_driver: eps outside (0, 1/4]");
    if (!d.measure_exceeds(delta))
        throw std::invalid_argument("embed_cube_driver: mu(D) = " + rat_str(d.measure()) +
                                    " does not exceed delta = " + rat_str(delta));
    unsigned N = d.dim();
    if (k < 1 || N / k < 1) throw std::invalid_argument("embed_cube_driver: k out of range");

    unsigned n = N / k;
    unsigned nk = n * k;
    res.suffix_bits = N - nk;
    res.params = LiftParams{eps / 18, eps / (18 * (long)k), k, n, false};

    // fix the most popular trailing pattern (ties: smallest encoding)
    CubeSubset restricted = CubeSubset::empty_sparse(nk);
    if (res.suffix_bits == 0) {
        restricted = d;
    } else {
        std::vector<std::uint64_t> counts(std::size_t(1) << res.suffix_bits, 0);
        for (std::uint64_t e : d.to_points()) ++counts[e >> nk];
        std::uint64_t best = 0;
        for (std::uint64_t s = 1; s < counts.size(); ++s)
            if (counts[s] > counts[best]) best = s;
        res.suffix = best;
        std::vector<std::uint64_t> pts;
        std::uint64_t low_mask = (std::uint64_t(1) << nk) - 1;
        for (std::uint64_t e : d.to_points())
            if ((e >> nk) == best) pts.push_back(e & low_mask);
        restricted = CubeSubset::from_points(nk, std::move(pts)).densified();
    }
    res.restricted_density = restricted.measure();
    if (restricted.empty()) {
        res.failure_stage = "restriction: empty slice";
        return res;
    }

    CubeSubset inflated = epsilon_neighborhood(restricted, res.params.eps2);
    res.inflated_density = inflated.measure();

    std::optional<BlockCopySpec> spec = find_block_copy(inflated, k, res.params.eps1, opts);
    if (!spec) {
        res.failure_stage = "find_block_copy: no roughly equitable block copy in the inflated set";
        return res;
    }
    res.spec = spec;

    EmbeddingMap lifted = lift_block_copy(restricted, *spec, res.params);

    // re-attach the fixed suffix so the image lives in the original Q_N
    EmbeddingMap f;
    f.source = FiniteMetric::cube(k);
    f.target = FiniteMetric::cube(N);
    f.images.resize(lifted.images.size());
    for (std::size_t i = 0; i < lifted.images.size(); ++i)
        f.images[i] = lifted.images[i] | (res.suffix << nk);

    for (std::uint64_t alpha = 0; alpha < f.images.size(); ++alpha)
        if (!d.contains(f.images[alpha])) throw std::logic_error("embed_cube_driver: image escapes D");

    DistortionReport rep = distortion(f);
    if (rep.distortion > Rat(1) + eps)
        throw std::logic_error("embed_cube_driver: distortion bound violated after lift");

    res.map = std::move(f);
    res.success = true;
    return res;
}

}  // namespace qramsey
