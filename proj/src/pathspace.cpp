#include "qramsey/pathspace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace qramsey {

bool PathSubset::contains(std::uint32_t v) const {
    return std::binary_search(members.begin(), members.end(), v);
}

std::optional<std::uint32_t> PathSubset::first_in(std::int64_t lo, std::int64_t hi) const {
    if (hi < lo) return std::nullopt;
    auto it = std::lower_bound(members.begin(), members.end(), (std::uint32_t)std::max<std::int64_t>(lo, 1));
    if (it == members.end() || (std::int64_t)*it > hi) return std::nullopt;
    return *it;
}

void PathSubset::validate() const {
    if (!std::is_sorted(members.begin(), members.end()) ||
        std::adjacent_find(members.begin(), members.end()) != members.end())
        throw std::invalid_argument("PathSubset: members must be strictly increasing");
    if (!members.empty() && (members.front() < 1 || members.back() > n))
        throw std::invalid_argument("PathSubset: members outside [1, n]");
}

void write_pset(std::ostream& out, const PathSubset& d) {
    out << "PSET v1\n";
    out << "N=" << d.n << "\n";
    for (std::uint32_t v : d.members) out << v << "\n";
}

PathSubset read_pset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "PSET v1") throw std::runtime_error("PSET: bad magic line");
    if (!std::getline(in, line) || line.rfind("N=", 0) != 0) throw std::runtime_error("PSET: missing N=");
    PathSubset d;
    d.n = (unsigned)std::stoul(line.substr(2));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        d.members.push_back((std::uint32_t)std::stoul(line));
    }
    d.validate();
    return d;
}

void save_pset(const std::string& path, const PathSubset& d) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    write_pset(f, d);
}

PathSubset load_pset(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    return read_pset(f);
}

// --- Cantor construction ---

std::pair<PathSubset, CantorTrace> cantor_build(unsigned n, unsigned k) {
    if (k < 5) throw std::invalid_argument("cantor_build: k >= 5 required (4/k < 1)");
    if (n < 1) throw std::invalid_argument("cantor_build: n >= 1 required");

    CantorTrace trace;
    trace.n = n;
    trace.k = k;

    std::vector<Interval> current{{1, (std::int64_t)n}};
    std::vector<bool> frozen{false};
    unsigned level = 0;
    while (true) {
        ++level;
        std::vector<Interval> next;
        std::vector<bool> next_frozen;
        CantorTrace::Level rec;
        bool any_split = false;
        for (std::size_t idx = 0; idx < current.size(); ++idx) {
            Interval iv = current[idx];
            std::int64_t len = iv.length();
            std::int64_t mid_len = (4 * len) / k;
            bool splittable = !frozen[idx] && len > 1 && mid_len >= 1 && len - mid_len >= 2;
            if (!splittable) {
                if (!frozen[idx]) {
                    std::string reason = len == 1          ? "singleton"
                                         : mid_len == 0    ? "middle removal would be empty"
                                                           : "split would leave an empty child";
                    trace.leaves.push_back({iv, reason});
                }
                next.push_back(iv);
                next_frozen.push_back(true);
                continue;
            }
            any_split = true;
            std::int64_t keep = len - mid_len;
            std::int64_t left_len = (keep + 1) / 2;
            Interval left{iv.lo, iv.lo + left_len - 1};
            Interval removed{iv.lo + left_len, iv.lo + left_len + mid_len - 1};
            Interval right{removed.hi + 1, iv.hi};
            rec.removals.push_back({iv, removed, left, right});
            next.push_back(left);
            next.push_back(right);
            next_frozen.push_back(false);
            next_frozen.push_back(false);
        }
        if (!any_split) break;
        current = std::move(next);
        frozen = std::move(next_frozen);
        rec.intervals = current;
        rec.surviving = 0;
        rec.max_diameter = 0;
        for (const Interval& iv : current) {
            rec.surviving += iv.length();
            rec.max_diameter = std::max(rec.max_diameter, iv.hi - iv.lo);
        }
        rec.diameter_bound = std::pow(2.0 / 3.0, (double)level) * n;
        trace.levels.push_back(std::move(rec));
    }

    PathSubset d;
    d.n = n;
    for (const Interval& iv : current)
        for (std::int64_t v = iv.lo; v <= iv.hi; ++v) d.members.push_back((std::uint32_t)v);
    std::sort(d.members.begin(), d.members.end());
    d.validate();
    return {std::move(d), std::move(trace)};
}

std::string CantorTrace::to_json() const {
    std::ostringstream out;
    auto iv_json = [](const Interval& iv) {
        return "[" + std::to_string(iv.lo) + "," + std::to_string(iv.hi) + "]";
    };
    out << "{\"n\":" << n << ",\"k\":" << k << ",\"levels\":[";
    for (std::size_t m = 0; m < levels.size(); ++m) {
        const Level& lv = levels[m];
        out << (m ? "," : "") << "{\"surviving\":" << lv.surviving
            << ",\"max_diameter\":" << lv.max_diameter << ",\"diameter_bound\":" << lv.diameter_bound
            << ",\"intervals\":[";
        for (std::size_t i = 0; i < lv.intervals.size(); ++i)
            out << (i ? "," : "") << iv_json(lv.intervals[i]);
        out << "],\"removed\":[";
        for (std::size_t i = 0; i < lv.removals.size(); ++i)
            out << (i ? "," : "") << iv_json(lv.removals[i].removed);
        out << "]}";
    }
    out << "],\"leaves\":[";
    for (std::size_t i = 0; i < leaves.size(); ++i)
        out << (i ? "," : "") << "{\"interval\":" << iv_json(leaves[i].interval) << ",\"reason\":\""
            << leaves[i].reason << "\"}";
    out << "]}";
    return out.str();
}

// --- porosity embedding ---

PorosityResult porosity_embed(const PathSubset& d, unsigned k, const Rat& eps) {
    if (k < 2) throw std::invalid_argument("porosity_embed: k >= 2 required");
    if (!(eps > 0) || eps > 1) throw std::invalid_argument("porosity_embed: eps outside (0, 1]");
    d.validate();

    PorosityResult res;

    std::function<bool(Interval, unsigned)> process = [&](Interval iv, unsigned depth) -> bool {
        std::int64_t len = iv.length();
        if (len <= 0) return false;
        if (res.depth_lengths.size() <= depth) res.depth_lengths.resize(depth + 1, 0);
        res.depth_lengths[depth] += len;

        if (len < (std::int64_t)k) {
            res.leaves.push_back({iv, "fewer than k points"});
            return false;
        }
        std::int64_t spacing = len / (3 * (std::int64_t)k);
        if (spacing < 1) {
            res.leaves.push_back({iv, "equidistant points collide (interval shorter than 3k)"});
            return false;
        }
        std::int64_t rho = (std::int64_t)rat_floor(eps * len / (18 * (std::int64_t)k));

        std::vector<std::int64_t> centers(k);
        for (unsigned i = 1; i <= k; ++i) centers[i - 1] = iv.lo - 1 + len / 3 + (std::int64_t)i * spacing;

        // all target intervals meet D: pick the smallest element of each
        std::optional<unsigned> empty_index;
        std::vector<std::uint32_t> picks;
        for (unsigned i = 0; i < k; ++i) {
            auto pick = d.first_in(std::max(centers[i] - rho, iv.lo), std::min(centers[i] + rho, iv.hi));
            if (!pick) {
                empty_index = i;
                break;
            }
            picks.push_back(*pick);
        }

        if (!empty_index) {
            bool injective = std::adjacent_find(picks.begin(), picks.end()) == picks.end() &&
                             std::is_sorted(picks.begin(), picks.end());
            if (injective) {
                EmbeddingMap f;
                f.source = FiniteMetric::path(k);
                f.target = FiniteMetric::path(d.n);
                for (std::uint32_t v : picks) f.images.push_back(v - 1);
                DistortionReport rep = distortion(f);
                if (rep.distortion <= Rat(1) + eps) {
                    res.map = std::move(f);
                    return true;
                }
            }
            res.leaves.push_back({iv, "selection failed the distortion check (rounding-scale interval)"});
            return false;
        }

        unsigned i = *empty_index;
        Interval empty{std::max(centers[i] - rho, iv.lo), std::min(centers[i] + rho, iv.hi)};
        res.gaps.push_back({iv, i + 1, empty});
        Interval left{iv.lo, empty.lo - 1};
        Interval right{empty.hi + 1, iv.hi};
        if (process(left, depth + 1)) return true;  // leftmost success preferred
        return process(right, depth + 1);
    };

    process({1, (std::int64_t)d.n}, 0);
    return res;
}

// --- branch-and-bound oracle ---

PathSearchResult path_distortion_search(const std::vector<std::uint32_t>& ground, unsigned k,
                                        const Rat& max_distortion, PathSearchOptions opts) {
    if (k < 2) throw std::invalid_argument("path_distortion_search: k >= 2 required");
    PathSearchResult res;
    if (ground.size() < k) return res;

    std::vector<std::uint32_t> chosen(k, 0);
    std::vector<bool> used(ground.size(), false);

    // incremental ratio window: ratios d_target/d_source over assigned pairs
    std::function<bool(unsigned, Rat, Rat)> descend = [&](unsigned depth, Rat lo, Rat hi) -> bool {
        for (std::size_t gi = 0; gi < ground.size(); ++gi) {
            if (used[gi]) continue;
            if (++res.nodes > opts.node_cap) {
                res.capped = true;
                return true;  // unwind
            }
            std::uint32_t v = ground[gi];
            Rat nlo = lo, nhi = hi;
            bool ok = true;
            for (unsigned p = 0; p < depth && ok; ++p) {
                std::int64_t dt = (std::int64_t)v - (std::int64_t)chosen[p];
                if (dt < 0) dt = -dt;
                if (dt == 0) {
                    ok = false;
                    break;
                }
                Rat ratio{BigInt(dt), BigInt(depth - p)};
                if (ratio < nlo) nlo = ratio;
                if (ratio > nhi) nhi = ratio;
                ok = nhi <= max_distortion * nlo;
            }
            if (!ok) continue;
            chosen[depth] = v;
            if (depth + 1 == k) {
                if (!res.first) res.first = chosen;
                if (opts.enumerate) {
                    if (res.all.size() < opts.enumerate_cap) res.all.push_back(chosen);
                    if (res.all.size() >= opts.enumerate_cap) {
                        res.capped = true;
                        return true;
                    }
                } else {
                    return true;
                }
            } else {
                used[gi] = true;
                bool stop = descend(depth + 1, nlo, nhi);
                used[gi] = false;
                if (stop) return true;
            }
        }
        return false;
    };

    Rat inf_hi(0);
    Rat inf_lo(BigInt(1) << 62);
    descend(0, inf_lo, inf_hi);
    return res;
}

PathSearchResult path_distortion_search(const PathSubset& d, unsigned k, const Rat& max_distortion,
                                        PathSearchOptions opts) {
    return path_distortion_search(d.members, k, max_distortion, opts);
}

Rat path_map_distortion(const std::vector<std::uint32_t>& values) {
    if (values.size() < 2) throw std::invalid_argument("path_map_distortion: need at least 2 values");
    Rat expansion = 0;
    Rat contraction = 0;
    for (std::size_t i = 0; i < values.size(); ++i)
        for (std::size_t j = i + 1; j < values.size(); ++j) {
            std::int64_t dt = (std::int64_t)values[j] - (std::int64_t)values[i];
            if (dt < 0) dt = -dt;
            if (dt == 0) throw std::invalid_argument("path_map_distortion: values collide");
            Rat up{BigInt(dt), BigInt(j - i)};
            Rat down{BigInt(j - i), BigInt(dt)};
            expansion = std::max(expansion, up);
            contraction = std::max(contraction, down);
        }
    return expansion * contraction;
}

}  // namespace qramsey
