#include "qramsey/treespace.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <functional>
#include <sstream>

namespace qramsey {

std::uint64_t TreeVertex::heap_id() const {
    std::uint64_t id = 1;
    for (char c : word) id = (id << 1) | (c == '1' ? 1u : 0u);
    return id;
}

TreeVertex TreeVertex::from_heap(std::uint64_t id) {
    if (id == 0) throw std::invalid_argument("heap id 0 is invalid");
    unsigned level = tree_level(id);
    TreeVertex v;
    v.word.assign(level, '0');
    for (unsigned i = 0; i < level; ++i)
        if ((id >> (level - 1 - i)) & 1u) v.word[i] = '1';
    return v;
}

TreeVertex TreeVertex::parse(const std::string& s) {
    if (s == ".") return TreeVertex{};
    if (s.size() > 62) throw std::invalid_argument("tree word longer than the supported depth");
    for (char c : s)
        if (c != '0' && c != '1') throw std::invalid_argument("bad tree word '" + s + "'");
    return TreeVertex{s};
}

unsigned tree_level(std::uint64_t heap_id) { return 63 - std::countl_zero(heap_id); }

std::uint64_t tree_lca(std::uint64_t a, std::uint64_t b) {
    unsigned la = tree_level(a), lb = tree_level(b);
    while (la > lb) {
        a >>= 1;
        --la;
    }
    while (lb > la) {
        b >>= 1;
        --lb;
    }
    while (a != b) {
        a >>= 1;
        b >>= 1;
    }
    return a;
}

unsigned tree_distance_ids(std::uint64_t a, std::uint64_t b) {
    std::uint64_t m = tree_lca(a, b);
    return (tree_level(a) - tree_level(m)) + (tree_level(b) - tree_level(m));
}

unsigned tree_distance(const TreeVertex& a, const TreeVertex& b) {
    return tree_distance_ids(a.heap_id(), b.heap_id());
}

bool tree_is_ancestor(std::uint64_t anc, std::uint64_t v) {
    unsigned la = tree_level(anc), lv = tree_level(v);
    if (la > lv) return false;
    return (v >> (lv - la)) == anc;
}

std::uint64_t tripod_median_ids(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t m1 = tree_lca(a, b), m2 = tree_lca(a, c), m3 = tree_lca(b, c);
    std::uint64_t m = m1;
    if (tree_level(m2) > tree_level(m)) m = m2;
    if (tree_level(m3) > tree_level(m)) m = m3;
    // the median lies on all three geodesics
    if (tree_distance_ids(a, b) != tree_distance_ids(a, m) + tree_distance_ids(m, b) ||
        tree_distance_ids(a, c) != tree_distance_ids(a, m) + tree_distance_ids(m, c) ||
        tree_distance_ids(b, c) != tree_distance_ids(b, m) + tree_distance_ids(m, c))
        throw std::logic_error("tripod_median: additive identity failed");
    return m;
}

TreeVertex tripod_median(const TreeVertex& a, const TreeVertex& b, const TreeVertex& c) {
    return TreeVertex::from_heap(tripod_median_ids(a.heap_id(), b.heap_id(), c.heap_id()));
}

std::vector<std::uint64_t> tree_geodesic(std::uint64_t a, std::uint64_t b) {
    std::uint64_t m = tree_lca(a, b);
    std::vector<std::uint64_t> up;
    for (std::uint64_t v = a; v != m; v >>= 1) up.push_back(v);
    up.push_back(m);
    std::vector<std::uint64_t> down;
    for (std::uint64_t v = b; v != m; v >>= 1) down.push_back(v);
    up.insert(up.end(), down.rbegin(), down.rend());
    return up;
}

Rat TreeSubset::measure() const {
    // (1/N) sum 2^{-l(w)} = sum 2^{N-1-l(w)} / (N 2^{N-1})
    BigInt num = 0;
    for (std::uint64_t id : heap_ids) num += pow2(n - 1 - tree_level(id));
    return Rat(num, BigInt(n) * pow2(n - 1));
}

bool TreeSubset::contains(std::uint64_t id) const {
    return std::binary_search(heap_ids.begin(), heap_ids.end(), id);
}

void TreeSubset::validate() const {
    if (!std::is_sorted(heap_ids.begin(), heap_ids.end()) ||
        std::adjacent_find(heap_ids.begin(), heap_ids.end()) != heap_ids.end())
        throw std::invalid_argument("TreeSubset: heap ids must be strictly increasing");
    for (std::uint64_t id : heap_ids)
        if (id == 0 || tree_level(id) >= n)
            throw std::invalid_argument("TreeSubset: vertex outside Tree(n)");
}

bool TreeLevelSet::contains_level(unsigned l) const {
    return std::binary_search(levels.begin(), levels.end(), l);
}

TreeSubset TreeLevelSet::materialize(unsigned max_dim) const {
    if (n > max_dim) throw std::invalid_argument("TreeLevelSet: n too large to materialize");
    TreeSubset d;
    d.n = n;
    for (unsigned l : levels)
        for (std::uint64_t id = std::uint64_t(1) << l; id < (std::uint64_t(1) << (l + 1)); ++id)
            d.heap_ids.push_back(id);
    std::sort(d.heap_ids.begin(), d.heap_ids.end());
    return d;
}

std::pair<TreeLevelSet, CantorTrace> tree_level_set(unsigned n, unsigned k) {
    auto [path, trace] = cantor_build(n, k);
    TreeLevelSet set;
    set.n = n;
    for (std::uint32_t v : path.members) set.levels.push_back(v - 1);  // level l <-> integer l + 1
    return {std::move(set), std::move(trace)};
}

void write_tset(std::ostream& out, const TreeSubset& d) {
    out << "TSET v1\n";
    out << "N=" << d.n << "\n";
    for (std::uint64_t id : d.heap_ids) out << TreeVertex::from_heap(id).str() << "\n";
}

TreeSubset read_tset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "TSET v1") throw std::runtime_error("TSET: bad magic line");
    if (!std::getline(in, line) || line.rfind("N=", 0) != 0) throw std::runtime_error("TSET: missing N=");
    TreeSubset d;
    d.n = (unsigned)std::stoul(line.substr(2));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        d.heap_ids.push_back(TreeVertex::parse(line).heap_id());
    }
    std::sort(d.heap_ids.begin(), d.heap_ids.end());
    d.validate();
    return d;
}

void save_tset(const std::string& path, const TreeSubset& d) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    write_tset(f, d);
}

TreeSubset load_tset(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    return read_tset(f);
}

GeodesicClosenessReport geodesic_closeness_check(const std::vector<std::uint64_t>& path_ids,
                                                 unsigned tree_dim, unsigned rescaling) {
    unsigned k = (unsigned)path_ids.size();
    if (k < 2) throw std::invalid_argument("geodesic_closeness_check: need at least 2 points");
    if (rescaling < 1) throw std::invalid_argument("geodesic_closeness_check: rescaling >= 1 required");
    for (std::uint64_t id : path_ids)
        if (id == 0 || tree_level(id) >= tree_dim)
            throw std::invalid_argument("geodesic_closeness_check: vertex outside Tree(n)");

    // precondition: distortion <= 1.001 with the given rescaling
    Rat upper = Rat(1001, 1000) * rescaling;
    for (unsigned i = 0; i < k; ++i)
        for (unsigned j = i + 1; j < k; ++j) {
            unsigned dt = tree_distance_ids(path_ids[i], path_ids[j]);
            unsigned ds = j - i;
            if (Rat(dt) < Rat(rescaling) * ds || Rat(dt) > upper * ds)
                throw std::invalid_argument(
                    "geodesic_closeness_check: map is not a 1.001-distorted rescaled path");
        }

    GeodesicClosenessReport rep;
    rep.stated_bound = Rat(rescaling, 100);
    Rat tight = Rat(rescaling, 2000);

    std::vector<std::uint64_t> geo = tree_geodesic(path_ids.front(), path_ids.back());
    rep.max_distance_to_geodesic = 0;
    for (std::uint64_t id : path_ids) {
        unsigned best = ~0u;
        for (std::uint64_t g : geo) best = std::min(best, tree_distance_ids(id, g));
        rep.max_distance_to_geodesic = std::max(rep.max_distance_to_geodesic, Rat(best));
    }

    rep.medians.resize(k);
    rep.medians[0] = path_ids.front();
    rep.medians[k - 1] = path_ids.back();
    rep.max_median_distance = 0;
    for (unsigned i = 1; i + 1 < k; ++i) {
        rep.medians[i] = tripod_median_ids(path_ids[i - 1], path_ids[i], path_ids[i + 1]);
        Rat d = Rat(tree_distance_ids(path_ids[i], rep.medians[i]));
        rep.max_median_distance = std::max(rep.max_median_distance, d);
    }

    rep.ok = rep.max_distance_to_geodesic <= rep.stated_bound &&
             rep.max_median_distance <= rep.stated_bound;
    rep.tight_bound_holds = rep.max_median_distance <= tight;
    return rep;
}

ReplicaReport replica_verify(const EmbeddingMap& f) {
    if (f.source.kind != FiniteMetric::Kind::Tree || f.target.kind != FiniteMetric::Kind::Tree)
        throw std::invalid_argument("replica_verify: expects a tree-to-tree map");
    unsigned k = f.source.dim;
    ReplicaReport rep;

    auto image_id = [&](std::uint64_t src_heap) { return f.images[src_heap - 1] + 1; };

    // same source level -> same image level
    for (unsigned l = 0; l < k; ++l) {
        std::uint64_t first = std::uint64_t(1) << l;
        unsigned expect = tree_level(image_id(first));
        for (std::uint64_t v = first; v < (std::uint64_t(1) << (l + 1)); ++v) {
            unsigned got = tree_level(image_id(v));
            if (got != expect) {
                rep.valid = false;
                rep.violations.push_back({"level", TreeVertex::from_heap(v),
                                          "image level " + std::to_string(got) + " != " +
                                              std::to_string(expect) + " of its level class"});
            }
        }
    }

    // immediate branching: f(w0) under f(w)0, f(w1) under f(w)1
    for (std::uint64_t w = 1; w < (std::uint64_t(1) << (k - 1)); ++w) {
        std::uint64_t fw = image_id(w);
        for (unsigned bit = 0; bit <= 1; ++bit) {
            std::uint64_t child = (w << 1) | bit;
            std::uint64_t fchild = image_id(child);
            std::uint64_t want_anc = (fw << 1) | bit;
            if (tree_level(want_anc) >= f.target.dim || !tree_is_ancestor(want_anc, fchild)) {
                rep.valid = false;
                rep.violations.push_back({"branching", TreeVertex::from_heap(child),
                                          "image is not a descendant of the matching child of f(parent)"});
            }
        }
    }
    return rep;
}

TreeSearchResult tree_path_search(const std::vector<std::uint64_t>& ground_ids, unsigned tree_dim,
                                  unsigned k, const Rat& max_distortion, PathSearchOptions opts) {
    if (k < 2) throw std::invalid_argument("tree_path_search: k >= 2 required");
    for (std::uint64_t id : ground_ids)
        if (id == 0 || tree_level(id) >= tree_dim)
            throw std::invalid_argument("tree_path_search: vertex outside Tree(n)");

    TreeSearchResult res;
    if (ground_ids.size() < k) return res;

    std::vector<std::uint64_t> chosen(k, 0);
    std::vector<bool> used(ground_ids.size(), false);

    std::function<bool(unsigned, Rat, Rat)> descend = [&](unsigned depth, Rat lo, Rat hi) -> bool {
        for (std::size_t gi = 0; gi < ground_ids.size(); ++gi) {
            if (used[gi]) continue;
            if (++res.nodes > opts.node_cap) {
                res.capped = true;
                return true;
            }
            std::uint64_t v = ground_ids[gi];
            Rat nlo = lo, nhi = hi;
            bool ok = true;
            for (unsigned p = 0; p < depth && ok; ++p) {
                unsigned dt = tree_distance_ids(v, chosen[p]);
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

    descend(0, Rat(BigInt(1) << 62), Rat(0));
    return res;
}

}  // namespace qramsey
