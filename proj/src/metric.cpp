#include "qramsey/metric.hpp"

#include <bit>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "qramsey/cube.hpp"

namespace qramsey {

namespace {

unsigned heap_level(std::uint64_t heap_id) { return 63 - std::countl_zero(heap_id); }

// tree distance between heap ids via longest common prefix of root paths
std::uint64_t tree_dist(std::uint64_t a, std::uint64_t b) {
    unsigned la = heap_level(a), lb = heap_level(b);
    std::uint64_t x = a, y = b;
    unsigned lx = la, ly = lb;
    while (lx > ly) {
        x >>= 1;
        --lx;
    }
    while (ly > lx) {
        y >>= 1;
        --ly;
    }
    while (x != y) {
        x >>= 1;
        y >>= 1;
        --lx;
    }
    return (la - lx) + (lb - lx);
}

}  // namespace

std::uint64_t FiniteMetric::size() const {
    switch (kind) {
        case Kind::Cube: return std::uint64_t(1) << dim;
        case Kind::Path: return dim;
        case Kind::Tree: return (std::uint64_t(1) << dim) - 1;
    }
    return 0;
}

std::uint64_t FiniteMetric::distance(std::uint64_t a, std::uint64_t b) const {
    switch (kind) {
        case Kind::Cube: return hamming_distance(a, b);
        case Kind::Path: return a > b ? a - b : b - a;
        case Kind::Tree: return tree_dist(a + 1, b + 1);
    }
    return 0;
}

std::string FiniteMetric::point_str(std::uint64_t idx) const {
    switch (kind) {
        case Kind::Cube: return CubePoint(dim, idx).str();
        case Kind::Path: return std::to_string(idx + 1);
        case Kind::Tree: {
            std::uint64_t heap_id = idx + 1;
            unsigned level = heap_level(heap_id);
            if (level == 0) return ".";
            std::string s(level, '0');
            for (unsigned i = 0; i < level; ++i)
                if ((heap_id >> (level - 1 - i)) & 1u) s[i] = '1';
            return s;
        }
    }
    return "";
}

std::uint64_t FiniteMetric::parse_point(const std::string& s) const {
    switch (kind) {
        case Kind::Cube: {
            CubePoint p = CubePoint::parse(s);
            if (p.n != dim) throw std::invalid_argument("cube point length mismatch");
            return p.bits;
        }
        case Kind::Path: {
            std::uint64_t v = std::stoull(s);
            if (v < 1 || v > dim) throw std::invalid_argument("path point out of range");
            return v - 1;
        }
        case Kind::Tree: {
            if (s == ".") return 0;
            if (s.size() >= dim) throw std::invalid_argument("tree word too long for Tree(n)");
            std::uint64_t heap_id = 1;
            for (char c : s) {
                if (c != '0' && c != '1') throw std::invalid_argument("bad tree word '" + s + "'");
                heap_id = (heap_id << 1) | (c == '1' ? 1u : 0u);
            }
            return heap_id - 1;
        }
    }
    return 0;
}

DistortionReport distortion(const EmbeddingMap& f) {
    std::uint64_t m = f.source.size();
    if (m < 2) throw std::invalid_argument("distortion: source has fewer than 2 points");
    if (f.images.size() != m) throw std::invalid_argument("distortion: image table size mismatch");
    std::unordered_set<std::uint64_t> seen(f.images.begin(), f.images.end());
    if (seen.size() != m) throw std::invalid_argument("distortion: map is not injective");

    DistortionReport rep;
    rep.expansion = 0;
    rep.contraction = 0;
    for (std::uint64_t i = 0; i < m; ++i)
        for (std::uint64_t j = i + 1; j < m; ++j) {
            std::uint64_t ds = f.source.distance(i, j);
            std::uint64_t dt = f.target.distance(f.images[i], f.images[j]);
            if (dt == 0) throw std::invalid_argument("distortion: images collide");
            Rat up{BigInt(dt), BigInt(ds)};
            Rat down{BigInt(ds), BigInt(dt)};
            if (up > rep.expansion) {
                rep.expansion = up;
                rep.expansion_witness = {i, j};
            }
            if (down > rep.contraction) {
                rep.contraction = down;
                rep.contraction_witness = {i, j};
            }
        }
    rep.distortion = rep.expansion * rep.contraction;
    return rep;
}

// --- EMB v1 ---

namespace {

const char* kind_name(FiniteMetric::Kind k) {
    switch (k) {
        case FiniteMetric::Kind::Cube: return "cube";
        case FiniteMetric::Kind::Path: return "path";
        case FiniteMetric::Kind::Tree: return "tree";
    }
    return "?";
}

FiniteMetric::Kind parse_kind(const std::string& s) {
    if (s == "cube") return FiniteMetric::Kind::Cube;
    if (s == "path") return FiniteMetric::Kind::Path;
    if (s == "tree") return FiniteMetric::Kind::Tree;
    throw std::runtime_error("EMB: unknown space '" + s + "'");
}

}  // namespace

void write_emb(std::ostream& out, const EmbeddingMap& f) {
    if (f.source.kind != f.target.kind)
        throw std::invalid_argument("EMB v1 stores same-space embeddings only");
    out << "EMB v1\n";
    out << "space=" << kind_name(f.source.kind) << "\n";
    out << "k=" << f.source.dim << "\n";
    out << "N=" << f.target.dim << "\n";
    for (std::uint64_t i = 0; i < f.source.size(); ++i)
        out << f.source.point_str(i) << " -> " << f.target.point_str(f.images[i]) << "\n";
}

EmbeddingMap read_emb(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "EMB v1") throw std::runtime_error("EMB: bad magic line");
    if (!std::getline(in, line) || line.rfind("space=", 0) != 0) throw std::runtime_error("EMB: missing space=");
    FiniteMetric::Kind kind = parse_kind(line.substr(6));
    if (!std::getline(in, line) || line.rfind("k=", 0) != 0) throw std::runtime_error("EMB: missing k=");
    unsigned k = (unsigned)std::stoul(line.substr(2));
    if (!std::getline(in, line) || line.rfind("N=", 0) != 0) throw std::runtime_error("EMB: missing N=");
    unsigned n = (unsigned)std::stoul(line.substr(2));

    EmbeddingMap f;
    f.source = {kind, k};
    f.target = {kind, n};
    f.images.assign(f.source.size(), 0);
    std::vector<bool> assigned(f.source.size(), false);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto arrow = line.find(" -> ");
        if (arrow == std::string::npos) throw std::runtime_error("EMB: bad map line '" + line + "'");
        std::uint64_t src = f.source.parse_point(line.substr(0, arrow));
        std::uint64_t dst = f.target.parse_point(line.substr(arrow + 4));
        if (assigned[src]) throw std::runtime_error("EMB: duplicate source point");
        assigned[src] = true;
        f.images[src] = dst;
    }
    for (std::uint64_t i = 0; i < f.source.size(); ++i)
        if (!assigned[i]) throw std::runtime_error("EMB: source point missing: " + f.source.point_str(i));
    return f;
}

void save_emb(const std::string& path, const EmbeddingMap& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    write_emb(out, f);
}

EmbeddingMap load_emb(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_emb(in);
}

}  // namespace qramsey
