#include "qramsey/cube.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "qramsey/rng.hpp"

namespace qramsey {

CubeLimits& cube_limits() {
    static CubeLimits limits;
    return limits;
}

std::string CubePoint::str() const {
    std::string s(n, '0');
    for (unsigned i = 1; i <= n; ++i)
        if (coord(i)) s[i - 1] = '1';
    return s;
}

CubePoint CubePoint::parse(const std::string& s) {
    if (s.size() > 64) throw std::invalid_argument("cube point string too long");
    std::uint64_t enc = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '1')
            enc |= std::uint64_t(1) << i;
        else if (s[i] != '0')
            throw std::invalid_argument("bad cube point string '" + s + "'");
    }
    return CubePoint((unsigned)s.size(), enc);
}

unsigned hamming_distance(const CubePoint& a, const CubePoint& b) {
    if (a.n != b.n) throw DimensionMismatch("hamming_distance: dimension mismatch");
    return hamming_distance(a.bits, b.bits);
}

TailTable::TailTable(unsigned dim) : n(dim) {
    cumulative.resize(n + 1);
    BigInt c = 1, acc = 0;
    for (unsigned j = 0; j <= n; ++j) {
        acc += c;
        cumulative[j] = acc;
        c = c * (n - j) / (j + 1);
    }
}

BigInt TailTable::count_weight_at_most(const Rat& t) const {
    if (t < 0) return 0;
    BigInt j = rat_floor(t);
    if (j >= n) return cumulative[n];
    return cumulative[(unsigned)j];
}

const TailTable& tail_table(unsigned n) {
    static std::map<unsigned, TailTable> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, TailTable(n)).first;
    return it->second;
}

BigInt binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    const TailTable& t = tail_table(n);
    return k == 0 ? t.cumulative[0] : t.cumulative[k] - t.cumulative[k - 1];
}

Rat tail_size(const Rat& eps, unsigned n) {
    if (eps < 0 || eps > 1) throw std::invalid_argument("tail_size: eps outside [0,1]");
    Rat threshold = (Rat(1) - eps) * n / 2;
    return Rat(tail_table(n).count_weight_at_most(threshold), pow2(n));
}

// --- CubeSubset ---

CubeSubset::CubeSubset(unsigned n, Repr r) : n_(n), repr_(r) {
    if (r == Repr::Dense) {
        if (n > cube_limits().dense_limit)
            throw RepresentationTooLarge("dense representation refused for n=" + std::to_string(n) +
                                         " (limit " + std::to_string(cube_limits().dense_limit) + ")");
        bits_ = DenseBits(std::uint64_t(1) << n);
    }
}

CubeSubset CubeSubset::empty_dense(unsigned n) { return CubeSubset(n, Repr::Dense); }
CubeSubset CubeSubset::empty_sparse(unsigned n) { return CubeSubset(n, Repr::Sparse); }

CubeSubset CubeSubset::full(unsigned n) {
    CubeSubset s(n, Repr::Dense);
    for (std::uint64_t& w : s.bits_.words()) w = ~std::uint64_t(0);
    if (n < 6) s.bits_.words()[0] = (std::uint64_t(1) << (std::uint64_t(1) << n)) - 1;
    s.card_ = std::uint64_t(1) << n;
    return s;
}

CubeSubset CubeSubset::from_points(unsigned n, std::vector<std::uint64_t> encodings) {
    std::sort(encodings.begin(), encodings.end());
    encodings.erase(std::unique(encodings.begin(), encodings.end()), encodings.end());
    if (!encodings.empty() && n < 64 && (encodings.back() >> n) != 0)
        throw std::invalid_argument("encoding out of range for Q_n");
    CubeSubset s(n, Repr::Sparse);
    s.card_ = encodings.size();
    s.points_ = std::move(encodings);
    return s;
}

CubeSubset CubeSubset::from_bits(unsigned n, DenseBits bits) {
    CubeSubset s(n, Repr::Dense);
    if (bits.size() != (std::uint64_t(1) << n)) throw std::invalid_argument("bit array size != 2^n");
    s.bits_ = std::move(bits);
    s.card_ = s.bits_.count();
    return s;
}

bool CubeSubset::contains(std::uint64_t enc) const {
    if (repr_ == Repr::Dense) return bits_.test(enc);
    return std::binary_search(points_.begin(), points_.end(), enc);
}

void CubeSubset::insert(std::uint64_t enc) {
    if (repr_ == Repr::Dense) {
        if (!bits_.test(enc)) {
            bits_.set(enc);
            ++card_;
        }
    } else {
        auto it = std::lower_bound(points_.begin(), points_.end(), enc);
        if (it == points_.end() || *it != enc) {
            points_.insert(it, enc);
            ++card_;
        }
    }
}

const DenseBits& CubeSubset::dense_bits() const {
    if (repr_ != Repr::Dense)
        throw RepresentationTooLarge("operation requires a dense set; densify first");
    return bits_;
}

CubeSubset CubeSubset::densified() const {
    if (repr_ == Repr::Dense) return *this;
    CubeSubset s(n_, Repr::Dense);
    for (std::uint64_t e : points_) s.bits_.set(e);
    s.card_ = card_;
    return s;
}

std::vector<std::uint64_t> CubeSubset::to_points() const {
    if (repr_ == Repr::Sparse) return points_;
    std::vector<std::uint64_t> out;
    out.reserve(card_);
    for (std::uint64_t e = 0; e < bits_.size(); ++e)
        if (bits_.test(e)) out.push_back(e);
    return out;
}

CubeSubset CubeSubset::intersect(const CubeSubset& o) const {
    if (n_ != o.n_) throw DimensionMismatch("intersect: dimension mismatch");
    if (repr_ == Repr::Dense && o.repr_ == Repr::Dense) {
        DenseBits out = bits_;
        out &= o.bits_;
        return from_bits(n_, std::move(out));
    }
    const CubeSubset& sparse = repr_ == Repr::Sparse ? *this : o;
    const CubeSubset& other = repr_ == Repr::Sparse ? o : *this;
    std::vector<std::uint64_t> pts;
    for (std::uint64_t e : sparse.points_)
        if (other.contains(e)) pts.push_back(e);
    return from_points(n_, std::move(pts));
}

bool CubeSubset::operator==(const CubeSubset& o) const {
    if (n_ != o.n_ || card_ != o.card_) return false;
    if (repr_ == o.repr_ && repr_ == Repr::Dense) return bits_ == o.bits_;
    return to_points() == o.to_points();
}

CubeSubset epsilon_neighborhood(const CubeSubset& d, const Rat& eps) {
    if (eps < 0 || eps > 1) throw std::invalid_argument("epsilon_neighborhood: eps outside [0,1]");
    unsigned n = d.dim();
    CubeSubset dense = d.densified();  // throws RepresentationTooLarge above the cap
    BigInt rounds_big = rat_floor(eps * n);
    unsigned rounds = (unsigned)rounds_big;
    DenseBits cur = dense.dense_bits();
    for (unsigned round = 0; round < rounds; ++round) {
        DenseBits next = cur;
        for (unsigned b = 0; b < n; ++b) cur.or_xor_shift_into(next, b);
        if (next == cur) break;
        cur = std::move(next);
    }
    return CubeSubset::from_bits(n, std::move(cur));
}

CubeSubset section(const CubeSubset& d, const CubePoint& x) {
    if (x.n > d.dim()) throw DimensionMismatch("section: block dimension exceeds ambient dimension");
    unsigned rest = d.dim() - x.n;
    if (d.repr() == CubeSubset::Repr::Sparse || rest > cube_limits().dense_limit) {
        std::vector<std::uint64_t> pts;
        for (std::uint64_t e : d.to_points())
            if ((e & ((x.n == 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << x.n) - 1))) == x.bits)
                pts.push_back(e >> x.n);
        return CubeSubset::from_points(rest, std::move(pts));
    }
    CubeSubset out = CubeSubset::empty_dense(rest);
    const DenseBits& bits = d.dense_bits();
    for (std::uint64_t y = 0; y < (std::uint64_t(1) << rest); ++y)
        if (bits.test((y << x.n) | x.bits)) out.insert(y);
    return out;
}

bool in_central_shell(unsigned dist, unsigned n, const Rat& eps1) {
    Rat w(dist);
    Rat half = Rat(n) / 2;
    return w > (Rat(1) - eps1) * half && w < (Rat(1) + eps1) * half;
}

CubeSubset central_shell(const CubePoint& x, const Rat& eps1) {
    if (eps1 < 0 || eps1 > 1) throw std::invalid_argument("central_shell: eps1 outside [0,1]");
    unsigned n = x.n;
    std::vector<bool> ok(n + 1);
    for (unsigned w = 0; w <= n; ++w) ok[w] = in_central_shell(w, n, eps1);
    if (n <= cube_limits().dense_limit) {
        CubeSubset out = CubeSubset::empty_dense(n);
        for (std::uint64_t z = 0; z < (std::uint64_t(1) << n); ++z)
            if (ok[__builtin_popcountll(z)]) out.insert(z ^ x.bits);
        return out;
    }
    throw RepresentationTooLarge("central_shell: dense representation required");
}

ImplicitCubeSet bernoulli_implicit(unsigned n, const Rat& p, std::uint64_t seed) {
    if (p <= 0 || p > 1) throw std::invalid_argument("bernoulli_implicit: p outside (0,1]");
    if (p == 1) return {n, [](std::uint64_t) { return true; }};
    BigInt thr_big = rat_floor(p * Rat(pow2(64)));
    std::uint64_t threshold = (std::uint64_t)thr_big;
    return {n, [seed, threshold](std::uint64_t enc) { return hash_point(seed, enc) < threshold; }};
}

ImplicitCubeSet ball_inflate(const ImplicitCubeSet& base, unsigned radius) {
    if (radius > 2) throw std::invalid_argument("ball_inflate: radius above supported scan depth");
    unsigned n = base.n;
    auto member = base.member;
    return {n, [member, n, radius](std::uint64_t enc) {
                if (member(enc)) return true;
                if (radius >= 1)
                    for (unsigned i = 0; i < n; ++i)
                        if (member(enc ^ (std::uint64_t(1) << i))) return true;
                if (radius >= 2)
                    for (unsigned i = 0; i + 1 < n; ++i)
                        for (unsigned j = i + 1; j < n; ++j)
                            if (member(enc ^ (std::uint64_t(1) << i) ^ (std::uint64_t(1) << j))) return true;
                return false;
            }};
}

// --- QSET v1 ---

void write_qset(std::ostream& out, const CubeSubset& d) {
    out << "QSET v1\n";
    out << "N=" << d.dim() << "\n";
    if (d.repr() == CubeSubset::Repr::Dense) {
        out << "repr=dense\n";
        std::uint64_t nbits = std::uint64_t(1) << d.dim();
        std::uint64_t nhex = (nbits + 3) / 4;
        const DenseBits& bits = d.dense_bits();
        std::string line;
        line.reserve(nhex);
        for (std::uint64_t h = 0; h < nhex; ++h) {
            unsigned v = 0;
            for (unsigned b = 0; b < 4; ++b) {
                std::uint64_t idx = 4 * h + b;
                if (idx < nbits && bits.test(idx)) v |= 1u << b;
            }
            line += "0123456789abcdef"[v];
        }
        out << line << "\n";
    } else {
        out << "repr=sparse\n";
        for (std::uint64_t e : d.to_points()) out << CubePoint(d.dim(), e).str() << "\n";
    }
}

CubeSubset read_qset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "QSET v1") throw std::runtime_error("QSET: bad magic line");
    if (!std::getline(in, line) || line.rfind("N=", 0) != 0) throw std::runtime_error("QSET: missing N=");
    unsigned n = (unsigned)std::stoul(line.substr(2));
    if (!std::getline(in, line) || line.rfind("repr=", 0) != 0) throw std::runtime_error("QSET: missing repr=");
    std::string repr = line.substr(5);
    if (repr == "dense") {
        if (!std::getline(in, line)) throw std::runtime_error("QSET: missing dense payload");
        std::uint64_t nbits = std::uint64_t(1) << n;
        std::uint64_t nhex = (nbits + 3) / 4;
        if (line.size() != nhex) throw std::runtime_error("QSET: dense payload length mismatch");
        DenseBits bits(nbits);
        for (std::uint64_t h = 0; h < nhex; ++h) {
            char c = line[h];
            unsigned v;
            if (c >= '0' && c <= '9')
                v = c - '0';
            else if (c >= 'a' && c <= 'f')
                v = 10 + (c - 'a');
            else
                throw std::runtime_error("QSET: bad hex digit");
            for (unsigned b = 0; b < 4; ++b) {
                std::uint64_t idx = 4 * h + b;
                if (v & (1u << b)) {
                    if (idx >= nbits) throw std::runtime_error("QSET: pad bits must be zero");
                    bits.set(idx);
                }
            }
        }
        return CubeSubset::from_bits(n, std::move(bits));
    }
    if (repr != "sparse") throw std::runtime_error("QSET: unknown repr '" + repr + "'");
    std::vector<std::uint64_t> pts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        CubePoint p = CubePoint::parse(line);
        if (p.n != n) throw std::runtime_error("QSET: point length mismatch");
        pts.push_back(p.bits);
    }
    if (!std::is_sorted(pts.begin(), pts.end())) throw std::runtime_error("QSET: sparse encodings not increasing");
    return CubeSubset::from_points(n, std::move(pts));
}

void save_qset(const std::string& path, const CubeSubset& d) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    write_qset(f, d);
}

CubeSubset load_qset(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    return read_qset(f);
}

}  // namespace qramsey
