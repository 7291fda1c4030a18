#include "qramsey/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <thread>

namespace qramsey {

EmbeddingMap UndistortedForm::induced_map() const {
    EmbeddingMap f;
    f.source = FiniteMetric::cube(k);
    f.target = FiniteMetric::cube(N);
    f.images.resize(std::uint64_t(1) << k);
    for (std::uint64_t alpha = 0; alpha < f.images.size(); ++alpha) f.images[alpha] = image(alpha);
    return f;
}

std::vector<std::uint64_t> UndistortedForm::sorted_blocks() const {
    std::vector<std::uint64_t> s = blocks;
    std::sort(s.begin(), s.end(), [](std::uint64_t a, std::uint64_t b) {
        return (a & -a) < (b & -b);  // compare minimum elements; blocks are disjoint
    });
    return s;
}

std::vector<std::uint64_t> UndistortedForm::image_set() const {
    std::vector<std::uint64_t> s;
    s.reserve(std::uint64_t(1) << k);
    for (std::uint64_t alpha = 0; alpha < (std::uint64_t(1) << k); ++alpha) s.push_back(image(alpha));
    std::sort(s.begin(), s.end());
    return s;
}

void BlockCopySpec::validate() const {
    if (pairs.size() != k) throw std::invalid_argument("BlockCopySpec: pair count != k");
    std::optional<unsigned> common;
    for (const auto& [x0, x1] : pairs) {
        unsigned dist = hamming_distance(x0, x1);
        if (eps1 == 0) {
            if (!common) common = dist;
            if (dist != *common || dist == 0)
                throw std::invalid_argument("BlockCopySpec: block distances must be equal and positive");
        } else if (!in_central_shell(dist, n, eps1)) {
            throw std::invalid_argument("BlockCopySpec: block distance outside the open shell");
        }
    }
}

std::variant<UndistortedForm, NotUndistorted> canonical_form(const EmbeddingMap& f) {
    if (f.source.kind != FiniteMetric::Kind::Cube || f.target.kind != FiniteMetric::Kind::Cube)
        throw std::invalid_argument("canonical_form: expects a cube-to-cube map");
    unsigned k = f.source.dim, N = f.target.dim;
    if (k < 1) throw std::invalid_argument("canonical_form: k >= 1 required");
    std::uint64_t m = std::uint64_t(1) << k;

    std::uint64_t r64 = hamming_distance(f.images[0], f.images[1]);  // pair (0^k, e_1)
    for (std::uint64_t a = 0; a < m; ++a)
        for (std::uint64_t ap = a + 1; ap < m; ++ap) {
            std::uint64_t dt = hamming_distance(f.images[a], f.images[ap]);
            std::uint64_t ds = hamming_distance(a, ap);
            if (dt != r64 * ds) return NotUndistorted{a, ap};
        }

    UndistortedForm form;
    form.k = k;
    form.N = N;
    form.r = (unsigned)r64;
    form.b = f.images[0];
    form.blocks.resize(k);
    for (unsigned i = 0; i < k; ++i) form.blocks[i] = f.images[std::uint64_t(1) << i] ^ form.b;
    for (std::uint64_t a = 0; a < m; ++a)
        if (form.image(a) != f.images[a])
            throw std::logic_error("canonical_form: block reconstruction mismatch");
    return form;
}

BigInt predicted_form_count(unsigned k, unsigned N, unsigned r) {
    BigInt count = pow2(N);
    for (unsigned i = 0; i < k; ++i) count *= binomial(N - i * r, r);
    return count;
}

namespace {

std::uint64_t indices_to_mask(const std::vector<unsigned>& idx) {
    std::uint64_t m = 0;
    for (unsigned c : idx) m |= std::uint64_t(1) << c;
    return m;
}

// first r-subset of the coordinates not hit by `used`, in lexicographic order
bool first_combination(unsigned N, unsigned r, std::uint64_t used, std::vector<unsigned>& out) {
    out.clear();
    for (unsigned c = 0; c < N && out.size() < r; ++c)
        if (!((used >> c) & 1u)) out.push_back(c);
    return out.size() == r;
}

// next r-subset of the coordinates avoiding `used`, lexicographic order
bool next_combination(unsigned N, std::uint64_t used, std::vector<unsigned>& idx) {
    unsigned r = (unsigned)idx.size();
    std::vector<unsigned> avail;
    for (unsigned c = 0; c < N; ++c)
        if (!((used >> c) & 1u)) avail.push_back(c);
    // positions of idx inside avail
    std::vector<unsigned> pos(r);
    for (unsigned i = 0; i < r; ++i)
        pos[i] = (unsigned)(std::lower_bound(avail.begin(), avail.end(), idx[i]) - avail.begin());
    unsigned a = (unsigned)avail.size();
    int i = (int)r - 1;
    while (i >= 0 && pos[i] == a - r + i) --i;
    if (i < 0) return false;
    ++pos[i];
    for (unsigned j = i + 1; j < r; ++j) pos[j] = pos[j - 1] + 1;
    for (unsigned j = 0; j < r; ++j) idx[j] = avail[pos[j]];
    return true;
}

}  // namespace

UndistortedStream::UndistortedStream(unsigned k, unsigned N, unsigned r,
                                     const CubeSubset* filter, EnumerationOptions opts)
    : k_(k), N_(N), r_(r), filter_(filter) {
    if (r < 1) throw std::invalid_argument("generate_undistorted: r >= 1 required");
    if (std::uint64_t(r) * k > N) throw std::invalid_argument("generate_undistorted: rk <= N required");
    if (N > 63) throw std::invalid_argument("generate_undistorted: N <= 63 required");
    if (filter && filter->dim() != N) throw DimensionMismatch("generate_undistorted: filter dimension mismatch");
    predicted_ = predicted_form_count(k, N, r);
    if (!opts.force && predicted_ > opts.cap)
        throw std::runtime_error("generate_undistorted: predicted stream size " + predicted_.str() +
                                 " exceeds cap " + opts.cap.str() + " (use force)");
    idx_.resize(k);
    masks_.resize(k);
    std::uint64_t used = 0;
    for (unsigned i = 0; i < k; ++i) {
        if (!first_combination(N_, r_, used, idx_[i])) throw std::logic_error("no initial block layout");
        masks_[i] = indices_to_mask(idx_[i]);
        used |= masks_[i];
    }
}

bool UndistortedStream::advance_blocks() {
    int i = (int)k_ - 1;
    while (i >= 0) {
        std::uint64_t used = 0;
        for (int j = 0; j < i; ++j) used |= masks_[j];
        if (next_combination(N_, used, idx_[i])) {
            masks_[i] = indices_to_mask(idx_[i]);
            used |= masks_[i];
            for (unsigned j = i + 1; j < k_; ++j) {
                if (!first_combination(N_, r_, used, idx_[j])) return false;  // cannot happen when rk <= N
                masks_[j] = indices_to_mask(idx_[j]);
                used |= masks_[j];
            }
            return true;
        }
        --i;
    }
    return false;
}

std::optional<UndistortedForm> UndistortedStream::next() {
    while (!done_) {
        if (!fresh_b_) {
            if (!advance_blocks()) {
                if (b_ + 1 >= (std::uint64_t(1) << N_)) {
                    done_ = true;
                    break;
                }
                ++b_;
                std::uint64_t used = 0;
                for (unsigned i = 0; i < k_; ++i) {
                    first_combination(N_, r_, used, idx_[i]);
                    masks_[i] = indices_to_mask(idx_[i]);
                    used |= masks_[i];
                }
            }
        }
        fresh_b_ = false;
        UndistortedForm form{k_, N_, r_, b_, masks_};
        if (filter_) {
            bool inside = true;
            for (std::uint64_t alpha = 0; alpha < (std::uint64_t(1) << k_) && inside; ++alpha)
                inside = filter_->contains(form.image(alpha));
            if (!inside) continue;
        }
        return form;
    }
    return std::nullopt;
}

namespace {

// Scan one (r, b-range) slice in enumeration order; stop at the first form
// whose image lies in D, or when `give_up` says a smaller slice already won.
struct SliceResult {
    std::optional<UndistortedForm> form;
    std::uint64_t checked = 0;
};

SliceResult scan_slice(const CubeSubset& d, unsigned k, unsigned N, unsigned r,
                       std::uint64_t b_lo, std::uint64_t b_hi,
                       const std::atomic<std::uint64_t>* winner_chunk, std::uint64_t my_chunk) {
    SliceResult res;
    std::vector<std::vector<unsigned>> idx(k);
    std::vector<std::uint64_t> masks(k);
    std::vector<std::uint64_t> images(std::uint64_t(1) << k);

    // depth-first over block tuples in lexicographic order; a block survives
    // only if every image it introduces is in D
    std::function<bool(unsigned, std::uint64_t)> descend = [&](unsigned depth, std::uint64_t used) {
        if (!first_combination(N, r, used, idx[depth])) return false;
        while (true) {
            masks[depth] = indices_to_mask(idx[depth]);
            ++res.checked;
            std::uint64_t half = std::uint64_t(1) << depth;
            bool ok = true;
            for (std::uint64_t a = 0; a < half && ok; ++a) ok = d.contains(images[a] ^ masks[depth]);
            if (ok) {
                for (std::uint64_t a = 0; a < half; ++a) images[half + a] = images[a] ^ masks[depth];
                if (depth + 1 == k) return true;
                if (descend(depth + 1, used | masks[depth])) return true;
            }
            if (!next_combination(N, used, idx[depth])) return false;
        }
    };

    for (std::uint64_t b = b_lo; b < b_hi; ++b) {
        if (winner_chunk && winner_chunk->load(std::memory_order_relaxed) < my_chunk) return res;
        if (!d.contains(b)) continue;  // image of 0^k
        images[0] = b;
        if (descend(0, 0)) {
            res.form = UndistortedForm{k, N, r, b, masks};
            return res;
        }
    }
    return res;
}

}  // namespace

CopySearchResult find_copy_brute(const CubeSubset& d, unsigned k,
                                 unsigned r_min, unsigned r_max, EnumerationOptions opts) {
    if (r_min < 1) throw std::invalid_argument("find_copy_brute: r = 0 is degenerate");
    if (r_max < r_min) throw std::invalid_argument("find_copy_brute: empty rescaling range");
    unsigned N = d.dim();
    if (std::uint64_t(k) * r_min > N) throw std::invalid_argument("find_copy_brute: k*r_min <= N required");

    CopySearchResult out;
    BigInt predicted = 0;
    for (unsigned r = r_min; r <= r_max && std::uint64_t(r) * k <= N; ++r)
        predicted += predicted_form_count(k, N, r);
    if (!opts.force && predicted > opts.cap) {
        out.capped = true;
        return out;
    }

    unsigned workers = std::max(1u, opts.workers);
    for (unsigned r = r_min; r <= r_max; ++r) {
        if (std::uint64_t(r) * k > N) break;
        std::uint64_t bs = std::uint64_t(1) << N;
        if (workers == 1) {
            SliceResult sr = scan_slice(d, k, N, r, 0, bs, nullptr, 0);
            out.forms_checked += sr.checked;
            if (sr.form) {
                out.form = sr.form;
                return out;
            }
        } else {
            std::uint64_t chunk = (bs + workers - 1) / workers;
            std::atomic<std::uint64_t> winner{~std::uint64_t(0)};
            std::vector<SliceResult> results(workers);
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < workers; ++w)
                pool.emplace_back([&, w] {
                    std::uint64_t lo = w * chunk, hi = std::min(bs, lo + chunk);
                    if (lo >= hi) return;
                    results[w] = scan_slice(d, k, N, r, lo, hi, &winner, w);
                    if (results[w].form) {
                        std::uint64_t cur = winner.load();
                        while (w < cur && !winner.compare_exchange_weak(cur, w)) {
                        }
                    }
                });
            for (auto& t : pool) t.join();
            for (unsigned w = 0; w < workers; ++w) out.forms_checked += results[w].checked;
            std::uint64_t win = winner.load();
            if (win != ~std::uint64_t(0)) {
                out.form = results[win].form;
                return out;
            }
        }
    }
    return out;
}

namespace {

BigInt count_block_tuples(const CubeSubset& d, unsigned k, unsigned n,
                          const std::vector<bool>& shell_dist) {
    if (k == 1) {
        BigInt count = 0;
        std::vector<std::uint64_t> pts = d.to_points();
        for (std::uint64_t y : pts)
            for (std::uint64_t yp : pts)
                if (shell_dist[hamming_distance(y, yp)]) ++count;
        return count;
    }
    unsigned rest = (k - 1) * n;
    BigInt count = 0;
    std::uint64_t block_mask = (std::uint64_t(1) << n) - 1;
    // sections over the trailing (k-1) blocks, indexed by leading-block value
    std::vector<std::vector<std::uint64_t>> by_tail;
    by_tail.resize(std::size_t(1) << n);
    for (std::uint64_t e : d.to_points()) by_tail[e & block_mask].push_back(e >> n);
    for (std::uint64_t y = 0; y < (std::uint64_t(1) << n); ++y)
        for (std::uint64_t yp = 0; yp < (std::uint64_t(1) << n); ++yp) {
            if (!shell_dist[hamming_distance(y, yp)]) continue;
            std::vector<std::uint64_t> both;
            std::set_intersection(by_tail[y].begin(), by_tail[y].end(),
                                  by_tail[yp].begin(), by_tail[yp].end(), std::back_inserter(both));
            if (both.empty()) continue;
            count += count_block_tuples(CubeSubset::from_points(rest, std::move(both)), k - 1, n, shell_dist);
        }
    return count;
}

}  // namespace

Rat block_pair_measure(const CubeSubset& d, unsigned k, const Rat& eps1) {
    if (k < 1) throw std::invalid_argument("block_pair_measure: k >= 1 required");
    if (d.dim() % k != 0) throw DimensionMismatch("block_pair_measure: dimension not divisible by k");
    unsigned n = d.dim() / k;
    if (d.dim() > cube_limits().dense_limit)
        throw RepresentationTooLarge("block_pair_measure: k*n above the dense limit");

    std::vector<bool> shell(n + 1);
    BigInt shell_layers = 0;
    for (unsigned w = 0; w <= n; ++w) {
        shell[w] = in_central_shell(w, n, eps1);
        if (shell[w]) shell_layers += binomial(n, w);
    }
    BigInt pair_count = shell_layers * pow2(n);  // |V^{1,n}|
    if (pair_count == 0) return Rat(0);
    BigInt denom = 1;
    for (unsigned i = 0; i < k; ++i) denom *= pair_count;
    if (d.empty()) return Rat(0);
    return Rat(count_block_tuples(d, k, n, shell), denom);
}

}  // namespace qramsey
