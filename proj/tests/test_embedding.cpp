#include <doctest.h>

#include <algorithm>
#include <functional>
#include <set>
#include <tuple>

#include "qramsey/embedding.hpp"
#include "qramsey/rng.hpp"

using namespace qramsey;

namespace {

EmbeddingMap cube_map(unsigned k, unsigned n, std::vector<std::uint64_t> images) {
    EmbeddingMap f;
    f.source = FiniteMetric::cube(k);
    f.target = FiniteMetric::cube(n);
    f.images = std::move(images);
    return f;
}

// exhaustive oracle: all injective maps Q_k -> Q_N that multiply every
// pairwise distance by exactly r
std::set<std::vector<std::uint64_t>> rescaled_isometries_by_filter(unsigned k, unsigned N, unsigned r) {
    std::set<std::vector<std::uint64_t>> result;
    std::uint64_t m = std::uint64_t(1) << k;
    std::uint64_t size = std::uint64_t(1) << N;
    std::vector<std::uint64_t> images(m);
    std::function<void(std::uint64_t)> rec = [&](std::uint64_t pos) {
        if (pos == m) {
            result.insert(images);
            return;
        }
        for (std::uint64_t cand = 0; cand < size; ++cand) {
            bool ok = true;
            for (std::uint64_t prev = 0; prev < pos && ok; ++prev)
                ok = hamming_distance(images[prev], cand) ==
                     r * hamming_distance((std::uint64_t)prev, (std::uint64_t)pos);
            if (!ok) continue;
            images[pos] = cand;
            rec(pos + 1);
        }
    };
    rec(0);
    return result;
}

std::set<std::vector<std::uint64_t>> stream_image_tuples(unsigned k, unsigned N, unsigned r) {
    std::set<std::vector<std::uint64_t>> result;
    UndistortedStream stream(k, N, r);
    while (auto form = stream.next()) result.insert(form->induced_map().images);
    return result;
}

}  // namespace

TEST_CASE("distortion: identity, path example, pure rescaling") {
    EmbeddingMap id = cube_map(3, 3, {0, 1, 2, 3, 4, 5, 6, 7});
    CHECK(distortion(id).distortion == Rat(1));

    // f : [3] -> [10], 1->1, 2->2, 3->4; oracle over the three pairs
    EmbeddingMap f;
    f.source = FiniteMetric::path(3);
    f.target = FiniteMetric::path(10);
    f.images = {0, 1, 3};
    Rat exp_oracle = 0, con_oracle = 0;
    long vals[3] = {1, 2, 4};
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            exp_oracle = std::max(exp_oracle, Rat(vals[j] - vals[i], j - i));
            con_oracle = std::max(con_oracle, Rat(j - i, vals[j] - vals[i]));
        }
    DistortionReport rep = distortion(f);
    CHECK(rep.expansion == exp_oracle);
    CHECK(rep.expansion == Rat(2));
    CHECK(rep.expansion_witness == std::make_pair(std::uint64_t(1), std::uint64_t(2)));
    CHECK(rep.contraction == con_oracle);
    CHECK(rep.contraction == Rat(1));
    CHECK(rep.distortion == Rat(2));

    // doubling map on [4]
    EmbeddingMap dbl;
    dbl.source = FiniteMetric::path(4);
    dbl.target = FiniteMetric::path(8);
    dbl.images = {1, 3, 5, 7};
    CHECK(distortion(dbl).distortion == Rat(1));
}

TEST_CASE("distortion rejects non-injective maps") {
    CHECK_THROWS(distortion(cube_map(1, 3, {5, 5})));
}

TEST_CASE("distortion is invariant under target isometries") {
    CounterRng rng(42);
    for (int trial = 0; trial < 30; ++trial) {
        unsigned k = 2, N = 6;
        std::vector<std::uint64_t> imgs;
        while (imgs.size() < 4) {
            std::uint64_t c = rng.next_below(64);
            if (std::find(imgs.begin(), imgs.end(), c) == imgs.end()) imgs.push_back(c);
        }
        EmbeddingMap f = cube_map(k, N, imgs);
        Rat base = distortion(f).distortion;

        // random coordinate permutation + translation of the target
        std::vector<unsigned> perm(N);
        for (unsigned i = 0; i < N; ++i) perm[i] = i;
        for (unsigned i = N; i > 1; --i) std::swap(perm[i - 1], perm[rng.next_below(i)]);
        std::uint64_t shift = rng.next_below(64);
        auto iso = [&](std::uint64_t x) {
            std::uint64_t y = 0;
            for (unsigned i = 0; i < N; ++i)
                if ((x >> i) & 1u) y |= std::uint64_t(1) << perm[i];
            return y ^ shift;
        };
        std::vector<std::uint64_t> moved;
        for (std::uint64_t v : imgs) moved.push_back(iso(v));
        CHECK(distortion(cube_map(k, N, moved)).distortion == base);
    }
}

TEST_CASE("canonical_form: explicit block map") {
    // f(a) = (a1, a1, a2, a2) on Q_2 -> Q_4
    std::vector<std::uint64_t> imgs(4);
    for (std::uint64_t a = 0; a < 4; ++a) {
        std::uint64_t y = 0;
        if (a & 1) y |= 0b0011;
        if (a & 2) y |= 0b1100;
        imgs[a] = y;
    }
    auto res = canonical_form(cube_map(2, 4, imgs));
    REQUIRE(std::holds_alternative<UndistortedForm>(res));
    const auto& form = std::get<UndistortedForm>(res);
    CHECK(form.b == 0);
    CHECK(form.r == 2);
    CHECK(form.blocks == std::vector<std::uint64_t>{0b0011, 0b1100});
}

TEST_CASE("canonical_form round-trips every generated form") {
    for (auto [k, N, r] : std::vector<std::tuple<unsigned, unsigned, unsigned>>{
             {1, 4, 2}, {2, 5, 2}, {3, 6, 1}}) {
        UndistortedStream stream(k, N, r);
        int count = 0;
        while (auto form = stream.next()) {
            auto res = canonical_form(form->induced_map());
            REQUIRE(std::holds_alternative<UndistortedForm>(res));
            const auto& back = std::get<UndistortedForm>(res);
            CHECK(back.r == r);
            CHECK(back.b == form->b);
            CHECK(back.sorted_blocks() == form->sorted_blocks());
            if (++count > 2000) break;
        }
        CHECK(count > 0);
    }
}

TEST_CASE("canonical_form reports a violating pair after a one-coordinate flip") {
    UndistortedStream stream(2, 5, 2);
    auto form = stream.next();
    REQUIRE(form.has_value());
    EmbeddingMap f = form->induced_map();
    f.images[3] ^= 0b10000;  // perturb one image by one coordinate
    auto res = canonical_form(f);
    REQUIRE(std::holds_alternative<NotUndistorted>(res));
    auto bad = std::get<NotUndistorted>(res);
    unsigned dt = hamming_distance(f.images[bad.alpha], f.images[bad.alpha_prime]);
    unsigned ds = hamming_distance(bad.alpha, bad.alpha_prime);
    CHECK(dt != ds * hamming_distance(f.images[0], f.images[1]));
}

TEST_CASE("generate_undistorted counts: derived examples") {
    // k=1, N=3, r=2: ordered pairs at distance 2, derived by brute force
    int ordered_pairs = 0;
    for (std::uint64_t x = 0; x < 8; ++x)
        for (std::uint64_t y = 0; y < 8; ++y)
            if (hamming_distance(x, y) == 2) ++ordered_pairs;
    CHECK(ordered_pairs == 24);
    CHECK(stream_image_tuples(1, 3, 2).size() == 24);

    // k=2, N=2, r=1: the 8 distance-preserving self-maps of the square,
    // derived by filtering all injections
    auto oracle = rescaled_isometries_by_filter(2, 2, 1);
    CHECK(oracle.size() == 8);
    CHECK(stream_image_tuples(2, 2, 1) == oracle);
}

TEST_CASE("generator equals the exhaustive all-pairs filter") {
    for (auto [k, N, r] : std::vector<std::tuple<unsigned, unsigned, unsigned>>{
             {1, 3, 1}, {1, 3, 2}, {1, 3, 3}, {2, 4, 1}, {2, 4, 2}}) {
        CHECK(stream_image_tuples(k, N, r) == rescaled_isometries_by_filter(k, N, r));
    }
}

TEST_CASE("copy-count upper bounds from the counting remark") {
    for (unsigned k : {1u, 2u})
        for (unsigned N : {3u, 4u, 5u}) {
            if (k > N) continue;
            BigInt total = 0;
            for (unsigned r = 1; r * k <= N; ++r) total += predicted_form_count(k, N, r);
            BigInt bound = 1;
            for (unsigned i = 0; i < N; ++i) bound *= 2 * (k + 1);
            CHECK(total <= bound);

            for (unsigned R = 1; R * k <= N; ++R) {
                BigInt restricted = 0;
                for (unsigned r = 1; r <= R; ++r) restricted += predicted_form_count(k, N, r);
                BigInt rbound = pow2(N) * R;
                for (std::uint64_t i = 0; i < std::uint64_t(R) * k; ++i) rbound *= N;
                CHECK(restricted <= rbound);
            }
        }
}

TEST_CASE("unlabeled image-set deduplication is a separate post-filter") {
    // each unlabeled copy carries 2^k choices of base corner times k! block
    // orders of vertex-labeled forms
    UndistortedStream stream(2, 4, 2);
    std::set<std::vector<std::uint64_t>> unlabeled;
    int labeled = 0;
    while (auto form = stream.next()) {
        unlabeled.insert(form->image_set());
        ++labeled;
    }
    CHECK(labeled == 96);
    CHECK(unlabeled.size() == 96 / 8);
}

TEST_CASE("generator respects the filter") {
    CubeSubset d = CubeSubset::empty_dense(4);
    for (std::uint64_t e : {0ull, 3ull, 12ull, 15ull}) d.insert(e);  // one 2-rescaled square
    UndistortedStream stream(2, 4, 2, &d);
    int emitted = 0;
    while (auto form = stream.next()) {
        for (std::uint64_t a = 0; a < 4; ++a) CHECK(d.contains(form->image(a)));
        ++emitted;
    }
    CHECK(emitted == 8);  // 4 choices of b inside the square x 2 block orders
}

TEST_CASE("enumeration cap guard refuses and force overrides") {
    EnumerationOptions tight;
    tight.cap = 10;
    CHECK_THROWS(UndistortedStream(2, 6, 1, nullptr, tight));
    tight.force = true;
    UndistortedStream ok(2, 6, 1, nullptr, tight);
    CHECK(ok.next().has_value());
}

TEST_CASE("find_copy_brute: full cube, singleton, determinism across workers") {
    CubeSubset full = CubeSubset::full(4);
    CopySearchResult res = find_copy_brute(full, 1, 1, 1);
    REQUIRE(res.form.has_value());
    CHECK(res.form->b == 0);
    CHECK(res.form->blocks == std::vector<std::uint64_t>{1});  // first adjacent pair

    CubeSubset single = CubeSubset::empty_dense(4);
    single.insert(9);
    CHECK(!find_copy_brute(single, 1, 1, 4).form.has_value());

    CounterRng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        CubeSubset d = CubeSubset::empty_dense(6);
        for (std::uint64_t e = 0; e < 64; ++e)
            if (rng.next_unit() < 0.45) d.insert(e);
        EnumerationOptions par;
        par.workers = 4;
        CopySearchResult seq = find_copy_brute(d, 2, 1, 3);
        CopySearchResult rp = find_copy_brute(d, 2, 1, 3, par);
        CHECK(seq.form.has_value() == rp.form.has_value());
        if (seq.form) {
            CHECK(seq.form->b == rp.form->b);
            CHECK(seq.form->r == rp.form->r);
            CHECK(seq.form->blocks == rp.form->blocks);
        }
    }
}

TEST_CASE("find_copy_brute witness matches the stream's first-in-order form") {
    CounterRng rng(77);
    for (int trial = 0; trial < 8; ++trial) {
        CubeSubset d = CubeSubset::empty_dense(5);
        for (std::uint64_t e = 0; e < 32; ++e)
            if (rng.next_unit() < 0.5) d.insert(e);
        for (unsigned r = 1; r <= 2; ++r) {
            CopySearchResult brute = find_copy_brute(d, 2, r, r);
            UndistortedStream stream(2, 5, r, &d);
            auto first = stream.next();
            CHECK(brute.form.has_value() == first.has_value());
            if (first && brute.form) {
                CHECK(brute.form->b == first->b);
                CHECK(brute.form->blocks == first->blocks);
            }
        }
    }
}

TEST_CASE("find_copy_brute rejects the degenerate rescaling zero") {
    CHECK_THROWS(find_copy_brute(CubeSubset::full(3), 1, 0, 2));
}

TEST_CASE("block_pair_measure: full cube, empty set, one-dimensional lower bound") {
    CHECK(block_pair_measure(CubeSubset::full(8), 2, Rat(1, 2)) == Rat(1));
    CHECK(block_pair_measure(CubeSubset::empty_dense(8), 2, Rat(1, 2)) == Rat(0));

    // k = 1 counting bound: mu^{1,n}(D) > (1 - 2W/mu(D)) mu(D)^2
    CounterRng rng(5);
    for (unsigned n : {6u, 8u}) {
        Rat eps1(1, 2);
        Rat w = tail_size(eps1, n);
        for (int trial = 0; trial < 5; ++trial) {
            CubeSubset d = CubeSubset::empty_dense(n);
            for (std::uint64_t e = 0; e < (std::uint64_t(1) << n); ++e)
                if (rng.next_unit() < 0.6) d.insert(e);
            if (d.empty()) continue;
            Rat mu = d.measure();
            Rat measured = block_pair_measure(d, 1, eps1);
            CHECK(measured > (Rat(1) - 2 * w / mu) * mu * mu);
        }
    }
}

TEST_CASE("block_pair_measure agrees with naive tuple enumeration at k=2") {
    CounterRng rng(9);
    CubeSubset d = CubeSubset::empty_dense(6);  // k=2, n=3
    for (std::uint64_t e = 0; e < 64; ++e)
        if (rng.next_unit() < 0.7) d.insert(e);
    Rat eps1(2, 3);

    BigInt hits = 0, shell_pairs = 0;
    for (std::uint64_t a = 0; a < 8; ++a)
        for (std::uint64_t b = 0; b < 8; ++b)
            if (in_central_shell(hamming_distance(a, b), 3, eps1)) ++shell_pairs;
    for (std::uint64_t a0 = 0; a0 < 8; ++a0)
        for (std::uint64_t a1 = 0; a1 < 8; ++a1) {
            if (!in_central_shell(hamming_distance(a0, a1), 3, eps1)) continue;
            for (std::uint64_t b0 = 0; b0 < 8; ++b0)
                for (std::uint64_t b1 = 0; b1 < 8; ++b1) {
                    if (!in_central_shell(hamming_distance(b0, b1), 3, eps1)) continue;
                    bool all = true;
                    for (std::uint64_t alpha = 0; alpha < 4 && all; ++alpha) {
                        std::uint64_t x = (alpha & 1) ? a1 : a0;
                        std::uint64_t y = (alpha & 2) ? b1 : b0;
                        all = d.contains((y << 3) | x);
                    }
                    if (all) ++hits;
                }
        }
    CHECK(block_pair_measure(d, 2, eps1) == Rat(hits, shell_pairs * shell_pairs));
}

TEST_CASE("EMB round trip across all three spaces") {
    // cube
    EmbeddingMap f = cube_map(2, 4, {0, 3, 12, 15});
    std::stringstream b1;
    write_emb(b1, f);
    EmbeddingMap f2 = read_emb(b1);
    CHECK(f2.source == f.source);
    CHECK(f2.target == f.target);
    CHECK(f2.images == f.images);

    // path
    EmbeddingMap p;
    p.source = FiniteMetric::path(3);
    p.target = FiniteMetric::path(9);
    p.images = {0, 3, 6};
    std::stringstream b2;
    write_emb(b2, p);
    CHECK(read_emb(b2).images == p.images);

    // tree, with the root written as "."
    EmbeddingMap t;
    t.source = FiniteMetric::tree(2);
    t.target = FiniteMetric::tree(4);
    t.images = {0, 1, 2};  // heap ids 1, 2, 3
    std::stringstream b3;
    write_emb(b3, t);
    std::string text = b3.str();
    CHECK(text.find(". -> .") != std::string::npos);
    CHECK(read_emb(b3).images == t.images);

    // missing source points are rejected
    std::stringstream bad("EMB v1\nspace=path\nk=2\nN=5\n1 -> 3\n");
    CHECK_THROWS(read_emb(bad));
}

TEST_CASE("block copy spec invariants are enforced") {
    BlockCopySpec good;
    good.k = 2;
    good.n = 4;
    good.eps1 = Rat(1, 2);
    good.pairs = {{0b0000, 0b0011}, {0b0101, 0b0110}};  // distances 2, 2 inside (1, 3)
    CHECK_NOTHROW(good.validate());

    BlockCopySpec bad = good;
    bad.pairs[1] = {0b0000, 0b1111};  // distance 4 outside the open shell
    CHECK_THROWS(bad.validate());

    BlockCopySpec equal = good;
    equal.eps1 = 0;
    CHECK_NOTHROW(equal.validate());
    equal.pairs[1] = {0b0000, 0b0001};  // distance 1 != 2
    CHECK_THROWS(equal.validate());
}
