#include "qramsey/adversary.hpp"

#include <cmath>
#include <sstream>
#include <thread>

#include "qramsey/rng.hpp"

namespace qramsey {

namespace {

CubeSubset draw_once(unsigned n, const Rat& p, std::uint64_t seed, unsigned attempt, unsigned workers) {
    // attempt index folded into the key so rejection rounds are independent
    std::uint64_t key = mix64(seed + 0x9e3779b97f4a7c15ull * attempt);
    std::uint64_t size = std::uint64_t(1) << n;
    std::uint64_t threshold;
    bool all = false;
    if (p == 1) {
        all = true;
        threshold = 0;
    } else {
        threshold = (std::uint64_t)rat_floor(p * Rat(pow2(64)));
    }

    DenseBits bits(size);
    unsigned nw = std::max(1u, workers);
    if (nw == 1 || size < (std::uint64_t(1) << 16)) {
        for (std::uint64_t e = 0; e < size; ++e)
            if (all || hash_point(key, e) < threshold) bits.set(e);
    } else {
        std::vector<std::thread> pool;
        std::uint64_t chunk = ((size / nw) + 63) / 64 * 64;  // word-aligned ranges
        if (chunk == 0) chunk = 64;
        for (unsigned w = 0; w < nw; ++w)
            pool.emplace_back([&, w] {
                std::uint64_t lo = w * chunk, hi = std::min(size, lo + chunk);
                for (std::uint64_t e = lo; e < hi; ++e)
                    if (all || hash_point(key, e) < threshold) bits.set(e);
            });
        for (auto& t : pool) t.join();
    }
    return CubeSubset::from_bits(n, std::move(bits));
}

}  // namespace

SampleResult sample_set(const RandomSetRecipe& recipe, unsigned workers) {
    if (recipe.p <= 0 || recipe.p > 1)
        throw std::invalid_argument("sample_set: inclusion probability outside (0,1]");
    if (recipe.n > cube_limits().dense_limit)
        throw RepresentationTooLarge("sample_set: n above the dense limit");

    SampleResult res;
    if (!recipe.rejection) {
        res.set = draw_once(recipe.n, recipe.p, recipe.seed, 0, workers);
        res.stats.attempts = 1;
        return res;
    }

    const auto& rej = *recipe.rejection;
    for (unsigned attempt = 0; attempt < rej.max_attempts; ++attempt) {
        CubeSubset d = draw_once(recipe.n, recipe.p, recipe.seed, attempt, workers);
        ++res.stats.attempts;
        if (!d.measure_at_least(rej.delta)) continue;
        EnumerationOptions opts;
        opts.workers = workers;
        CopySearchResult search = find_copy_brute(d, rej.k, rej.r_min, rej.r_max, opts);
        res.stats.forms_checked += search.forms_checked;
        if (search.capped)
            throw std::runtime_error("sample_set: certification search capped; raise the cap");
        if (!search.form) {
            res.set = std::move(d);
            return res;
        }
    }
    res.failure = "max_attempts (" + std::to_string(rej.max_attempts) + ") exhausted without a certified set";
    return res;
}

PBadReport p_bad(unsigned n, unsigned k, const Rat& delta) {
    if (delta <= 0 || delta >= 1) throw std::invalid_argument("p_bad: delta outside (0,1)");
    PBadReport rep;
    double ln_delta = std::log(to_double(delta));
    // ln exp(-delta 2^N / 12) = -delta 2^N / 12, in log2-safe form
    double pow2n = std::ldexp(1.0, (int)n);  // overflows to inf only far beyond use
    rep.log_first = -to_double(delta) * pow2n / 12.0;
    rep.log_second = n * std::log(2.0 * (k + 1)) + std::ldexp(1.0, (int)k) * (std::log(1.5) + ln_delta);
    double first = std::exp(rep.log_first);
    double second = std::exp(rep.log_second);
    rep.p_bad = first + second;
    rep.existence_regime = rep.p_bad < 1.0;
    return rep;
}

LllBudget lll_certificate(unsigned k, unsigned R, const Rat& delta) {
    if (k < 1 || R < 1) throw std::invalid_argument("lll_certificate: k >= 1 and R >= 1 required");
    if (delta <= 0 || delta >= Rat(1, 2)) throw std::invalid_argument("lll_certificate: delta outside (0, 1/2)");
    LllBudget b;
    b.k = k;
    b.R = R;
    b.delta = delta;
    double ln_inv_delta = -std::log(to_double(delta));
    double two_k = std::ldexp(1.0, (int)k);
    b.log_p_event = -two_k * ln_inv_delta;

    // 4 * 2^k * R * N^{Rk} * delta^{2^k} <= 1
    // ln N <= (2^k ln(1/delta) - ln 4 - k ln 2 - ln R) / (R k)
    double ln_n_lll = (two_k * ln_inv_delta - std::log(4.0) - k * std::log(2.0) - std::log((double)R)) /
                      ((double)R * k);
    b.n_max_lll = std::exp(ln_n_lll);

    // N <= (2^{-k} / 12R) e^{ln(1/delta)(2^k - 1)/(Rk)}
    double ln_n_surv = -(double)k * std::log(2.0) - std::log(12.0 * R) +
                       ln_inv_delta * (two_k - 1.0) / ((double)R * k);
    b.n_max_survival = std::exp(ln_n_surv);

    double lim = std::min(b.n_max_lll, b.n_max_survival);
    b.n_max = lim < 1.0 ? 0 : (std::uint64_t)std::floor(lim);
    return b;
}

std::uint64_t qset_content_hash(const CubeSubset& d) {
    std::ostringstream buf;
    write_qset(buf, d);
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a 64
    for (char c : buf.str()) {
        h ^= (unsigned char)c;
        h *= 0x100000001b3ull;
    }
    return h;
}

NoCopyCertificate certify_no_copy(const CubeSubset& d, unsigned k, unsigned r_min, unsigned r_max,
                                  EnumerationOptions opts) {
    NoCopyCertificate cert;
    cert.k = k;
    cert.r_min = r_min;
    cert.r_max = r_max;
    cert.set_hash = qset_content_hash(d);
    if (d.empty()) {
        cert.status = NoCopyCertificate::Status::CertifiedNone;
        return cert;
    }
    CopySearchResult search = find_copy_brute(d, k, r_min, r_max, opts);
    cert.forms_checked = search.forms_checked;
    if (search.capped) {
        cert.status = NoCopyCertificate::Status::Inconclusive;
    } else if (search.form) {
        cert.status = NoCopyCertificate::Status::Counterexample;
        cert.counterexample = search.form;
    } else {
        cert.status = NoCopyCertificate::Status::CertifiedNone;
    }
    return cert;
}

std::string NoCopyCertificate::to_json() const {
    std::ostringstream out;
    const char* status_str = status == Status::CertifiedNone      ? "certified_none"
                             : status == Status::Counterexample   ? "counterexample"
                                                                  : "inconclusive";
    out << "{\"status\":\"" << status_str << "\",\"k\":" << k << ",\"r_min\":" << r_min
        << ",\"r_max\":" << r_max << ",\"forms_checked\":" << forms_checked.str()
        << ",\"set_hash\":\"" << std::hex << set_hash << std::dec << "\"";
    if (counterexample) {
        out << ",\"counterexample\":{\"r\":" << counterexample->r << ",\"b\":" << counterexample->b
            << ",\"blocks\":[";
        for (std::size_t i = 0; i < counterexample->blocks.size(); ++i)
            out << (i ? "," : "") << counterexample->blocks[i];
        out << "]}";
    }
    out << "}";
    return out.str();
}

}  // namespace qramsey
