// qramsey: batch driver for cube/path/tree density-embedding experiments.
// Exit codes: 0 success, 1 negative-but-valid result (e.g. certified none),
// 2 inconclusive (cap or budget hit), 3 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "qramsey/adversary.hpp"
#include "qramsey/builder.hpp"
#include "qramsey/cube.hpp"
#include "qramsey/embedding.hpp"
#include "qramsey/metric.hpp"
#include "qramsey/pathspace.hpp"
#include "qramsey/treespace.hpp"
#include "qramsey/typebounds.hpp"

using json = nlohmann::ordered_json;
using namespace qramsey;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitUsage = 3;

std::string fmt_double(double v) {
    std::ostringstream out;
    out.precision(12);
    out << v;
    return out.str();
}

// every artifact carries the full invocation for byte-exact reruns
struct ConfigEcho {
    std::vector<std::pair<std::string, std::string>> kv;

    void add(const std::string& k, const std::string& v) { kv.emplace_back(k, v); }
    void add(const std::string& k, std::uint64_t v) { kv.emplace_back(k, std::to_string(v)); }
    void add(const std::string& k, const Rat& v) { kv.emplace_back(k, rat_str(v)); }

    json to_json() const {
        json j = json::object();
        for (const auto& [k, v] : kv) j[k] = v;
        return j;
    }
    std::string to_csv_header() const {
        std::string out;
        for (const auto& [k, v] : kv) out += "# " + k + "=" + v + "\n";
        return out;
    }
};

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << "\n";
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + out_path);
        f << text;
    }
}

std::string emb_to_string(const EmbeddingMap& f) {
    std::ostringstream buf;
    write_emb(buf, f);
    return buf.str();
}

json trace_json(const CantorTrace& trace) { return json::parse(trace.to_json()); }

json distortion_json(const DistortionReport& rep) {
    json j;
    j["expansion"] = rat_str(rep.expansion);
    j["contraction"] = rat_str(rep.contraction);
    j["distortion"] = rat_str(rep.distortion);
    j["distortion_float"] = fmt_double(to_double(rep.distortion));
    j["expansion_witness"] = {rep.expansion_witness.first, rep.expansion_witness.second};
    j["contraction_witness"] = {rep.contraction_witness.first, rep.contraction_witness.second};
    return j;
}

json form_json(const UndistortedForm& form) {
    json j;
    j["k"] = form.k;
    j["N"] = form.N;
    j["r"] = form.r;
    j["b"] = CubePoint(form.N, form.b).str();
    json blocks = json::array();
    for (std::uint64_t mask : form.blocks) {
        json coords = json::array();
        for (unsigned c = 0; c < form.N; ++c)
            if ((mask >> c) & 1u) coords.push_back(c + 1);
        blocks.push_back(coords);
    }
    j["blocks"] = blocks;
    return j;
}

struct GlobalOpts {
    unsigned workers = 1;
    std::string format = "json";
    unsigned dense_limit = 28;
    std::uint64_t enum_cap = std::uint64_t(1) << 26;
    std::uint64_t sample_budget = 1000000;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qramsey: metric copies of cubes, paths and trees inside dense subsets"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOpts g;
    app.add_option("--workers", g.workers, "worker threads (results are worker-count invariant)")
        ->capture_default_str();
    app.add_option("--format", g.format, "output format: json|csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    app.add_option("--dense-limit", g.dense_limit, "largest n with 2^n membership arrays")
        ->capture_default_str();
    app.add_option("--enum-cap", g.enum_cap, "enumeration cap for copy searches")->capture_default_str();
    app.add_option("--sample-budget", g.sample_budget, "sampled pair budget")->capture_default_str();

    // --- tails ---
    auto* tails = app.add_subcommand("tails", "binomial tail table with the sub-Gaussian bound");
    unsigned tails_n = 0;
    std::string tails_eps, tails_out;
    std::string tails_step = "1/16";
    tails->add_option("--n", tails_n, "dimension")->required();
    tails->add_option("--eps", tails_eps, "single eps as p/q (otherwise a grid table)");
    tails->add_option("--grid-step", tails_step, "grid step for the table")->capture_default_str();
    tails->add_option("--out", tails_out, "output path (default stdout)");

    // --- neighborhood ---
    auto* nbhd = app.add_subcommand("neighborhood", "eps-neighborhood of a QSET set");
    std::string nbhd_in, nbhd_out, nbhd_eps, nbhd_report;
    nbhd->add_option("--in", nbhd_in, "input QSET")->required();
    nbhd->add_option("--eps", nbhd_eps, "eps as p/q")->required();
    nbhd->add_option("--out", nbhd_out, "output QSET")->required();
    nbhd->add_option("--report", nbhd_report, "report path (default stdout)");

    // --- build-cube ---
    auto* build = app.add_subcommand("build-cube", "rescaling-2 builder or the (1+eps) driver");
    std::string build_in, build_mode = "rescale2", build_eps, build_delta, build_emb, build_trace,
                build_report;
    unsigned build_k = 1;
    build->add_option("--in", build_in, "input QSET")->required();
    build->add_option("--k", build_k, "source cube dimension")->required();
    build->add_option("--mode", build_mode, "rescale2 | driver")
        ->check(CLI::IsMember({"rescale2", "driver"}))
        ->capture_default_str();
    build->add_option("--delta", build_delta, "density parameter p/q")->required();
    build->add_option("--eps", build_eps, "driver mode: eps in (0, 1/4) as p/q");
    build->add_option("--emb-out", build_emb, "write the embedding as EMB v1");
    build->add_option("--trace-out", build_trace, "write the inductive trace as JSON lines");
    build->add_option("--report", build_report, "report path (default stdout)");

    // --- find-copy ---
    auto* findc = app.add_subcommand("find-copy", "first undistorted copy inside a QSET set");
    std::string findc_in, findc_report;
    unsigned findc_k = 1, findc_rmin = 1, findc_rmax = 1;
    bool findc_force = false;
    findc->add_option("--in", findc_in, "input QSET")->required();
    findc->add_option("--k", findc_k, "copy dimension")->required();
    findc->add_option("--r-min", findc_rmin, "smallest rescaling")->capture_default_str();
    findc->add_option("--r-max", findc_rmax, "largest rescaling")->capture_default_str();
    findc->add_flag("--force", findc_force, "ignore the enumeration cap");
    findc->add_option("--report", findc_report, "report path (default stdout)");

    // --- gen-random ---
    auto* genr = app.add_subcommand("gen-random", "seeded Bernoulli subset, optional rejection mode");
    unsigned genr_n = 0;
    std::string genr_p, genr_out, genr_report;
    std::uint64_t genr_seed = 0;
    bool genr_reject = false;
    unsigned genr_k = 2, genr_rmin = 1, genr_rmax = 2, genr_attempts = 1000;
    std::string genr_delta;
    genr->add_option("--n", genr_n, "dimension")->required();
    genr->add_option("--p", genr_p, "inclusion probability p/q")->required();
    genr->add_option("--seed", genr_seed, "seed (required: no wall-clock default)")->required();
    genr->add_flag("--reject", genr_reject, "resample until certified copy-free and dense");
    genr->add_option("--reject-k", genr_k, "copy dimension to exclude")->capture_default_str();
    genr->add_option("--reject-r-min", genr_rmin, "rescaling range start")->capture_default_str();
    genr->add_option("--reject-r-max", genr_rmax, "rescaling range end")->capture_default_str();
    genr->add_option("--reject-delta", genr_delta, "density floor p/q (rejection mode)");
    genr->add_option("--max-attempts", genr_attempts, "rejection budget")->capture_default_str();
    genr->add_option("--out", genr_out, "output QSET")->required();
    genr->add_option("--report", genr_report, "report path (default stdout)");

    // --- certify ---
    auto* cert = app.add_subcommand("certify", "certify a QSET set copy-free over a rescaling range");
    std::string cert_in, cert_report;
    unsigned cert_k = 1, cert_rmin = 1, cert_rmax = 1;
    bool cert_force = false;
    cert->add_option("--in", cert_in, "input QSET")->required();
    cert->add_option("--k", cert_k, "copy dimension")->required();
    cert->add_option("--r-min", cert_rmin, "smallest rescaling")->capture_default_str();
    cert->add_option("--r-max", cert_rmax, "largest rescaling")->capture_default_str();
    cert->add_flag("--force", cert_force, "ignore the enumeration cap");
    cert->add_option("--report", cert_report, "report path (default stdout)");

    // --- lll ---
    auto* lll = app.add_subcommand("lll", "local-lemma budget for the bounded-rescaling regime");
    unsigned lll_k = 2, lll_r = 1;
    std::string lll_delta, lll_out;
    lll->add_option("--k", lll_k, "copy dimension")->required();
    lll->add_option("--R", lll_r, "rescaling bound")->required();
    lll->add_option("--delta", lll_delta, "density p/q in (0, 1/2)")->required();
    lll->add_option("--out", lll_out, "output path (default stdout)");

    // --- gen-cantor ---
    auto* genc = app.add_subcommand("gen-cantor", "middle-interval Cantor subset of a path");
    unsigned genc_n = 0, genc_k = 5;
    std::string genc_out, genc_trace, genc_report;
    genc->add_option("--n", genc_n, "path length")->required();
    genc->add_option("--k", genc_k, "removal parameter (middle 4/k)")->required();
    genc->add_option("--out", genc_out, "output PSET")->required();
    genc->add_option("--trace-out", genc_trace, "recursion trace JSON");
    genc->add_option("--report", genc_report, "report path (default stdout)");

    // --- embed-path ---
    auto* embp = app.add_subcommand("embed-path", "porosity search for a (1+eps) path embedding");
    std::string embp_in, embp_eps, embp_emb, embp_report;
    unsigned embp_k = 2;
    embp->add_option("--in", embp_in, "input PSET")->required();
    embp->add_option("--k", embp_k, "path length to embed")->required();
    embp->add_option("--eps", embp_eps, "eps as p/q")->required();
    embp->add_option("--emb-out", embp_emb, "write the embedding as EMB v1");
    embp->add_option("--report", embp_report, "report path (default stdout)");

    // --- path-oracle ---
    auto* po = app.add_subcommand("path-oracle", "branch-and-bound distortion search over a PSET");
    std::string po_in, po_maxd, po_report;
    unsigned po_k = 2;
    bool po_enumerate = false;
    std::uint64_t po_nodes = 50000000;
    po->add_option("--in", po_in, "input PSET")->required();
    po->add_option("--k", po_k, "path length")->required();
    po->add_option("--max-distortion", po_maxd, "distortion bound p/q")->required();
    po->add_flag("--enumerate", po_enumerate, "collect all maps instead of the first");
    po->add_option("--node-cap", po_nodes, "search node budget")->capture_default_str();
    po->add_option("--report", po_report, "report path (default stdout)");

    // --- gen-tree ---
    auto* gent = app.add_subcommand("gen-tree", "level-set tree subset from the Cantor construction");
    unsigned gent_n = 0, gent_k = 5, gent_mat = 20;
    std::string gent_out, gent_report;
    gent->add_option("--n", gent_n, "tree depth")->required();
    gent->add_option("--k", gent_k, "removal parameter")->required();
    gent->add_option("--out", gent_out, "output TSET (only written when n <= --materialize-limit)");
    gent->add_option("--materialize-limit", gent_mat, "largest depth for explicit TSET output")
        ->capture_default_str();
    gent->add_option("--report", gent_report, "report path (default stdout)");

    // --- tree-check ---
    auto* tc = app.add_subcommand("tree-check", "verify tree replicas, medians and geodesic closeness");
    std::string tc_mode = "replica", tc_emb, tc_vertices, tc_report;
    unsigned tc_r = 1, tc_dim = 8;
    tc->add_option("--mode", tc_mode, "replica | geodesic | median")
        ->check(CLI::IsMember({"replica", "geodesic", "median"}))
        ->capture_default_str();
    tc->add_option("--emb", tc_emb, "EMB v1 file (replica mode, space=tree)");
    tc->add_option("--vertices", tc_vertices, "comma list of tree words ('.' = root)");
    tc->add_option("--r", tc_r, "rescaling (geodesic mode)")->capture_default_str();
    tc->add_option("--tree-dim", tc_dim, "ambient tree depth")->capture_default_str();
    tc->add_option("--report", tc_report, "report path (default stdout)");

    // --- enflo ---
    auto* enf = app.add_subcommand("enflo", "Enflo type-p inequality test for a cube witness");
    unsigned enf_k = 2;
    double enf_p = 2.0;
    std::string enf_images, enf_out;
    enf->add_option("--k", enf_k, "cube dimension")->required();
    enf->add_option("--p", enf_p, "type exponent")->capture_default_str();
    enf->add_option("--images", enf_images,
                    "file with 2^k lines of comma-separated rational coordinates "
                    "(default: the identity 0/1 witness)");
    enf->add_option("--out", enf_out, "output path (default stdout)");

    // --- thm81 ---
    auto* t81 = app.add_subcommand("thm81", "entropy/Harper chain for the distortion lower bound");
    double t81_gamma = 0.04, t81_n = 1000, t81_p = 2.0, t81_tp = 1.0, t81_C = 1.0, t81_c = 1.0,
           t81_cp = 1.0;
    std::string t81_out;
    t81->add_option("--gamma", t81_gamma, "density exponent gamma")->required();
    t81->add_option("--N", t81_n, "ambient dimension")->required();
    t81->add_option("--p", t81_p, "type exponent")->capture_default_str();
    t81->add_option("--tp", t81_tp, "type-p constant of the target")->capture_default_str();
    t81->add_option("--const-C", t81_C, "entropy shift constant")->capture_default_str();
    t81->add_option("--const-c", t81_c, "dimension regime constant")->capture_default_str();
    t81->add_option("--const-cprime", t81_cp, "lower bound scale")->capture_default_str();
    t81->add_option("--out", t81_out, "output path (default stdout)");

    // --- verify-embedding ---
    auto* ver = app.add_subcommand("verify-embedding", "exact distortion report for an EMB v1 file");
    std::string ver_in, ver_report;
    ver->add_option("--in", ver_in, "input EMB")->required();
    ver->add_option("--report", ver_report, "report path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            app.exit(e);
            return kExitOk;
        }
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        cube_limits().dense_limit = g.dense_limit;
        EnumerationOptions enum_opts;
        enum_opts.cap = BigInt(g.enum_cap);
        enum_opts.workers = g.workers;

        if (*tails) {
            ConfigEcho cfg;
            cfg.add("subcommand", "tails");
            cfg.add("n", tails_n);
            cfg.add("workers", g.workers);
            std::vector<Rat> grid;
            if (!tails_eps.empty()) {
                cfg.add("eps", tails_eps);
                grid.push_back(parse_rat(tails_eps));
            } else {
                cfg.add("grid_step", tails_step);
                Rat step = parse_rat(tails_step);
                for (Rat e = 0; e <= 1; e += step) grid.push_back(e);
            }
            if (g.format == "csv") {
                std::string out = cfg.to_csv_header() + "eps,tail,hoeffding\n";
                for (const Rat& e : grid) {
                    Rat w = tail_size(e, tails_n);
                    double bound = std::exp(-to_double(e) * to_double(e) * tails_n / 2.0);
                    out += rat_str(e) + "," + rat_str(w) + "," + fmt_double(bound) + "\n";
                }
                emit(out, tails_out);
            } else {
                json j;
                j["config"] = cfg.to_json();
                json rows = json::array();
                for (const Rat& e : grid) {
                    Rat w = tail_size(e, tails_n);
                    double bound = std::exp(-to_double(e) * to_double(e) * tails_n / 2.0);
                    rows.push_back({{"eps", rat_str(e)}, {"tail", rat_str(w)},
                                    {"hoeffding", fmt_double(bound)}});
                }
                j["rows"] = rows;
                emit(j.dump(2) + "\n", tails_out);
            }
            return kExitOk;
        }

        if (*nbhd) {
            CubeSubset d = load_qset(nbhd_in);
            Rat eps = parse_rat(nbhd_eps);
            CubeSubset result = epsilon_neighborhood(d, eps);
            save_qset(nbhd_out, result);
            ConfigEcho cfg;
            cfg.add("subcommand", "neighborhood");
            cfg.add("in", nbhd_in);
            cfg.add("eps", eps);
            cfg.add("out", nbhd_out);
            cfg.add("workers", g.workers);
            json j;
            j["config"] = cfg.to_json();
            j["measure_before"] = rat_str(d.measure());
            j["measure_after"] = rat_str(result.measure());
            j["radius"] = rat_floor(eps * d.dim()).str();
            emit(j.dump(2) + "\n", nbhd_report);
            return kExitOk;
        }

        if (*build) {
            CubeSubset d = load_qset(build_in);
            Rat delta = parse_rat(build_delta);
            ConfigEcho cfg;
            cfg.add("subcommand", "build-cube");
            cfg.add("in", build_in);
            cfg.add("mode", build_mode);
            cfg.add("k", build_k);
            cfg.add("delta", delta);
            cfg.add("workers", g.workers);
            json j;
            if (build_mode == "rescale2") {
                Rescaling2Result res = build_rescaling2_copy(d, build_k, delta);
                j["config"] = cfg.to_json();
                j["success"] = res.success;
                if (!build_trace.empty()) emit(trace_to_jsonl(res.trace), build_trace);
                if (res.success) {
                    auto form = canonical_form(*res.map);
                    if (!std::holds_alternative<UndistortedForm>(form))
                        throw std::logic_error("built map failed canonical verification");
                    j["rescaling"] = std::get<UndistortedForm>(form).r;
                    j["distortion"] = rat_str(distortion(*res.map).distortion);
                    if (!build_emb.empty()) emit(emb_to_string(*res.map), build_emb);
                } else {
                    j["failure_stage"] = res.failure_stage;
                }
                emit(j.dump(2) + "\n", build_report);
                return res.success ? kExitOk : kExitNegative;
            }
            Rat eps = parse_rat(build_eps.empty() ? "1/5" : build_eps);
            cfg.add("eps", eps);
            BlockCopyOptions opts;
            opts.workers = g.workers;
            opts.sample_pairs = g.sample_budget;
            DriverResult res = embed_cube_driver(d, build_k, eps, delta, opts);
            j["config"] = cfg.to_json();
            j["success"] = res.success;
            j["suffix_bits"] = res.suffix_bits;
            j["restricted_density"] = rat_str(res.restricted_density);
            j["inflated_density"] = rat_str(res.inflated_density);
            if (res.success) {
                j["distortion"] = rat_str(distortion(*res.map).distortion);
                if (!build_emb.empty()) emit(emb_to_string(*res.map), build_emb);
            } else {
                j["failure_stage"] = res.failure_stage;
            }
            emit(j.dump(2) + "\n", build_report);
            return res.success ? kExitOk : kExitNegative;
        }

        if (*findc) {
            CubeSubset d = load_qset(findc_in);
            enum_opts.force = findc_force;
            CopySearchResult res = find_copy_brute(d, findc_k, findc_rmin, findc_rmax, enum_opts);
            ConfigEcho cfg;
            cfg.add("subcommand", "find-copy");
            cfg.add("in", findc_in);
            cfg.add("k", findc_k);
            cfg.add("r_min", findc_rmin);
            cfg.add("r_max", findc_rmax);
            cfg.add("workers", g.workers);
            json j;
            j["config"] = cfg.to_json();
            j["nodes"] = res.forms_checked.str();
            if (res.capped) {
                j["status"] = "inconclusive";
                emit(j.dump(2) + "\n", findc_report);
                return kExitInconclusive;
            }
            if (res.form) {
                j["status"] = "found";
                j["form"] = form_json(*res.form);
            } else {
                j["status"] = "none";
            }
            emit(j.dump(2) + "\n", findc_report);
            return res.form ? kExitOk : kExitNegative;
        }

        if (*genr) {
            RandomSetRecipe recipe;
            recipe.n = genr_n;
            recipe.p = parse_rat(genr_p);
            recipe.seed = genr_seed;
            ConfigEcho cfg;
            cfg.add("subcommand", "gen-random");
            cfg.add("n", genr_n);
            cfg.add("p", recipe.p);
            cfg.add("seed", genr_seed);
            cfg.add("reject", std::uint64_t(genr_reject ? 1 : 0));
            if (genr_reject) {
                RandomSetRecipe::Rejection rej;
                rej.k = genr_k;
                rej.r_min = genr_rmin;
                rej.r_max = genr_rmax;
                rej.delta = parse_rat(genr_delta.empty() ? genr_p : genr_delta);
                rej.max_attempts = genr_attempts;
                recipe.rejection = rej;
                cfg.add("reject_k", genr_k);
                cfg.add("reject_r_min", genr_rmin);
                cfg.add("reject_r_max", genr_rmax);
                cfg.add("reject_delta", rej.delta);
                cfg.add("max_attempts", genr_attempts);
            }
            cfg.add("out", genr_out);
            cfg.add("workers", g.workers);
            SampleResult res = sample_set(recipe, g.workers);
            json j;
            j["config"] = cfg.to_json();
            j["attempts"] = res.stats.attempts;
            j["nodes"] = res.stats.forms_checked.str();
            if (!res.set) {
                j["status"] = "exhausted";
                j["failure"] = res.failure;
                emit(j.dump(2) + "\n", genr_report);
                return kExitInconclusive;
            }
            save_qset(genr_out, *res.set);
            j["status"] = "ok";
            j["measure"] = rat_str(res.set->measure());
            {
                std::ostringstream hex;
                hex << std::hex << qset_content_hash(*res.set);
                j["set_hash"] = hex.str();
            }
            if (recipe.rejection) {
                // union-bound regime predictor for the attempted exclusion
                PBadReport pb = p_bad(genr_n, recipe.rejection->k, recipe.rejection->delta);
                j["p_bad"] = {{"log_chernoff", fmt_double(pb.log_first)},
                              {"log_union", fmt_double(pb.log_second)},
                              {"value", fmt_double(pb.p_bad)},
                              {"existence_regime", pb.existence_regime}};
            }
            emit(j.dump(2) + "\n", genr_report);
            return kExitOk;
        }

        if (*cert) {
            CubeSubset d = load_qset(cert_in);
            enum_opts.force = cert_force;
            NoCopyCertificate c = certify_no_copy(d, cert_k, cert_rmin, cert_rmax, enum_opts);
            ConfigEcho cfg;
            cfg.add("subcommand", "certify");
            cfg.add("in", cert_in);
            cfg.add("k", cert_k);
            cfg.add("r_min", cert_rmin);
            cfg.add("r_max", cert_rmax);
            cfg.add("workers", g.workers);
            json j;
            j["config"] = cfg.to_json();
            j["certificate"] = json::parse(c.to_json());
            emit(j.dump(2) + "\n", cert_report);
            switch (c.status) {
                case NoCopyCertificate::Status::Counterexample: return kExitOk;
                case NoCopyCertificate::Status::CertifiedNone: return kExitNegative;
                case NoCopyCertificate::Status::Inconclusive: return kExitInconclusive;
            }
        }

        if (*lll) {
            Rat delta = parse_rat(lll_delta);
            LllBudget b = lll_certificate(lll_k, lll_r, delta);
            ConfigEcho cfg;
            cfg.add("subcommand", "lll");
            cfg.add("k", lll_k);
            cfg.add("R", lll_r);
            cfg.add("delta", delta);
            if (g.format == "csv") {
                std::string out = cfg.to_csv_header() + "log_p_event,n_max_lll,n_max_survival,n_max\n" +
                                  fmt_double(b.log_p_event) + "," + fmt_double(b.n_max_lll) + "," +
                                  fmt_double(b.n_max_survival) + "," + std::to_string(b.n_max) + "\n";
                emit(out, lll_out);
            } else {
                json j;
                j["config"] = cfg.to_json();
                j["log_p_event"] = fmt_double(b.log_p_event);
                j["n_max_lll"] = fmt_double(b.n_max_lll);
                j["n_max_survival"] = fmt_double(b.n_max_survival);
                j["n_max"] = b.n_max;
                emit(j.dump(2) + "\n", lll_out);
            }
            return kExitOk;
        }

        if (*genc) {
            auto [d, trace] = cantor_build(genc_n, genc_k);
            save_pset(genc_out, d);
            if (!genc_trace.empty()) emit(trace.to_json() + "\n", genc_trace);
            ConfigEcho cfg;
            cfg.add("subcommand", "gen-cantor");
            cfg.add("n", genc_n);
            cfg.add("k", genc_k);
            cfg.add("out", genc_out);
            json j;
            j["config"] = cfg.to_json();
            j["size"] = d.members.size();
            j["density"] = rat_str(d.measure());
            j["levels"] = trace.levels.size();
            emit(j.dump(2) + "\n", genc_report);
            return kExitOk;
        }

        if (*embp) {
            PathSubset d = load_pset(embp_in);
            Rat eps = parse_rat(embp_eps);
            PorosityResult res = porosity_embed(d, embp_k, eps);
            ConfigEcho cfg;
            cfg.add("subcommand", "embed-path");
            cfg.add("in", embp_in);
            cfg.add("k", embp_k);
            cfg.add("eps", eps);
            json j;
            j["config"] = cfg.to_json();
            if (res.map) {
                j["status"] = "embedded";
                j["distortion"] = rat_str(distortion(*res.map).distortion);
                json values = json::array();
                for (std::uint64_t img : res.map->images) values.push_back(img + 1);
                j["values"] = values;
                if (!embp_emb.empty()) emit(emb_to_string(*res.map), embp_emb);
                emit(j.dump(2) + "\n", embp_report);
                return kExitOk;
            }
            j["status"] = "gap-certificate";
            json gaps = json::array();
            for (const PorosityGap& gap : res.gaps)
                gaps.push_back({{"ambient", {gap.ambient.lo, gap.ambient.hi}},
                                {"index", gap.index},
                                {"empty", {gap.empty.lo, gap.empty.hi}}});
            j["gaps"] = gaps;
            json leaves = json::array();
            for (const PorosityLeaf& leaf : res.leaves)
                leaves.push_back({{"interval", {leaf.interval.lo, leaf.interval.hi}},
                                  {"reason", leaf.reason}});
            j["leaves"] = leaves;
            json lengths = json::array();
            for (std::int64_t len : res.depth_lengths) lengths.push_back(len);
            j["depth_lengths"] = lengths;
            emit(j.dump(2) + "\n", embp_report);
            return kExitNegative;
        }

        if (*po) {
            PathSubset d = load_pset(po_in);
            PathSearchOptions opts;
            opts.enumerate = po_enumerate;
            opts.node_cap = po_nodes;
            PathSearchResult res = path_distortion_search(d, po_k, parse_rat(po_maxd), opts);
            ConfigEcho cfg;
            cfg.add("subcommand", "path-oracle");
            cfg.add("in", po_in);
            cfg.add("k", po_k);
            cfg.add("max_distortion", po_maxd);
            json j;
            j["config"] = cfg.to_json();
            j["nodes"] = res.nodes;
            if (res.capped) {
                j["status"] = "inconclusive";
                emit(j.dump(2) + "\n", po_report);
                return kExitInconclusive;
            }
            if (res.first) {
                j["status"] = "found";
                j["map"] = *res.first;
                j["distortion"] = rat_str(path_map_distortion(*res.first));
                if (po_enumerate) j["count"] = res.all.size();
            } else {
                j["status"] = "none";
            }
            emit(j.dump(2) + "\n", po_report);
            return res.first ? kExitOk : kExitNegative;
        }

        if (*gent) {
            auto [set, trace] = tree_level_set(gent_n, gent_k);
            ConfigEcho cfg;
            cfg.add("subcommand", "gen-tree");
            cfg.add("n", gent_n);
            cfg.add("k", gent_k);
            json j;
            j["config"] = cfg.to_json();
            j["levels"] = set.levels;
            j["measure"] = rat_str(set.measure());
            if (!gent_out.empty()) {
                if (gent_n <= gent_mat) {
                    save_tset(gent_out, set.materialize(gent_mat));
                    j["tset"] = gent_out;
                } else {
                    j["tset"] = nullptr;
                    j["note"] = "depth above the materialize limit; level list only";
                }
            }
            emit(j.dump(2) + "\n", gent_report);
            return kExitOk;
        }

        if (*tc) {
            ConfigEcho cfg;
            cfg.add("subcommand", "tree-check");
            cfg.add("mode", tc_mode);
            json j;
            j["config"] = cfg.to_json();
            if (tc_mode == "replica") {
                if (tc_emb.empty()) throw CLI::ValidationError("--emb required in replica mode");
                EmbeddingMap f = load_emb(tc_emb);
                ReplicaReport rep = replica_verify(f);
                j["valid"] = rep.valid;
                json viol = json::array();
                for (const auto& v : rep.violations)
                    viol.push_back({{"kind", v.kind}, {"vertex", v.w.str()}, {"detail", v.detail}});
                j["violations"] = viol;
                emit(j.dump(2) + "\n", tc_report);
                return rep.valid ? kExitOk : kExitNegative;
            }
            // vertex list modes
            std::vector<std::uint64_t> ids;
            std::stringstream ss(tc_vertices);
            std::string tok;
            while (std::getline(ss, tok, ',')) ids.push_back(TreeVertex::parse(tok).heap_id());
            if (tc_mode == "median") {
                if (ids.size() != 3) throw CLI::ValidationError("median mode needs 3 vertices");
                TreeVertex m = TreeVertex::from_heap(tripod_median_ids(ids[0], ids[1], ids[2]));
                j["median"] = m.str();
                emit(j.dump(2) + "\n", tc_report);
                return kExitOk;
            }
            GeodesicClosenessReport rep = geodesic_closeness_check(ids, tc_dim, tc_r);
            j["ok"] = rep.ok;
            j["max_distance_to_geodesic"] = rat_str(rep.max_distance_to_geodesic);
            j["stated_bound"] = rat_str(rep.stated_bound);
            j["max_median_distance"] = rat_str(rep.max_median_distance);
            j["tight_bound_holds"] = rep.tight_bound_holds;
            emit(j.dump(2) + "\n", tc_report);
            return rep.ok ? kExitOk : kExitNegative;
        }

        if (*enf) {
            EnfloWitness w;
            w.k = enf_k;
            w.p = enf_p;
            std::uint64_t m = std::uint64_t(1) << enf_k;
            if (enf_images.empty()) {
                w.images.resize(m);
                for (std::uint64_t a = 0; a < m; ++a) {
                    std::vector<Rat> v(enf_k);
                    for (unsigned i = 0; i < enf_k; ++i) v[i] = Rat((a >> i) & 1u);
                    w.images[a] = std::move(v);
                }
            } else {
                std::ifstream f(enf_images);
                if (!f) throw std::runtime_error("cannot open " + enf_images);
                std::string line;
                while (std::getline(f, line)) {
                    if (line.empty()) continue;
                    std::vector<Rat> v;
                    std::stringstream ls(line);
                    std::string cell;
                    while (std::getline(ls, cell, ',')) v.push_back(parse_rat(cell));
                    w.images.push_back(std::move(v));
                }
                if (w.images.size() != m)
                    throw std::runtime_error("expected 2^k image lines, got " +
                                             std::to_string(w.images.size()));
            }
            EnfloReport rep = enflo_check(w);
            ConfigEcho cfg;
            cfg.add("subcommand", "enflo");
            cfg.add("k", enf_k);
            cfg.add("p", fmt_double(enf_p));
            if (g.format == "csv") {
                std::string out = cfg.to_csv_header() + "diagonal,edge,ratio,implied_type_const\n" +
                                  fmt_double(rep.diagonal_sum) + "," + fmt_double(rep.edge_sum) + "," +
                                  fmt_double(rep.ratio) + "," + fmt_double(rep.implied_type_const) + "\n";
                emit(out, enf_out);
            } else {
                json j;
                j["config"] = cfg.to_json();
                j["diagonal_sum"] = fmt_double(rep.diagonal_sum);
                j["edge_sum"] = fmt_double(rep.edge_sum);
                if (rep.exact) {
                    j["diagonal_exact"] = rat_str(rep.diagonal_exact);
                    j["edge_exact"] = rat_str(rep.edge_exact);
                }
                j["ratio"] = fmt_double(rep.ratio);
                j["implied_type_const"] = fmt_double(rep.implied_type_const);
                emit(j.dump(2) + "\n", enf_out);
            }
            return kExitOk;
        }

        if (*t81) {
            BoundChainReport rep = bound_chain(t81_gamma, t81_n, t81_p, t81_tp,
                                                  BoundChainConfig{t81_C, t81_c, t81_cp});
            ConfigEcho cfg;
            cfg.add("subcommand", "thm81");
            cfg.add("gamma", fmt_double(t81_gamma));
            cfg.add("N", fmt_double(t81_n));
            cfg.add("p", fmt_double(t81_p));
            cfg.add("tp", fmt_double(t81_tp));
            json j;
            j["config"] = cfg.to_json();
            j["report"] = json::parse(rep.to_json());
            emit(j.dump(2) + "\n", t81_out);
            return rep.failure.empty() ? kExitOk : kExitNegative;
        }

        if (*ver) {
            EmbeddingMap f = load_emb(ver_in);
            DistortionReport rep = distortion(f);
            ConfigEcho cfg;
            cfg.add("subcommand", "verify-embedding");
            cfg.add("in", ver_in);
            json j;
            j["config"] = cfg.to_json();
            j["report"] = distortion_json(rep);
            emit(j.dump(2) + "\n", ver_report);
            return kExitOk;
        }
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInconclusive;
    }
    return kExitUsage;
}
