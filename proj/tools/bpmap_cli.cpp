// Command-line front end: criticality analysis, conditioned sampling, exact
// enumeration, the universality experiment, reference-snake batches, and the
// exact verification suite. All randomness funnels through --seed; repeated
// invocations with the same seed and worker count write identical bytes
// (wall-clock timing goes to stderr only).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bpmap/enumerate.hpp"
#include "bpmap/harness.hpp"
#include "bpmap/mobile_map.hpp"
#include "bpmap/parallel.hpp"
#include "bpmap/sampler.hpp"
#include "bpmap/snake_ref.hpp"
#include "bpmap/stats.hpp"
#include "bpmap/trees.hpp"
#include "bpmap/weights.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace bpmap;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitClassification = 1;
constexpr int kExitBudget = 2;
constexpr int kExitInput = 3;

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot read " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << content;
}

struct GlobalOpts {
    uint64_t seed = 0;
    int workers = 1;
    std::string out;
    std::string format = "json";
};

WeightSequence load_weights(const std::string& path) { return WeightSequence::from_json(slurp(path)); }

// The sample command accepts either a weight-sequence file or a ready-made
// branching-law file.
BranchingLaw load_law(const std::string& path, std::string* family_desc) {
    auto text = slurp(path);
    auto j = json::parse(text);
    if (j.contains("mu0_param")) {
        *family_desc = "branching-law:" + path;
        return BranchingLaw::from_json(text);
    }
    auto q = WeightSequence::from_json(text);
    auto rep = classify(q);
    if (!rep.admissible()) throw std::invalid_argument("weight sequence is not admissible");
    *family_desc = path;
    return derive_branching(q, rep);
}

ConditioningTarget::Kind parse_kind(const std::string& s) {
    if (s == "faces") return ConditioningTarget::Kind::FaceCount;
    if (s == "vertices") return ConditioningTarget::Kind::VertexCountWhite;
    throw std::invalid_argument("target must be 'faces' or 'vertices'");
}

int cmd_analyze(const GlobalOpts& g, const std::string& weights_path, double epsilon) {
    auto q = load_weights(weights_path);
    auto rep = classify(q, epsilon);
    json out;
    out["criticality"] = json::parse(rep.to_json());
    if (rep.status == Criticality::RegularCritical) {
        out["scaling_constants"] = json::parse(scaling_constants(q, rep).to_json());
        out["branching_law"] = json::parse(derive_branching(q, rep).to_json());
    }
    std::string text = out.dump(2) + "\n";
    std::cout << text;
    if (!g.out.empty()) {
        fs::create_directories(g.out);
        spit(g.out + "/analysis.json", text);
    }
    return rep.status == Criticality::RegularCritical ? kExitOk : kExitClassification;
}

int cmd_sample(const GlobalOpts& g, const std::string& weights_path, const std::string& target_str,
               int64_t n, int64_t count, bool emit_edgelist, int64_t max_attempts, int64_t max_size) {
    std::string family;
    auto law = load_law(weights_path, &family);
    SampleRunConfig cfg;
    cfg.target = {parse_kind(target_str), n};
    cfg.count = count;
    cfg.seed = g.seed;
    cfg.workers = g.workers;
    cfg.max_attempts = max_attempts;
    cfg.max_tree_size = max_size;

    std::vector<SampleRecord> records;
    try {
        records = run_samples(law, cfg);
    } catch (const BudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBudget;
    }

    fs::create_directories(g.out);
    json meta;
    meta["family"] = family;
    meta["target"] = target_str;
    meta["n"] = n;
    meta["count"] = count;
    meta["seed"] = g.seed;
    meta["workers"] = g.workers;
    meta["max_attempts"] = max_attempts;
    meta["max_tree_size"] = max_size;
    spit(g.out + "/meta.json", meta.dump(2) + "\n");

    if (g.format == "csv") {
        std::ostringstream os;
        os << "index,radius,two_point,vertices,faces,attempts,aborted_overflow,aborted_overshoot\n";
        for (size_t i = 0; i < records.size(); ++i) {
            const auto& r = records[i];
            os << i << "," << r.radius << "," << r.two_point << "," << r.vertices << "," << r.faces << ","
               << r.stats.attempts << "," << r.stats.aborted_overflow << "," << r.stats.aborted_overshoot
               << "\n";
        }
        spit(g.out + "/samples.csv", os.str());
    } else {
        std::ostringstream os;
        for (size_t i = 0; i < records.size(); ++i) {
            const auto& r = records[i];
            json line;
            line["index"] = i;
            line["radius"] = r.radius;
            line["two_point"] = r.two_point;
            line["vertices"] = r.vertices;
            line["faces"] = r.faces;
            line["attempts"] = r.stats.attempts;
            line["aborted_overflow"] = r.stats.aborted_overflow;
            line["aborted_overshoot"] = r.stats.aborted_overshoot;
            os << line.dump() << "\n";
        }
        spit(g.out + "/samples.jsonl", os.str());
    }

    {
        std::ostringstream os;
        for (const auto& r : records) {
            json line;
            line["mobile"] = json::parse(mobile_to_json(r.mobile));
            line["sidecar"] = {{"attempts", r.stats.attempts},
                               {"aborted_overflow", r.stats.aborted_overflow},
                               {"aborted_overshoot", r.stats.aborted_overshoot},
                               {"seed", r.stats.seed}};
            os << line.dump() << "\n";
        }
        spit(g.out + "/mobiles.jsonl", os.str());
    }
    {
        std::ostringstream os;
        os << "index,distance,count\n";
        for (size_t i = 0; i < records.size(); ++i)
            for (size_t k = 0; k < records[i].profile.counts.size(); ++k)
                os << i << "," << k << "," << records[i].profile.counts[k] << "\n";
        spit(g.out + "/profiles.csv", os.str());
    }
    if (emit_edgelist) {
        std::ostringstream os;
        for (size_t i = 0; i < records.size(); ++i) {
            os << "# sample " << i << "\n";
            auto built = build_map(records[i].mobile);
            if (std::holds_alternative<PlanarMap>(built))
                os << map_edgelist(std::get<PlanarMap>(built));
        }
        spit(g.out + "/maps.edgelist", os.str());
    }
    std::cout << "wrote " << records.size() << " samples to " << g.out << "\n";
    return kExitOk;
}

int cmd_enumerate(const GlobalOpts& g, const std::string& weights_path, const std::string& target_str,
                  int64_t n, int64_t white_cap, int64_t black_cap) {
    auto q = load_weights(weights_path);
    auto rep = classify(q);
    if (!rep.admissible()) throw std::invalid_argument("weight sequence is not admissible");
    Rational Z = rep.Z_exact ? *rep.Z_exact : rationalize(rep.Z);
    EnumBounds b;
    b.kind = parse_kind(target_str);
    b.n = n;
    b.white_child_cap = white_cap > 0 ? white_cap : n;
    b.black_child_cap = black_cap > 0 ? black_cap : std::max<int64_t>(8, n);
    auto dist = exact_conditional_law(q, Z, b);
    std::string text = dist.to_json() + "\n";
    std::cout << text;
    if (!g.out.empty()) {
        fs::create_directories(g.out);
        spit(g.out + "/exact_law.json", text);
    }
    return kExitOk;
}

int cmd_universality(const GlobalOpts& g, const std::vector<std::string>& weight_paths,
                     const std::string& target_str, int64_t n, int64_t count, int64_t reference_m,
                     int64_t reference_count, double accept_p, double control_p, int64_t max_size) {
    ExperimentSpec spec;
    for (const auto& p : weight_paths) {
        spec.family_names.push_back(fs::path(p).stem().string());
        spec.families.push_back(load_weights(p));
    }
    spec.kind = parse_kind(target_str);
    spec.n = n;
    spec.replicates = count;
    spec.seed = g.seed;
    spec.workers = g.workers;
    spec.reference_m = reference_m;
    spec.reference_count = reference_count;
    spec.accept_p = accept_p;
    spec.control_p = control_p;
    spec.max_tree_size = max_size;
    fs::create_directories(g.out);
    spec.cache_dir = g.out + "/cache";

    UniversalityResult res;
    try {
        res = run_universality(spec);
    } catch (const BudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBudget;
    }
    spit(g.out + "/universality.json", res.to_json() + "\n");
    spit(g.out + "/samples.csv", res.samples_csv());
    std::cout << res.to_json() << "\n";
    return kExitOk;
}

int cmd_snake_ref(const GlobalOpts& g, int64_t m, int64_t count) {
    fs::create_directories(g.out);
    auto gfun = [](double x) { return std::exp(-x); };
    auto st = reference_statistics_cached(g.out, count, m, g.seed, g.workers, gfun, "expneg");
    json summary;
    summary["m"] = st.m;
    summary["samples"] = st.samples;
    summary["seed"] = st.seed;
    auto quantiles = [&](const std::vector<double>& v) {
        json q;
        q["q10"] = v[v.size() / 10];
        q["q50"] = v[v.size() / 2];
        q["q90"] = v[9 * v.size() / 10];
        return q;
    };
    summary["delta"] = quantiles(st.delta);
    summary["delta_plus"] = quantiles(st.delta_plus);
    summary["neg_delta_minus"] = quantiles(st.neg_delta_minus);
    summary["profile_integral"] = quantiles(st.profile_integral);
    std::string text = summary.dump(2) + "\n";
    std::cout << text;
    spit(g.out + "/snake_ref_summary.json", text);
    return kExitOk;
}

// The exact-oracle verification drive: rational arithmetic and exhaustively
// enumerated identities only; any failure exits nonzero.
int cmd_verify() {
    int failures = 0;
    auto check = [&](const std::string& name, bool ok) {
        std::cout << (ok ? "ok   " : "FAIL ") << name << "\n";
        if (!ok) ++failures;
    };

    auto quad = WeightSequence::dirac(2, Rational(1, 12));
    auto geom = WeightSequence::geometric(Rational(1, 8), 1);

    check("label-vector counts N(1..3) = 1, 3, 10",
          n_coeff(1) == 1 && n_coeff(2) == 3 && n_coeff(3) == 10);

    auto rq = classify(quad);
    check("quadrangulation fixed point Z = 2 exactly",
          rq.status == Criticality::RegularCritical && rq.Z_exact && *rq.Z_exact == 2);
    auto rg = classify(geom);
    check("geometric-eighth fixed point Z = 3/2 exactly",
          rg.status == Criticality::RegularCritical && rg.Z_exact && *rg.Z_exact == Rational(3, 2));

    auto t3 = tune_alpha(WeightSequence::dirac(3, 1));
    check("hexangulation tuning alpha = 2/135 exactly",
          t3.has_value() && t3->scale_exact && *t3->scale_exact == Rational(2, 135));
    auto tb = tune_beta(WeightSequence::geometric(1, Rational(1, 8)));
    check("constant-sequence tuning beta = 1/8 exactly",
          tb.has_value() && tb->scale_exact && *tb->scale_exact == Rational(1, 8));

    bool sc_ok = true;
    try {
        auto sq = scaling_constants(quad, rq);
        sc_ok &= std::abs(sq.rho - 2.0) < 1e-12 && std::abs(sq.sigma - 1.0) < 1e-12;
        auto sg = scaling_constants(geom, rg);
        sc_ok &= std::abs(sg.rho - 6.75) < 1e-9 && std::abs(sg.C_vertex - std::pow(3.0, 0.25)) < 1e-9;
    } catch (const std::exception&) {
        sc_ok = false;
    }
    check("scaling constants and their two-route cross-checks", sc_ok);

    bool disp_ok = true;
    for (int64_t k = 1; k <= 6 && disp_ok; ++k) {
        auto de = displacement_enum(k);
        for (int64_t l = -1; l <= k; ++l)
            disp_ok &= de.marginal[0][l + 1] ==
                       Rational(binomial(2 * k - l - 1, k - 1)) / Rational(binomial(2 * k + 1, k + 1));
        disp_ok &= de.var_x[0] == Rational(2 * k, k + 2);
        disp_ok &= de.cov_x1_x2 == -de.var_x[0] / k;
        disp_ok &= de.sum_var_prefix == Rational(k * (k + 1), 3);
    }
    check("displacement marginals, variances, prefix sums (k <= 6)", disp_ok);

    auto mu0 = ExactOffspring::mu0_of(Rational(2));
    auto mu1 = ExactOffspring::mu1_of(quad, Rational(2));
    bool counts_ok = true, label_count_ok = true, biject_ok = true, bfs_ok = true;
    std::vector<int64_t> expected = {3, 18, 135};
    for (int64_t n = 1; n <= 3; ++n) {
        EnumBounds b;
        b.kind = ConditioningTarget::Kind::FaceCount;
        b.n = n;
        b.white_child_cap = n;
        b.black_child_cap = 2;
        int64_t mobiles = 0;
        std::set<std::vector<int64_t>> canon;
        for (const auto& t : enum_trees(b, mu0, mu1)) {
            auto labelings = enum_labelings(t);
            BigInt want = 1;
            auto h = height_process(t.tree);
            for (int32_t v = 0; v < t.size(); ++v)
                if (h[v] & 1) want *= n_coeff(t.tree.child_count[v] + 1);
            label_count_ok &= BigInt(static_cast<int64_t>(labelings.size())) == want;
            for (auto& labels : labelings) {
                LabeledMobile mob{t, labels};
                ++mobiles;
                auto built = build_map(mob);
                if (!std::holds_alternative<PlanarMap>(built)) {
                    biject_ok = false;
                    continue;
                }
                const auto& map = std::get<PlanarMap>(built);
                try {
                    validate_map(map);
                } catch (const std::exception&) {
                    biject_ok = false;
                }
                for (int64_t d : face_degrees(map)) biject_ok &= d == 4;
                canon.insert(canonical_form(map));
                auto dist = bfs_distances(map, map.pointed_vertex);
                int64_t mn = *std::min_element(mob.labels.begin(), mob.labels.end());
                int32_t rank = 0;
                for (int32_t v = 0; v < mob.size(); ++v) {
                    if (h[v] & 1) continue;
                    bfs_ok &= dist[rank] == mob.labels[v] - mn + 1;
                    ++rank;
                }
                const auto& e = map.darts[map.root_dart];
                bfs_ok &= dist[map.darts[e.twin].origin] > dist[e.origin];
            }
        }
        counts_ok &= mobiles == expected[static_cast<size_t>(n - 1)];
        biject_ok &= static_cast<int64_t>(canon.size()) == expected[static_cast<size_t>(n - 1)];
    }
    check("mobile counts 3, 18, 135 at 1..3 faces", counts_ok);
    check("labeling counts equal the composition products", label_count_ok);
    check("maps pairwise distinct, planar, all faces degree 4", biject_ok);
    check("graph distances equal shifted labels; root oriented outward", bfs_ok);

    bool law_ok = true;
    for (int64_t n = 1; n <= 3; ++n) {
        EnumBounds b;
        b.kind = ConditioningTarget::Kind::FaceCount;
        b.n = n;
        b.white_child_cap = n;
        b.black_child_cap = 2;
        auto d = exact_conditional_law(quad, Rational(2), b);
        law_ok &= d.complete;
        Rational sum = 0;
        for (auto& [k, p] : d.entries) sum += p / d.total;
        law_ok &= sum == 1;
    }
    check("exact conditional laws sum to one", law_ok);

    bool part_ok = true;
    Rational prev = 0;
    for (int64_t N = 0; N <= 5; ++N) {
        auto s = partition_partial_sum(quad, N);
        part_ok &= s > prev && s < 2;
        prev = s;
    }
    part_ok &= partition_partial_sum(quad, 1) == Rational(5, 4);
    check("partition partial sums increase toward Z = 2", part_ok);

    return failures == 0 ? kExitOk : kExitClassification;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boltzmann bipartite planar maps: sampling, exact oracles, scaling experiments"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOpts g;
    app.add_option("--seed", g.seed, "master RNG seed");
    app.add_option("--workers", g.workers, "worker thread count");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--format", g.format, "samples output format: json|csv")
        ->check(CLI::IsMember({"json", "csv"}));

    std::string weights_path, target_str = "faces";
    double epsilon = 1e-8;
    int64_t n = 1, count = 1, white_cap = 0, black_cap = 0;
    int64_t max_attempts = 100000000, max_size = 10000000;
    bool emit_edgelist = false;
    std::vector<std::string> weight_paths;
    int64_t reference_m = 5000, reference_count = 1000;
    double accept_p = 0.01, control_p = 0.001;
    int64_t snake_m = 5000, snake_count = 1000;

    auto* analyze = app.add_subcommand("analyze", "classify a weight sequence and derive its constants");
    analyze->add_option("weights", weights_path, "weight sequence JSON file")->required();
    analyze->add_option("--epsilon", epsilon, "criticality tolerance");

    auto* sample = app.add_subcommand("sample", "draw conditioned Boltzmann maps");
    sample->add_option("--weights", weights_path, "weight sequence or branching-law JSON")->required();
    sample->add_option("--target", target_str, "conditioning: faces|vertices");
    sample->add_option("--n", n, "conditioning size")->required();
    sample->add_option("--count", count, "number of samples");
    sample->add_flag("--emit-edgelist", emit_edgelist, "write plain-text edge lists with distances");
    sample->add_option("--max-attempts", max_attempts, "rejection attempt budget per sample");
    sample->add_option("--max-size", max_size, "tree size cap (early abort)");

    auto* enumerate = app.add_subcommand("enumerate", "exact conditional mobile law at small sizes");
    enumerate->add_option("--weights", weights_path)->required();
    enumerate->add_option("--target", target_str, "conditioning: faces|vertices");
    enumerate->add_option("--n", n, "conditioning size")->required();
    enumerate->add_option("--white-cap", white_cap, "white child-count cap (default: n)");
    enumerate->add_option("--black-cap", black_cap, "black child-count cap");

    auto* universality = app.add_subcommand("universality", "rescaled-radius universality experiment");
    universality->add_option("--weights", weight_paths, "two or more weight sequence files")->required();
    universality->add_option("--target", target_str, "conditioning: faces|vertices");
    universality->add_option("--n", n, "conditioning size")->required();
    universality->add_option("--count", count, "replicates per family")->required();
    universality->add_option("--reference-m", reference_m, "reference snake conditioning size");
    universality->add_option("--reference-count", reference_count, "reference snake sample count");
    universality->add_option("--accept-p", accept_p, "KS acceptance threshold");
    universality->add_option("--control-p", control_p, "negative-control rejection threshold");
    universality->add_option("--max-size", max_size, "tree size cap");

    auto* snake = app.add_subcommand("snake-ref", "reference snake sample batches (cached)");
    snake->add_option("--m", snake_m, "conditioning size");
    snake->add_option("--count", snake_count, "sample count");

    app.add_subcommand("verify", "run the exact oracle suite");

    CLI11_PARSE(app, argc, argv);

    try {
        auto t0 = std::chrono::steady_clock::now();
        int rc = kExitInput;
        if (app.got_subcommand("analyze")) rc = cmd_analyze(g, weights_path, epsilon);
        if (app.got_subcommand("sample")) {
            if (g.out.empty()) g.out = "bpmap_out";
            rc = cmd_sample(g, weights_path, target_str, n, count, emit_edgelist, max_attempts, max_size);
        }
        if (app.got_subcommand("enumerate"))
            rc = cmd_enumerate(g, weights_path, target_str, n, white_cap, black_cap);
        if (app.got_subcommand("universality")) {
            if (g.out.empty()) g.out = "bpmap_out";
            rc = cmd_universality(g, weight_paths, target_str, n, count, reference_m, reference_count,
                                  accept_p, control_p, max_size);
        }
        if (app.got_subcommand("snake-ref")) {
            if (g.out.empty()) g.out = "bpmap_out";
            rc = cmd_snake_ref(g, snake_m, snake_count);
        }
        if (app.got_subcommand("verify")) rc = cmd_verify();
        auto t1 = std::chrono::steady_clock::now();
        std::cerr << "elapsed: " << std::chrono::duration<double>(t1 - t0).count() << " s\n";
        return rc;
    } catch (const InfeasibleTarget& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const BudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBudget;
    } catch (const ConsistencyError& e) {
        std::cerr << "internal inconsistency: " << e.what() << "\n";
        return kExitClassification;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
}
