#include "bpmap/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bpmap/parallel.hpp"

namespace bpmap {

using json = nlohmann::json;

uint64_t derive_seed(uint64_t seed, uint64_t tag) {
    uint64_t z = seed ^ (0x9E3779B97F4A7C15ull + (tag << 1));
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::vector<SampleRecord> run_samples(const BranchingLaw& law, const SampleRunConfig& cfg) {
    std::vector<SampleRecord> out(cfg.count);
    std::vector<char> exhausted(cfg.count, 0);
    parallel_for(cfg.count, cfg.workers, [&](int64_t i) {
        SamplerBudget budget;
        budget.max_attempts = cfg.max_attempts;
        budget.max_tree_size = cfg.max_tree_size;
        budget.rng_seed = derive_seed(cfg.seed, static_cast<uint64_t>(i));
        auto res = sample_conditioned(law, cfg.target, budget);
        if (!res.mobile) {
            exhausted[i] = 1;
            return;
        }
        SampleRecord rec;
        rec.mobile = std::move(*res.mobile);
        rec.stats = res.stats;
        rec.radius = radius_from_labels(rec.mobile);
        rec.faces = rec.mobile.t.count(Color::Black);
        rec.vertices = rec.mobile.t.count(Color::White) + 1;
        rec.profile = profile_from_mobile(rec.mobile);
        if (rec.mobile.size() > 1) {
            Rng rng = Rng::from_stream(budget.rng_seed, 0x2b);
            rec.two_point = two_point_distance(rec.mobile, rng);
        }
        out[i] = std::move(rec);
    });
    for (int64_t i = 0; i < cfg.count; ++i)
        if (exhausted[i]) throw BudgetError("sampling budget exhausted at replicate " + std::to_string(i));
    return out;
}

namespace {

// Distances carry a deterministic +1 relative to the label ranges that drive
// the limit (the pointed vertex sits one step below the minimum label). The
// comparison statistics subtract it; the offset vanishes only like n^{-1/4},
// which the KS tests would otherwise detect as a spurious location shift.
double profile_functional(const DistanceProfile& p, double n_quarter, double C) {
    // <I_n, g> with g(x) = exp(-x) and centered distances rescaled by the
    // family constant.
    double acc = 0;
    for (size_t k = 0; k < p.counts.size(); ++k) {
        double centered = k == 0 ? 0.0 : static_cast<double>(k - 1);
        acc += static_cast<double>(p.counts[k]) * std::exp(-(centered / n_quarter) / C);
    }
    return acc / static_cast<double>(p.total);
}

}  // namespace

bool UniversalityResult::pairwise_pass() const {
    for (size_t i = 0; i < families.size(); ++i)
        for (size_t j = i + 1; j < families.size(); ++j)
            if (pairwise_radius[i][j].p_value <= accept_p) return false;
    return true;
}

bool UniversalityResult::reference_pass() const {
    for (const auto& t : reference_radius)
        if (t.p_value <= accept_p) return false;
    for (const auto& t : reference_two_point)
        if (t.p_value <= accept_p) return false;
    return true;
}

bool UniversalityResult::control_rejects() const {
    bool any = false;
    for (size_t i = 0; i < families.size(); ++i) {
        for (size_t j = 0; j < families.size(); ++j) {
            if (i == j) continue;
            double ci = families[i].C, cj = families[j].C;
            if (std::abs(ci - cj) <= 0.1 * std::max(ci, cj)) continue;
            any = true;
            if (control_radius[i][j].p_value >= control_p) return false;
        }
    }
    return any;
}

UniversalityResult run_universality(const ExperimentSpec& spec) {
    if (spec.families.size() != spec.family_names.size())
        throw std::invalid_argument("family name/sequence arity mismatch");
    if (spec.families.empty()) throw std::invalid_argument("need at least one family");

    UniversalityResult res;
    res.n = spec.n;
    res.replicates = spec.replicates;
    res.seed = spec.seed;
    res.reference_m = spec.reference_m;
    res.reference_count = spec.reference_count;
    res.accept_p = spec.accept_p;
    res.control_p = spec.control_p;

    const double n_quarter = std::pow(static_cast<double>(spec.n), 0.25);

    for (size_t f = 0; f < spec.families.size(); ++f) {
        auto rep = classify(spec.families[f]);
        if (rep.status != Criticality::RegularCritical)
            throw std::invalid_argument("family " + spec.family_names[f] + " is not regular critical");
        FamilyResult fam;
        fam.name = spec.family_names[f];
        fam.constants = scaling_constants(spec.families[f], rep);
        fam.C = spec.kind == ConditioningTarget::Kind::FaceCount ? fam.constants.C_face
                                                                 : fam.constants.C_vertex;
        auto law = derive_branching(spec.families[f], rep);

        SampleRunConfig cfg;
        cfg.target = {spec.kind, spec.n};
        cfg.count = spec.replicates;
        cfg.seed = derive_seed(spec.seed, 0xFA0000 + f);
        cfg.workers = spec.workers;
        cfg.max_tree_size = spec.max_tree_size;
        auto records = run_samples(law, cfg);

        fam.radius_rescaled.reserve(records.size());
        for (auto& r : records) {
            fam.radius_rescaled.push_back(static_cast<double>(r.radius - 1) / n_quarter / fam.C);
            fam.two_point_rescaled.push_back(static_cast<double>(r.two_point - 1) / n_quarter / fam.C);
            fam.profile_integral.push_back(profile_functional(r.profile, n_quarter, fam.C));
            fam.total_attempts += r.stats.attempts;
        }
        std::sort(fam.radius_rescaled.begin(), fam.radius_rescaled.end());
        std::sort(fam.two_point_rescaled.begin(), fam.two_point_rescaled.end());
        res.families.push_back(std::move(fam));
    }

    // Reference snake batch (cached when a cache directory is configured).
    auto g = [](double x) { return std::exp(-x); };
    ReferenceStats ref;
    uint64_t ref_seed = derive_seed(spec.seed, 0x5EF);
    if (spec.cache_dir.empty())
        ref = reference_statistics(spec.reference_count, spec.reference_m, ref_seed, spec.workers, g);
    else
        ref = reference_statistics_cached(spec.cache_dir, spec.reference_count, spec.reference_m, ref_seed,
                                          spec.workers, g, "expneg");

    const size_t F = res.families.size();
    res.pairwise_radius.assign(F, std::vector<KsTest>(F));
    res.control_radius.assign(F, std::vector<KsTest>(F));
    for (size_t i = 0; i < F; ++i) {
        for (size_t j = i + 1; j < F; ++j)
            res.pairwise_radius[i][j] =
                ks_two_sample(res.families[i].radius_rescaled, res.families[j].radius_rescaled);
        res.reference_radius.push_back(ks_two_sample(res.families[i].radius_rescaled, ref.delta));
        res.reference_two_point.push_back(
            ks_two_sample(res.families[i].two_point_rescaled, ref.delta_plus));
        // Negative control: rescale family i with family j's constant instead.
        for (size_t j = 0; j < F; ++j) {
            if (i == j) continue;
            std::vector<double> wrong = res.families[i].radius_rescaled;
            double fac = res.families[i].C / res.families[j].C;
            for (auto& x : wrong) x *= fac;
            res.control_radius[i][j] = ks_two_sample(wrong, res.families[j].radius_rescaled);
        }
    }
    return res;
}

std::string UniversalityResult::to_json() const {
    json j;
    j["n"] = n;
    j["replicates"] = replicates;
    j["seed"] = seed;
    j["reference"] = {{"m", reference_m}, {"count", reference_count}};
    j["thresholds"] = {{"accept_p", accept_p}, {"control_p", control_p}};
    j["statistic"] = "centered: (radius - 1) and (two_point - 1), rescaled by n^{1/4} C";
    j["families"] = json::array();
    for (const auto& f : families) {
        json jf;
        jf["name"] = f.name;
        jf["C"] = f.C;
        jf["constants"] = json::parse(f.constants.to_json());
        jf["total_attempts"] = f.total_attempts;
        double mean = 0, m2 = 0;
        for (double v : f.profile_integral) mean += v;
        mean /= static_cast<double>(f.profile_integral.size());
        for (double v : f.profile_integral) m2 += (v - mean) * (v - mean);
        jf["profile_integral_mean"] = mean;
        jf["profile_integral_se"] =
            std::sqrt(m2 / static_cast<double>(f.profile_integral.size() - 1)) /
            std::sqrt(static_cast<double>(f.profile_integral.size()));
        j["families"].push_back(jf);
    }
    auto ks_json = [](const KsTest& t) { return json{{"D", t.statistic}, {"p", t.p_value}}; };
    j["pairwise_radius"] = json::array();
    for (size_t i = 0; i < families.size(); ++i)
        for (size_t j2 = i + 1; j2 < families.size(); ++j2)
            j["pairwise_radius"].push_back({{"a", families[i].name},
                                            {"b", families[j2].name},
                                            {"ks", ks_json(pairwise_radius[i][j2])}});
    j["reference_radius"] = json::array();
    j["reference_two_point"] = json::array();
    for (size_t i = 0; i < families.size(); ++i) {
        j["reference_radius"].push_back({{"family", families[i].name}, {"ks", ks_json(reference_radius[i])}});
        j["reference_two_point"].push_back(
            {{"family", families[i].name}, {"ks", ks_json(reference_two_point[i])}});
    }
    j["negative_control"] = json::array();
    for (size_t i = 0; i < families.size(); ++i)
        for (size_t j2 = 0; j2 < families.size(); ++j2) {
            if (i == j2) continue;
            j["negative_control"].push_back({{"rescaled", families[i].name},
                                             {"against", families[j2].name},
                                             {"ks", ks_json(control_radius[i][j2])}});
        }
    j["verdict"] = {{"pairwise_pass", pairwise_pass()},
                    {"reference_pass", reference_pass()},
                    {"control_rejects", control_rejects()}};
    return j.dump(2);
}

std::string UniversalityResult::samples_csv() const {
    std::ostringstream os;
    os << "family,index,radius_rescaled,two_point_rescaled,profile_integral\n";
    char buf[64];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    for (const auto& f : families) {
        for (size_t i = 0; i < f.radius_rescaled.size(); ++i) {
            os << f.name << "," << i << ",";
            emit(f.radius_rescaled[i]);
            os << ",";
            emit(f.two_point_rescaled[i]);
            os << ",";
            emit(f.profile_integral[i]);
            os << "\n";
        }
    }
    return os.str();
}

}  // namespace bpmap
