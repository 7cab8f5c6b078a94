#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bpmap/mobile_map.hpp"
#include "bpmap/sampler.hpp"
#include "bpmap/snake_ref.hpp"
#include "bpmap/stats.hpp"
#include "bpmap/weights.hpp"

namespace bpmap {

/// Derives a child seed; used to give every (family, replicate) pair its own
/// independent stream regardless of worker scheduling.
uint64_t derive_seed(uint64_t seed, uint64_t tag);

struct SampleRecord {
    LabeledMobile mobile;
    int64_t radius = 0;
    int64_t two_point = 0;
    int64_t vertices = 0;  // map vertices (whites + 1)
    int64_t faces = 0;
    DistanceProfile profile;
    SampleStats stats;
};

struct SampleRunConfig {
    ConditioningTarget target;
    int64_t count = 1;
    uint64_t seed = 0;
    int workers = 1;
    int64_t max_attempts = 100000000;
    int64_t max_tree_size = 10000000;
};

/// Conditioned mobiles plus the per-sample map statistics; replicate i uses
/// the seed stream derive_seed(seed, i), so outputs are reproducible and
/// worker-count independent. Throws BudgetError when any replicate exhausts
/// its attempts.
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<SampleRecord> run_samples(const BranchingLaw& law, const SampleRunConfig& cfg);

struct ExperimentSpec {
    std::vector<std::string> family_names;
    std::vector<WeightSequence> families;
    ConditioningTarget::Kind kind = ConditioningTarget::Kind::FaceCount;
    int64_t n = 1500;
    int64_t replicates = 500;
    uint64_t seed = 0;
    int workers = 1;
    int64_t reference_m = 5000;
    int64_t reference_count = 1000;
    double accept_p = 0.01;   // KS acceptance threshold
    double control_p = 0.001; // negative-control rejection threshold
    int64_t max_tree_size = 10000000;
    std::string cache_dir;    // snake-ref cache location; empty disables caching
};

struct FamilyResult {
    std::string name;
    ScalingConstants constants;
    double C = 0;  // the rescaling constant used (per the conditioning kind)
    std::vector<double> radius_rescaled;
    std::vector<double> two_point_rescaled;
    std::vector<double> profile_integral;  // <I_n, g> with g(x) = exp(-x), own C
    int64_t total_attempts = 0;
};

struct UniversalityResult {
    std::vector<FamilyResult> families;
    std::vector<std::vector<KsTest>> pairwise_radius;       // [i][j], i < j filled
    std::vector<KsTest> reference_radius;                   // family vs reference delta
    std::vector<KsTest> reference_two_point;                // family vs reference delta_plus
    std::vector<std::vector<KsTest>> control_radius;        // constants swapped, i != j
    int64_t n = 0;
    int64_t replicates = 0;
    uint64_t seed = 0;
    int64_t reference_m = 0;
    int64_t reference_count = 0;
    double accept_p = 0.01;
    double control_p = 0.001;

    bool pairwise_pass() const;
    bool reference_pass() const;
    /// True when every swapped pair with constants differing by >10% rejects.
    bool control_rejects() const;

    std::string to_json() const;
    std::string samples_csv() const;
};

UniversalityResult run_universality(const ExperimentSpec& spec);

}  // namespace bpmap
