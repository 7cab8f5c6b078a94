#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bpmap/rng.hpp"
#include "bpmap/sampler.hpp"

namespace bpmap {

/// One reference sample: rescaled height and label paths on a uniform grid
/// over [0, 1] plus the scaling record. The reference law is the two-type
/// tree with geometric(1/2) offspring for both colors, unit-variance-free
/// uniform {-1,0,+1} edge displacements, conditioned on m white vertices;
/// dividing H/sqrt(m) by 2 and S/m^{1/4} by 2/sqrt(3) makes both limit
/// constants equal to one.
struct ReferenceSnakeSample {
    std::vector<double> e_path;
    std::vector<double> r_path;
    int64_t m = 0;
    double height_divisor = 2.0;
    double label_divisor = 1.1547005383792515;  // 2/sqrt(3)
    // Extrema of the rescaled label process: the grid-path values feed every
    // cross-family comparison (all compared processes live on the same grid);
    // the raw values are the exact discrete extrema.
    double delta_plus = 0, delta_minus = 0;        // from r_path
    double raw_delta_plus = 0, raw_delta_minus = 0;

    double delta() const { return delta_plus - delta_minus; }
    double raw_delta() const { return raw_delta_plus - raw_delta_minus; }
};

struct SnakeRefOptions {
    int64_t grid = 1024;
    int64_t max_attempts = 1000000000;
    int64_t max_tree_size = 0;  // 0: derived from m
};

ReferenceSnakeSample sample_reference(int64_t m, const Rng& base, const SnakeRefOptions& opt = {});

/// Sorted sample arrays for two-sample tests.
struct ReferenceStats {
    std::vector<double> delta;
    std::vector<double> delta_plus;
    std::vector<double> neg_delta_minus;
    std::vector<double> profile_integral;  // grid average of g(r_s - inf r)
    int64_t m = 0;
    int64_t samples = 0;
    uint64_t seed = 0;
};

ReferenceStats reference_statistics(int64_t n_samples, int64_t m, uint64_t seed, int workers,
                                    const std::function<double(double)>& g,
                                    const SnakeRefOptions& opt = {});

/// Columnar cache (CSV: sample_id, statistic, value) keyed by (m, N, seed, g tag).
std::string reference_cache_filename(int64_t m, int64_t n_samples, uint64_t seed,
                                     const std::string& g_tag);
void save_reference_csv(const std::string& path, const ReferenceStats& stats);
std::optional<ReferenceStats> load_reference_csv(const std::string& path);

/// Loads the cache when present, else computes and saves it.
ReferenceStats reference_statistics_cached(const std::string& cache_dir, int64_t n_samples, int64_t m,
                                           uint64_t seed, int workers,
                                           const std::function<double(double)>& g,
                                           const std::string& g_tag);

}  // namespace bpmap
