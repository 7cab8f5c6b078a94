#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bpmap/rng.hpp"
#include "bpmap/trees.hpp"
#include "bpmap/weights.hpp"

namespace bpmap {

struct ConditioningTarget {
    enum class Kind { FaceCount, VertexCountWhite };
    Kind kind = Kind::FaceCount;
    int64_t n = 1;
};

struct SamplerBudget {
    int64_t max_attempts = 100000000;
    int64_t max_tree_size = 10000000;
    uint64_t rng_seed = 0;
};

struct SampleStats {
    int64_t attempts = 0;
    int64_t aborted_overflow = 0;   // size cap hit
    int64_t aborted_overshoot = 0;  // target-type count exceeded
    uint64_t seed = 0;
};

struct InfeasibleTarget : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Random-bit reservoir for the exact fair-geometric fast path.
struct BitBuffer {
    uint64_t bits = 0;
    int avail = 0;
};

/// Offspring distribution: exact geometric or a finite inverse-cdf table.
class OffspringDist {
  public:
    static OffspringDist geometric(double p);
    static OffspringDist table(const std::vector<double>& pmf);

    int64_t draw(Rng& rng) const;
    /// Same law as draw(); geometric(1/2) reads bits from the buffer so the
    /// caller can replay an attempt bit-for-bit.
    int64_t draw_buffered(Rng& rng, BitBuffer& buf) const;
    double mean() const { return mean_; }
    bool is_fair_geometric() const { return geometric_ && p_ == 0.5; }

  private:
    bool geometric_ = false;
    double p_ = 0;      // geometric success parameter
    double log_p_ = 0;
    std::vector<double> cdf_;
    std::vector<double> pmf_;
    double mean_ = 0;
};

OffspringDist white_offspring(const BranchingLaw& law);  // mu0, geometric f_q(Z)
OffspringDist black_offspring(const BranchingLaw& law);  // mu1 table

/// Unconditioned two-type tree with white root; nullopt when generation hits
/// the size cap (expected, not exceptional, for critical laws).
std::optional<TwoTypeTree> sample_two_type_tree(const OffspringDist& white, const OffspringDist& black,
                                                int64_t max_size, Rng& rng);

std::optional<TwoTypeTree> sample_tree(const BranchingLaw& law, const SamplerBudget& budget, Rng& rng);

/// Label increments around a black vertex with k children: the prefix sums of
/// a uniform vector in (Z+ u {-1})^{k+1} summing to zero, drawn via a uniform
/// k-subset of {1, ..., 2k+1} read as a composition of 2k+2.
std::vector<int64_t> sample_displacement(int64_t k, Rng& rng);

/// Assigns labels: root 0, blacks copy their parent, white children of a black
/// vertex receive the displacement prefix sums.
LabeledMobile label_tree(const TwoTypeTree& t, Rng& rng);

struct ConditionedSample {
    std::optional<LabeledMobile> mobile;  // empty means the attempt budget ran out
    SampleStats stats;
};

/// Shape-level conditioned sampler (labels not drawn): rejection with early
/// abort as soon as the target count or the size cap is exceeded.
struct ConditionedShape {
    std::optional<TwoTypeTree> tree;
    SampleStats stats;
};
ConditionedShape sample_conditioned_shape(const OffspringDist& white, const OffspringDist& black,
                                          const ConditioningTarget& target, const SamplerBudget& budget,
                                          const Rng& base);

/// Rejection sampler for the conditioned mobile law; labels are drawn only
/// after shape acceptance. Throws InfeasibleTarget when the support lattice
/// gives the target probability zero.
ConditionedSample sample_conditioned(const BranchingLaw& law, const ConditioningTarget& target,
                                     const SamplerBudget& budget);

/// Lattice feasibility of the conditioning event (conservative: a feasible
/// verdict can still exhaust the budget for pathological laws).
bool target_feasible(const BranchingLaw& law, const ConditioningTarget& target);

namespace detail {
/// Fault-injection hook: composition with an off-by-one part count. Only for
/// tests of the exact displacement checks.
std::vector<int64_t> sample_displacement_broken(int64_t k, Rng& rng);
}  // namespace detail

}  // namespace bpmap
