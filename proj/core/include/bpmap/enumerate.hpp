#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bpmap/rational.hpp"
#include "bpmap/sampler.hpp"
#include "bpmap/trees.hpp"
#include "bpmap/weights.hpp"

namespace bpmap {

/// Exact offspring law: geometric with rational parameter, an explicit
/// rational table, or the map-derived black law computed per term from the
/// weight sequence and its exact fixed point.
class ExactOffspring {
  public:
    static ExactOffspring geometric(Rational p);
    static ExactOffspring table(std::vector<Rational> pmf);
    static ExactOffspring mu0_of(const Rational& Z) { return geometric(1 - Rational(1) / Z); }
    static ExactOffspring mu1_of(WeightSequence q, Rational Z);

    Rational prob(int64_t k) const;
    /// Child counts with positive probability, capped at max_count inclusive.
    std::vector<int64_t> support(int64_t max_count) const;

  private:
    enum class Kind { Geometric, Table, Mu1 } kind_ = Kind::Table;
    Rational p_;
    std::vector<Rational> pmf_;
    std::vector<Rational> q_prefix_;  // flattened WeightSequence for Mu1
    bool q_finite_ = true;
    Rational q_beta_, q_coeff_;
    Rational Z_;
};

struct EnumBounds {
    ConditioningTarget::Kind kind = ConditioningTarget::Kind::FaceCount;
    int64_t n = 1;                 // exact count of the targeted color (root excluded for neither)
    int64_t white_child_cap = 8;   // enumeration restricted to these child counts
    int64_t black_child_cap = 8;
};

/// Every white-rooted two-type tree with exactly the requested count of the
/// targeted color and child counts within the supports; each exactly once.
/// Hard-capped at n <= 8 (combinatorial explosion fails loudly).
std::vector<TwoTypeTree> enum_trees(const EnumBounds& bounds, const ExactOffspring& mu0,
                                    const ExactOffspring& mu1);

/// All labelings compatible with the mobile constraints; their number is
/// prod over black vertices of N(children + 1). Guarded at 1e6.
std::vector<std::vector<int64_t>> enum_labelings(const TwoTypeTree& t);

/// P(T = t) = prod mu0(c(white)) * prod mu1(c(black)), exact.
Rational exact_tree_probability(const TwoTypeTree& t, const ExactOffspring& mu0, const ExactOffspring& mu1);

/// Same probability via the weight-sequence form Z^{-#whites} *
/// prod Z^{c} N(c+1) q_{c+1} over blacks; cross-check for the route above.
Rational exact_tree_probability_weight_form(const TwoTypeTree& t, const WeightSequence& q, const Rational& Z);

/// Sum of W_q over all maps with at most N faces (the vertex map included),
/// by enumerating mobile shapes and transporting weights. Finite support only.
Rational partition_partial_sum(const WeightSequence& q, int64_t N);

struct ExactDistribution {
    /// Canonical mobile serialization -> exact unconditioned probability
    /// P(Psi(M) = mobile), sorted by key. Conditional probabilities are
    /// entry/total; when complete, total equals the exact probability of the
    /// conditioning event and the conditional masses sum to exactly 1.
    std::vector<std::pair<std::string, Rational>> entries;
    Rational total = 0;
    bool complete = false;

    std::string to_json() const;
};

/// Exact conditional mobile law. For laws with unbounded offspring support the
/// enumeration is restricted by the child caps and `complete` is false; the
/// restricted law entry/total is still exact.
ExactDistribution exact_conditional_law(const WeightSequence& q, const Rational& Z,
                                        const EnumBounds& bounds);

struct DisplacementEnum {
    int64_t k = 0;
    BigInt vector_count;                          // N(k+1)
    std::vector<std::vector<Rational>> marginal;  // marginal[i][l+1] = P(X_{i+1} = l), l = -1..k
    std::vector<Rational> var_x;                  // Var(X_{i+1})
    Rational cov_x1_x2;
    std::vector<Rational> var_prefix;             // Var(Y_l), l = 1..k
    Rational sum_var_prefix;                      // equals k(k+1)/3
};

/// Full enumeration of the uniform increment vectors around a black vertex
/// with k children (k <= 6): exact marginals and second moments.
DisplacementEnum displacement_enum(int64_t k);

}  // namespace bpmap
