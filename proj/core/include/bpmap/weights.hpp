#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bpmap/rational.hpp"

namespace bpmap {

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Count of cyclic label-increment vectors around a degree-2k face,
/// N(k) = binomial(2k-1, k-1). Exact.
BigInt n_coeff(int64_t k);

struct GeometricTail {
    Rational beta;   // q_i = coeff * beta^i beyond the stored prefix
    Rational coeff;
};

/// Face-weight sequence (q_1, q_2, ...): an explicit rational prefix plus an
/// optional geometric tail. q_0 = 1 is a fixed convention, not a field.
class WeightSequence {
  public:
    WeightSequence(std::vector<Rational> prefix, std::optional<GeometricTail> tail = std::nullopt);

    static WeightSequence finite(std::vector<Rational> prefix) { return WeightSequence(std::move(prefix)); }
    static WeightSequence geometric(const Rational& beta, const Rational& coeff = 1) {
        return WeightSequence({}, GeometricTail{beta, coeff});
    }
    /// Dirac sequence q_kappa = weight, all other terms zero.
    static WeightSequence dirac(int64_t kappa, const Rational& weight);

    const std::vector<Rational>& prefix() const { return prefix_; }
    const std::optional<GeometricTail>& tail() const { return tail_; }
    bool finite_support() const { return !tail_ || tail_->coeff == 0 || tail_->beta == 0; }

    Rational term(int64_t i) const;  // q_i, i >= 1

    /// Radius of convergence of f_q; +infinity for finite support.
    double radius() const;
    std::optional<Rational> radius_exact() const;

    /// alpha * q (termwise scaling).
    WeightSequence scaled(const Rational& alpha) const;
    /// beta-bullet transform: q_i -> beta^{i-1} q_i.
    WeightSequence beta_bullet(const Rational& beta) const;

    static WeightSequence from_json(const std::string& text);
    std::string to_json() const;

  private:
    std::vector<Rational> prefix_;
    std::optional<GeometricTail> tail_;
};

/// f_q(x) = sum_{k>=0} x^k N(k+1) q_{k+1}, or its first or second derivative.
/// Returns +infinity at and beyond the radius of convergence.
double f_eval(const WeightSequence& q, double x, int order);

/// Exact evaluation at a rational point. For geometric tails this succeeds only
/// when 1 - 4*beta*x is a perfect rational square.
std::optional<Rational> f_eval_exact(const WeightSequence& q, const Rational& x, int order);

enum class Criticality { NotAdmissible, AdmissibleSubcritical, Critical, RegularCritical };

std::string to_string(Criticality c);

struct CriticalityReport {
    Criticality status = Criticality::NotAdmissible;
    double Z = 0;                        // selected fixed point, when admissible
    std::optional<Rational> Z_exact;     // set when the fixed point verifies exactly
    double radius = 0;                   // radius of convergence of f_q (+inf allowed)
    std::vector<double> solutions;       // roots of f_q(x) = 1 - 1/x found in (1, R]
    double epsilon = 1e-8;               // criticality tolerance used
    double fZ = 0, fpZ = 0, fppZ = 0;    // f_q and derivatives at Z

    bool admissible() const { return status != Criticality::NotAdmissible; }
    std::string to_json() const;
};

/// Classifies a weight sequence per the fixed-point equation f_q(x) = 1 - 1/x
/// on (1, R_q]: bracket the convex difference, bisect, select the root with
/// Z^2 f'(Z) <= 1, then apply the tangency and regularity tests.
CriticalityReport classify(const WeightSequence& q, double epsilon = 1e-8);

struct TuneResult {
    double scale = 0;  // alpha or beta
    double z = 0;      // tangency point of the tuned sequence
    std::optional<Rational> scale_exact;
    std::optional<Rational> z_exact;
};

/// Finds alpha with classify(alpha * q) regular critical, or nullopt when the
/// tangency falls at or beyond the radius of convergence.
std::optional<TuneResult> tune_alpha(const WeightSequence& q);

/// Finds beta with classify(beta-bullet q) regular critical (q_i -> beta^{i-1} q_i).
std::optional<TuneResult> tune_beta(const WeightSequence& q);

/// Offspring laws of the tree image of a Boltzmann map: mu0 geometric with
/// parameter f_q(Z), mu1(k) = Z^k N(k+1) q_{k+1} / f_q(Z).
struct BranchingLaw {
    double mu0_param = 0;          // success parameter f_q(Z); mu0(k) = (1-p) p^k
    std::vector<double> mu1_pmf;   // k = 0 .. size-1
    int64_t mu1_truncated_at = -1; // first dropped index, -1 when support is exact
    double mu1_dropped_mass = 0;   // <= 1e-12 by construction
    double m0 = 0, m1 = 0, var0 = 0, var1 = 0;

    std::optional<Rational> mu0_param_exact;

    std::string to_json() const;
    static BranchingLaw from_json(const std::string& text);
};

BranchingLaw derive_branching(const WeightSequence& q, const CriticalityReport& report);

/// Exact per-term offspring probabilities for a verified rational fixed point.
Rational mu0_term_exact(const Rational& Z, int64_t k);
Rational mu1_term_exact(const WeightSequence& q, const Rational& Z, int64_t k);

struct ScalingConstants {
    double rho = 0;       // 2 + Z^3 f''(Z)
    double sigma = 0;     // sqrt(Z rho)/2, cross-checked against the moment form
    double Sigma = 0;     // sqrt(rho/6), cross-checked against the displacement-variance form
    double C_face = 0;    // (4 rho / (9 (Z-1)))^{1/4}
    double C_vertex = 0;  // (4 rho / 9)^{1/4}
    double D_face = 0;    // 4 (rho (Z-1))^{-1/2}
    double sigma_moment_form = 0;
    double Sigma_series_form = 0;

    std::string to_json() const;
};

/// Requires a regular critical report; both sigma routes must agree to 1e-9
/// relative and both Sigma routes to 1e-6 relative, else ConsistencyError.
ScalingConstants scaling_constants(const WeightSequence& q, const CriticalityReport& report);

}  // namespace bpmap
