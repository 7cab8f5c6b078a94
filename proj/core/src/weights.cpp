#include "bpmap/weights.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <nlohmann/json.hpp>

namespace bpmap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kXMax = 1e6;        // search cap for finite-support sequences
constexpr int kBisectIters = 200;    // plenty for 1e-12 absolute on bounded brackets

using json = nlohmann::json;

Rational json_to_rational(const json& v) {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(BigInt(v.get<int64_t>()));
    if (v.is_number_float()) return rationalize(v.get<double>());
    throw std::invalid_argument("expected number or rational string");
}

}  // namespace

BigInt n_coeff(int64_t k) {
    if (k < 1) throw std::invalid_argument("n_coeff requires k >= 1");
    return binomial(2 * k - 1, k - 1);
}

WeightSequence::WeightSequence(std::vector<Rational> prefix, std::optional<GeometricTail> tail)
    : prefix_(std::move(prefix)), tail_(std::move(tail)) {
    for (const auto& t : prefix_)
        if (t < 0) throw std::invalid_argument("negative face weight");
    if (tail_) {
        if (tail_->beta < 0) throw std::invalid_argument("negative tail ratio");
        if (tail_->coeff < 0) throw std::invalid_argument("negative tail coefficient");
    }
    // Standing assumption: q_i > 0 for at least one i > 1.
    bool some = false;
    for (size_t i = 1; i < prefix_.size(); ++i)
        if (prefix_[i] > 0) some = true;
    if (tail_ && tail_->coeff > 0 && tail_->beta > 0) some = true;
    if (!some) throw std::invalid_argument("need q_i > 0 for some i > 1");
}

WeightSequence WeightSequence::dirac(int64_t kappa, const Rational& weight) {
    if (kappa < 2) throw std::invalid_argument("dirac sequence needs kappa >= 2");
    std::vector<Rational> p(static_cast<size_t>(kappa), Rational(0));
    p[static_cast<size_t>(kappa - 1)] = weight;
    return WeightSequence(std::move(p));
}

Rational WeightSequence::term(int64_t i) const {
    if (i < 1) throw std::invalid_argument("terms are indexed from 1");
    if (i <= static_cast<int64_t>(prefix_.size())) return prefix_[static_cast<size_t>(i - 1)];
    if (!tail_) return 0;
    Rational b = 1;
    for (int64_t j = 0; j < i; ++j) b *= tail_->beta;
    return tail_->coeff * b;
}

double WeightSequence::radius() const {
    if (finite_support()) return kInf;
    return 1.0 / (4.0 * to_double(tail_->beta));
}

std::optional<Rational> WeightSequence::radius_exact() const {
    if (finite_support()) return std::nullopt;
    return Rational(1) / (4 * tail_->beta);
}

WeightSequence WeightSequence::scaled(const Rational& alpha) const {
    std::vector<Rational> p = prefix_;
    for (auto& t : p) t *= alpha;
    auto tl = tail_;
    if (tl) tl->coeff *= alpha;
    return WeightSequence(std::move(p), std::move(tl));
}

WeightSequence WeightSequence::beta_bullet(const Rational& beta) const {
    if (beta <= 0) throw std::invalid_argument("beta-bullet needs beta > 0");
    std::vector<Rational> p = prefix_;
    Rational pw = 1;  // beta^{i-1}
    for (size_t i = 0; i < p.size(); ++i) {
        p[i] *= pw;
        pw *= beta;
    }
    auto tl = tail_;
    if (tl) {
        tl->coeff /= beta;
        tl->beta *= beta;
    }
    return WeightSequence(std::move(p), std::move(tl));
}

WeightSequence WeightSequence::from_json(const std::string& text) {
    json j = json::parse(text);
    std::vector<Rational> p;
    for (const auto& v : j.at("terms")) p.push_back(json_to_rational(v));
    std::optional<GeometricTail> tail;
    if (j.contains("tail") && !j.at("tail").is_null()) {
        const auto& t = j.at("tail");
        tail = GeometricTail{json_to_rational(t.at("beta")), json_to_rational(t.at("coeff"))};
    }
    return WeightSequence(std::move(p), std::move(tail));
}

std::string WeightSequence::to_json() const {
    json j;
    j["terms"] = json::array();
    for (const auto& t : prefix_) j["terms"].push_back(format_rational(t));
    if (tail_)
        j["tail"] = {{"beta", format_rational(tail_->beta)}, {"coeff", format_rational(tail_->coeff)}};
    else
        j["tail"] = nullptr;
    return j.dump();
}

namespace {

// Power-series coefficient of the tail: x^k N(k+1) c b^{k+1} summed over k >= k0.
// Closed form for the full sum (k0 = 0):
//   T(x) = c (g(x) - 1) / (2x),  g(x) = (1 - 4 b x)^{-1/2},
// with g' = 2 b g^3 and g'' = 12 b^2 g^5.
double tail_full_sum(double c, double b, double x, int order) {
    double u = 1.0 - 4.0 * b * x;
    if (u <= 0) return kInf;
    if (4.0 * b * x < 1e-6) {
        // Near zero the closed form cancels catastrophically; the series converges fast.
        double s = 0;
        double nkk = 1;  // N(k+1)
        for (int k = 0; k <= 80; ++k) {
            if (k > 0) nkk = nkk * 2.0 * (2 * k + 1) / (k + 1);
            double bpow = std::pow(b, k + 1);
            double t;
            if (order == 0)
                t = nkk * bpow * std::pow(x, k);
            else if (order == 1)
                t = k == 0 ? 0 : nkk * bpow * k * std::pow(x, k - 1);
            else
                t = k <= 1 ? 0 : nkk * bpow * k * (k - 1.0) * std::pow(x, k - 2);
            s += t;
            if (k > 8 && std::abs(t) < 1e-18 * (1 + std::abs(s))) break;
        }
        return c * s;
    }
    double g = 1.0 / std::sqrt(u);
    double g1 = 2.0 * b * g * g * g;
    if (order == 0) return c * (g - 1.0) / (2.0 * x);
    if (order == 1) return c * (g1 / (2.0 * x) - (g - 1.0) / (2.0 * x * x));
    double g2 = 12.0 * b * b * g * g * g * g * g;
    return c * (g2 / (2.0 * x) - g1 / (x * x) + (g - 1.0) / (x * x * x));
}

}  // namespace

double f_eval(const WeightSequence& q, double x, int order) {
    if (x < 0) throw std::invalid_argument("f_eval needs x >= 0");
    if (order < 0 || order > 2) throw std::invalid_argument("order must be 0, 1 or 2");
    const auto& prefix = q.prefix();
    double s = 0;
    // Exact finite part, Horner on the derivative polynomial.
    BigInt nk = 1;  // N(k+1), k = prefix index
    for (size_t k = 0; k < prefix.size(); ++k) {
        if (k > 0) nk = nk * 2 * (2 * static_cast<int64_t>(k) + 1) / (static_cast<int64_t>(k) + 1);
        double coef = nk.convert_to<double>() * to_double(prefix[k]);
        if (coef == 0) continue;
        auto kk = static_cast<double>(k);
        if (order == 0)
            s += coef * std::pow(x, kk);
        else if (order == 1)
            s += k >= 1 ? coef * kk * std::pow(x, kk - 1) : 0;
        else
            s += k >= 2 ? coef * kk * (kk - 1) * std::pow(x, kk - 2) : 0;
    }
    if (!q.finite_support()) {
        double b = to_double(q.tail()->beta);
        double c = to_double(q.tail()->coeff);
        if (x * 4.0 * b >= 1.0) return kInf;
        // Full tail sum minus the tail terms shadowed by the stored prefix.
        double full = tail_full_sum(c, b, x, order);
        double shadow = 0;
        BigInt nb = 1;
        Rational bpow = q.tail()->beta;
        for (size_t k = 0; k < prefix.size(); ++k) {
            if (k > 0) {
                nb = nb * 2 * (2 * static_cast<int64_t>(k) + 1) / (static_cast<int64_t>(k) + 1);
                bpow *= q.tail()->beta;
            }
            double coef = nb.convert_to<double>() * c * to_double(bpow);
            auto kk = static_cast<double>(k);
            if (order == 0)
                shadow += coef * std::pow(x, kk);
            else if (order == 1)
                shadow += k >= 1 ? coef * kk * std::pow(x, kk - 1) : 0;
            else
                shadow += k >= 2 ? coef * kk * (kk - 1) * std::pow(x, kk - 2) : 0;
        }
        s += full - shadow;
    }
    return s;
}

std::optional<Rational> f_eval_exact(const WeightSequence& q, const Rational& x, int order) {
    if (x < 0) return std::nullopt;
    Rational s = 0;
    const auto& prefix = q.prefix();
    BigInt nk = 1;
    Rational xp = 1;
    // sum over prefix: N(k+1) q_{k+1} * d^order/dx^order x^k
    for (size_t k = 0; k < prefix.size(); ++k) {
        if (k > 0) nk = nk * 2 * (2 * static_cast<int64_t>(k) + 1) / (static_cast<int64_t>(k) + 1);
        Rational coef = Rational(nk) * prefix[k];
        if (coef != 0) {
            auto ki = static_cast<int64_t>(k);
            Rational xpow = 1;
            int64_t e = ki - order;
            if (e >= 0) {
                for (int64_t j = 0; j < e; ++j) xpow *= x;
                Rational fac = 1;
                if (order >= 1) fac *= ki;
                if (order >= 2) fac *= (ki - 1);
                if (order <= ki) s += coef * fac * xpow;
            }
        }
    }
    if (q.finite_support()) return s;

    const Rational b = q.tail()->beta;
    const Rational c = q.tail()->coeff;
    if (x == 0) {
        // Only the constant term of each derivative survives.
        size_t K = prefix.size();
        auto tail_term = [&](int64_t k) {  // N(k+1) c b^{k+1}
            Rational bp = 1;
            for (int64_t j = 0; j <= k; ++j) bp *= b;
            return Rational(n_coeff(k + 1)) * c * bp;
        };
        if (order == 0 && K < 1) s += tail_term(0);
        if (order == 1 && K < 2) s += tail_term(1);
        if (order == 2 && K < 3) s += 2 * tail_term(2);
        return s;
    }
    Rational u = 1 - 4 * b * x;
    if (u <= 0) return std::nullopt;
    auto su = rational_sqrt(u);
    if (!su) return std::nullopt;
    Rational g = 1 / *su;  // (1-4bx)^{-1/2}, exact
    Rational g1 = 2 * b * g * g * g;
    Rational full;
    if (order == 0)
        full = c * (g - 1) / (2 * x);
    else if (order == 1)
        full = c * (g1 / (2 * x) - (g - 1) / (2 * x * x));
    else {
        Rational g2 = 12 * b * b * g * g * g * g * g;
        full = c * (g2 / (2 * x) - g1 / (x * x) + (g - 1) / (x * x * x));
    }
    // Subtract tail terms shadowed by the prefix.
    Rational shadow = 0;
    BigInt nb = 1;
    Rational bpow = b;
    for (size_t k = 0; k < prefix.size(); ++k) {
        if (k > 0) {
            nb = nb * 2 * (2 * static_cast<int64_t>(k) + 1) / (static_cast<int64_t>(k) + 1);
            bpow *= b;
        }
        Rational coef = Rational(nb) * c * bpow;
        auto ki = static_cast<int64_t>(k);
        int64_t e = ki - order;
        if (e >= 0) {
            Rational xpow = 1;
            for (int64_t j = 0; j < e; ++j) xpow *= x;
            Rational fac = 1;
            if (order >= 1) fac *= ki;
            if (order >= 2) fac *= (ki - 1);
            shadow += coef * fac * xpow;
        }
    }
    return s + full - shadow;
}

std::string to_string(Criticality c) {
    switch (c) {
        case Criticality::NotAdmissible: return "not_admissible";
        case Criticality::AdmissibleSubcritical: return "admissible_subcritical";
        case Criticality::Critical: return "critical";
        case Criticality::RegularCritical: return "regular_critical";
    }
    return "?";
}

namespace {

// g(x) = f_q(x) - 1 + 1/x; strictly convex on (1, R) since f is convex and
// 1/x is convex. Roots of g are the fixed points.
double g_eval(const WeightSequence& q, double x) { return f_eval(q, x, 0) - 1.0 + 1.0 / x; }
double g_prime(const WeightSequence& q, double x) { return f_eval(q, x, 1) - 1.0 / (x * x); }

double bisect(const std::function<double(double)>& h, double lo, double hi) {
    double flo = h(lo);
    for (int i = 0; i < kBisectIters && hi - lo > 1e-13 * (1 + std::abs(lo)); ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = h(mid);
        if (std::isnan(fm)) throw NumericError("bisection hit NaN");
        if ((fm <= 0) == (flo <= 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Attempt to certify a numerically found fixed point as an exact rational.
std::optional<Rational> verify_exact_fixed_point(const WeightSequence& q, double z) {
    for (uint64_t max_den : {16ull, 4096ull, 1000000ull}) {
        Rational cand = rationalize(z, max_den);
        if (cand <= 1) continue;
        if (std::abs(to_double(cand) - z) > 1e-9 * std::max(1.0, std::abs(z))) continue;
        auto fx = f_eval_exact(q, cand, 0);
        if (fx && *fx == 1 - Rational(1) / cand) return cand;
    }
    return std::nullopt;
}

}  // namespace

CriticalityReport classify(const WeightSequence& q, double epsilon) {
    CriticalityReport rep;
    rep.epsilon = epsilon;
    rep.radius = q.radius();

    const double lo = 1.0 + 1e-12;
    double hi = std::isfinite(rep.radius) ? rep.radius * (1 - 1e-13) : kXMax;
    if (hi <= lo) return rep;  // radius <= 1: no solution can exist in (1, R]

    // Locate the minimum of the convex difference g.
    double gp_lo = g_prime(q, lo), gp_hi = g_prime(q, hi);
    double xmin, gmin;
    if (gp_lo >= 0) {
        xmin = lo;
        gmin = g_eval(q, lo);
    } else if (gp_hi <= 0) {
        xmin = hi;
        gmin = g_eval(q, hi);
    } else {
        xmin = bisect([&](double x) { return g_prime(q, x); }, lo, hi);
        gmin = g_eval(q, xmin);
    }
    if (std::isnan(gmin)) throw NumericError("classify: NaN while bracketing");

    const double admissibility_band = 1e-9 * (1 + std::abs(f_eval(q, xmin, 0)));
    if (gmin > admissibility_band) return rep;  // graphs never meet

    if (gmin > -admissibility_band) {
        // Tangency within numeric resolution.
        rep.Z = xmin;
        rep.solutions = {xmin};
    } else {
        // Two crossings straddle the minimum (the upper one may sit beyond the
        // search cap for finite-support sequences; report what is found).
        double z1 = bisect([&](double x) { return g_eval(q, x); }, lo, xmin);
        rep.Z = z1;
        rep.solutions = {z1};
        if (g_eval(q, hi) > 0) {
            double z2 = bisect([&](double x) { return -g_eval(q, x); }, xmin, hi);
            rep.solutions.push_back(z2);
        }
    }

    rep.Z_exact = verify_exact_fixed_point(q, rep.Z);
    if (rep.Z_exact) {
        rep.Z = to_double(*rep.Z_exact);
        if (!rep.solutions.empty()) rep.solutions[0] = rep.Z;
    }
    rep.fZ = f_eval(q, rep.Z, 0);
    rep.fpZ = f_eval(q, rep.Z, 1);
    rep.fppZ = f_eval(q, rep.Z, 2);

    double crit_defect = std::abs(rep.Z * rep.Z * rep.fpZ - 1.0);
    bool critical = crit_defect <= epsilon;
    if (rep.Z_exact) {
        auto fp = f_eval_exact(q, *rep.Z_exact, 1);
        if (fp) critical = (*rep.Z_exact) * (*rep.Z_exact) * (*fp) == 1;
    }
    if (!critical) {
        rep.status = Criticality::AdmissibleSubcritical;
    } else {
        bool regular = !std::isfinite(rep.radius) || rep.Z < rep.radius * (1 - 1e-9);
        rep.status = regular ? Criticality::RegularCritical : Criticality::Critical;
    }
    return rep;
}

std::string CriticalityReport::to_json() const {
    json j;
    j["status"] = bpmap::to_string(status);
    j["epsilon"] = epsilon;
    if (admissible()) {
        j["Z"] = Z;
        j["Z_exact"] = Z_exact ? json(format_rational(*Z_exact)) : json(nullptr);
        j["fZ"] = fZ;
        j["fpZ"] = fpZ;
        j["fppZ"] = fppZ;
    }
    j["radius_of_convergence"] = std::isfinite(radius) ? json(radius) : json("inf");
    j["solutions"] = solutions;
    return j.dump();
}

std::optional<TuneResult> tune_alpha(const WeightSequence& q) {
    // Tangency of alpha*f at z requires h(z) = f(z) - z(z-1) f'(z) = 0; h is
    // strictly decreasing on (1, R) with h(1+) = f(1) > 0.
    auto h = [&](double z) { return f_eval(q, z, 0) - z * (z - 1) * f_eval(q, z, 1); };
    const double lo = 1.0 + 1e-12;
    double R = q.radius();
    double hi = std::isfinite(R) ? R * (1 - 1e-12) : kXMax;
    if (hi <= lo) return std::nullopt;
    if (h(hi) > 0) return std::nullopt;  // tangency at or beyond R
    double z = bisect(h, lo, hi);
    double fp = f_eval(q, z, 1);
    if (!(fp > 0)) throw NumericError("tune_alpha: vanishing derivative");
    TuneResult res;
    res.z = z;
    res.scale = 1.0 / (z * z * fp);
    // Exact certification when the tangency point is rational.
    for (uint64_t max_den : {16ull, 4096ull, 1000000ull}) {
        Rational zc = rationalize(z, max_den);
        if (zc <= 1 || std::abs(to_double(zc) - z) > 1e-9) continue;
        auto f0 = f_eval_exact(q, zc, 0);
        auto f1 = f_eval_exact(q, zc, 1);
        if (f0 && f1 && *f1 > 0 && *f0 == zc * (zc - 1) * (*f1)) {
            res.z_exact = zc;
            res.scale_exact = 1 / (zc * zc * (*f1));
            res.z = to_double(zc);
            res.scale = to_double(*res.scale_exact);
            break;
        }
    }
    return res;
}

std::optional<TuneResult> tune_beta(const WeightSequence& q) {
    // With y = beta*z the tangency system for beta-bullet q reduces to
    // h2(y) = f(y) + y f'(y) - 1 = 0, strictly increasing on (0, R);
    // then beta = y^2 f'(y) and z = y/beta.
    auto h2 = [&](double y) { return f_eval(q, y, 0) + y * f_eval(q, y, 1) - 1.0; };
    const double lo = 1e-12;
    double R = q.radius();
    double hi = std::isfinite(R) ? R * (1 - 1e-12) : kXMax;
    if (h2(lo) >= 0) return std::nullopt;  // q_1 >= 1: never admissible under the transform
    if (h2(hi) <= 0) return std::nullopt;
    double y = bisect([&](double v) { return -h2(v); }, lo, hi);
    double fp = f_eval(q, y, 1);
    if (!(fp > 0)) throw NumericError("tune_beta: vanishing derivative");
    TuneResult res;
    res.scale = y * y * fp;
    res.z = y / res.scale;
    for (uint64_t max_den : {16ull, 4096ull, 1000000ull}) {
        Rational yc = rationalize(y, max_den);
        if (yc <= 0 || std::abs(to_double(yc) - y) > 1e-9) continue;
        auto f0 = f_eval_exact(q, yc, 0);
        auto f1 = f_eval_exact(q, yc, 1);
        if (f0 && f1 && *f1 > 0 && *f0 + yc * (*f1) == 1) {
            res.scale_exact = yc * yc * (*f1);
            res.z_exact = yc / *res.scale_exact;
            res.scale = to_double(*res.scale_exact);
            res.z = to_double(*res.z_exact);
            break;
        }
    }
    return res;
}

Rational mu0_term_exact(const Rational& Z, int64_t k) {
    Rational p = 1 - Rational(1) / Z;  // f_q(Z) at a fixed point
    Rational r = 1 / Z;
    for (int64_t i = 0; i < k; ++i) r *= p;
    return r;
}

Rational mu1_term_exact(const WeightSequence& q, const Rational& Z, int64_t k) {
    Rational fZ = 1 - Rational(1) / Z;
    Rational zp = 1;
    for (int64_t i = 0; i < k; ++i) zp *= Z;
    return zp * Rational(n_coeff(k + 1)) * q.term(k + 1) / fZ;
}

BranchingLaw derive_branching(const WeightSequence& q, const CriticalityReport& report) {
    if (!report.admissible()) throw std::invalid_argument("derive_branching: sequence not admissible");
    BranchingLaw law;
    const double Z = report.Z;
    const double fZ = report.fZ;
    law.mu0_param = fZ;
    if (report.Z_exact) law.mu0_param_exact = 1 - Rational(1) / *report.Z_exact;

    if (q.finite_support()) {
        size_t K = q.prefix().size();
        law.mu1_pmf.resize(K, 0.0);
        BigInt nk = 1;
        double zp = 1;
        for (size_t k = 0; k < K; ++k) {
            if (k > 0) {
                nk = nk * 2 * (2 * static_cast<int64_t>(k) + 1) / (static_cast<int64_t>(k) + 1);
                zp *= Z;
            }
            law.mu1_pmf[k] = zp * nk.convert_to<double>() * to_double(q.term(static_cast<int64_t>(k) + 1)) / fZ;
        }
        law.mu1_truncated_at = -1;
    } else {
        // Geometric tail: extend until the dropped mass falls below 1e-12.
        double cum = 0;
        BigInt nk = 1;
        double zp = 1;
        for (int64_t k = 0; k < 100000; ++k) {
            if (k > 0) {
                nk = nk * 2 * (2 * k + 1) / (k + 1);
                zp *= Z;
            }
            double p = zp * nk.convert_to<double>() * to_double(q.term(k + 1)) / fZ;
            law.mu1_pmf.push_back(p);
            cum += p;
            if (cum >= 1.0 - 1e-12 && k >= 2) {
                law.mu1_truncated_at = k + 1;
                break;
            }
        }
        law.mu1_dropped_mass = std::max(0.0, 1.0 - cum);
    }

    law.m0 = Z - 1;
    law.m1 = Z * report.fpZ / fZ;
    law.var0 = Z * (Z - 1);
    // var1 from the generating function f(xZ)/f(Z): E[k(k-1)] = Z^2 f''(Z)/f(Z).
    double ekk1 = Z * Z * report.fppZ / fZ;
    law.var1 = ekk1 + law.m1 - law.m1 * law.m1;
    return law;
}

std::string BranchingLaw::to_json() const {
    json j;
    j["mu0_param"] = mu0_param;
    j["mu1_pmf"] = mu1_pmf;
    j["mu1_truncated_at"] = mu1_truncated_at;
    j["mu1_dropped_mass"] = mu1_dropped_mass;
    j["m0"] = m0;
    j["m1"] = m1;
    j["var0"] = var0;
    j["var1"] = var1;
    if (mu0_param_exact) j["mu0_param_exact"] = format_rational(*mu0_param_exact);
    return j.dump();
}

BranchingLaw BranchingLaw::from_json(const std::string& text) {
    json j = json::parse(text);
    BranchingLaw law;
    law.mu0_param = j.at("mu0_param").get<double>();
    law.mu1_pmf = j.at("mu1_pmf").get<std::vector<double>>();
    law.mu1_truncated_at = j.value("mu1_truncated_at", int64_t(-1));
    law.mu1_dropped_mass = j.value("mu1_dropped_mass", 0.0);
    law.m0 = j.at("m0").get<double>();
    law.m1 = j.at("m1").get<double>();
    law.var0 = j.at("var0").get<double>();
    law.var1 = j.at("var1").get<double>();
    if (j.contains("mu0_param_exact")) law.mu0_param_exact = parse_rational(j["mu0_param_exact"].get<std::string>());
    return law;
}

ScalingConstants scaling_constants(const WeightSequence& q, const CriticalityReport& report) {
    if (report.status != Criticality::RegularCritical)
        throw std::invalid_argument("scaling_constants requires a regular critical sequence");
    BranchingLaw law = derive_branching(q, report);
    ScalingConstants sc;
    const double Z = report.Z;
    sc.rho = 2.0 + Z * Z * Z * report.fppZ;

    sc.sigma = std::sqrt(Z * sc.rho) / 2.0;
    sc.sigma_moment_form =
        0.5 * std::sqrt(law.var0 * (1 + law.m1) / law.m0 + law.var1 * (1 + law.m0) / law.m1);
    if (std::abs(sc.sigma - sc.sigma_moment_form) > 1e-9 * sc.sigma)
        throw ConsistencyError("sigma cross-check failed");

    sc.Sigma = std::sqrt(sc.rho / 6.0);
    double series = 0;  // (1/2) sum_k mu1(k)/m1 * k(k+1)/3, displacement variances summed
    for (size_t k = 0; k < law.mu1_pmf.size(); ++k) {
        auto kk = static_cast<double>(k);
        series += 0.5 * law.mu1_pmf[k] / law.m1 * kk * (kk + 1) / 3.0;
    }
    sc.Sigma_series_form = std::sqrt(series);
    if (std::abs(sc.Sigma - sc.Sigma_series_form) > 1e-6 * sc.Sigma)
        throw ConsistencyError("Sigma cross-check failed");

    sc.C_face = std::pow(4.0 * sc.rho / (9.0 * (Z - 1)), 0.25);
    sc.C_vertex = std::pow(4.0 * sc.rho / 9.0, 0.25);
    sc.D_face = 4.0 / std::sqrt(sc.rho * (Z - 1));
    return sc;
}

std::string ScalingConstants::to_json() const {
    json j;
    j["rho"] = rho;
    j["sigma"] = sigma;
    j["Sigma"] = Sigma;
    j["C_face"] = C_face;
    j["C_vertex"] = C_vertex;
    j["D_face"] = D_face;
    j["sigma_moment_form"] = sigma_moment_form;
    j["Sigma_series_form"] = Sigma_series_form;
    return j.dump();
}

}  // namespace bpmap
