#include "bpmap/enumerate.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include <nlohmann/json.hpp>

namespace bpmap {

using json = nlohmann::json;

ExactOffspring ExactOffspring::geometric(Rational p) {
    if (p <= 0 || p >= 1) throw std::invalid_argument("geometric parameter must lie in (0,1)");
    ExactOffspring e;
    e.kind_ = Kind::Geometric;
    e.p_ = std::move(p);
    return e;
}

ExactOffspring ExactOffspring::table(std::vector<Rational> pmf) {
    ExactOffspring e;
    e.kind_ = Kind::Table;
    e.pmf_ = std::move(pmf);
    return e;
}

ExactOffspring ExactOffspring::mu1_of(WeightSequence q, Rational Z) {
    ExactOffspring e;
    e.kind_ = Kind::Mu1;
    e.q_prefix_ = q.prefix();
    e.q_finite_ = q.finite_support();
    if (!e.q_finite_) {
        e.q_beta_ = q.tail()->beta;
        e.q_coeff_ = q.tail()->coeff;
    }
    e.Z_ = std::move(Z);
    return e;
}

Rational ExactOffspring::prob(int64_t k) const {
    if (k < 0) return 0;
    switch (kind_) {
        case Kind::Geometric: {
            Rational r = 1 - p_;
            for (int64_t i = 0; i < k; ++i) r *= p_;
            return r;
        }
        case Kind::Table:
            return k < static_cast<int64_t>(pmf_.size()) ? pmf_[k] : Rational(0);
        case Kind::Mu1: {
            Rational qk;  // q_{k+1}
            if (k < static_cast<int64_t>(q_prefix_.size())) {
                qk = q_prefix_[k];
            } else if (q_finite_) {
                qk = 0;
            } else {
                Rational b = 1;
                for (int64_t i = 0; i <= k; ++i) b *= q_beta_;
                qk = q_coeff_ * b;
            }
            if (qk == 0) return 0;
            Rational fZ = 1 - Rational(1) / Z_;
            Rational zp = 1;
            for (int64_t i = 0; i < k; ++i) zp *= Z_;
            return zp * Rational(n_coeff(k + 1)) * qk / fZ;
        }
    }
    return 0;
}

std::vector<int64_t> ExactOffspring::support(int64_t max_count) const {
    std::vector<int64_t> s;
    for (int64_t k = 0; k <= max_count; ++k)
        if (prob(k) > 0) s.push_back(k);
    return s;
}

namespace {

// Enumerates all child-count assignments depth-first; each complete tree with
// the exact target count is reported once.
struct TreeEnumerator {
    const EnumBounds& bounds;
    std::vector<int64_t> white_support, black_support;
    std::vector<int32_t> parent, child_count;
    std::vector<std::pair<int32_t, int32_t>> stack;  // (vertex, children left)
    std::vector<int8_t> black;
    int64_t whites = 0, blacks = 0;
    std::vector<TwoTypeTree> out;

    bool target_black() const { return bounds.kind == ConditioningTarget::Kind::FaceCount; }

    bool over_target() const {
        return target_black() ? blacks > bounds.n : whites > bounds.n;
    }

    void emit() {
        int64_t got = target_black() ? blacks : whites;
        if (got != bounds.n) return;
        TwoTypeTree t;
        t.tree.parent = parent;
        t.tree.child_count = child_count;
        t.root_color = Color::White;
        out.push_back(std::move(t));
    }

    // Places the next vertex (or closes the tree when the stack is empty).
    void step() {
        if (stack.empty()) {
            emit();
            return;
        }
        auto [v, left] = stack.back();
        if (left == 1)
            stack.pop_back();
        else
            stack.back().second--;
        bool child_black = !black[v];
        const auto& supp = child_black ? black_support : white_support;
        int32_t nv = static_cast<int32_t>(parent.size());
        parent.push_back(v);
        black.push_back(child_black ? 1 : 0);
        (child_black ? blacks : whites)++;
        for (int64_t c : supp) {
            child_count.push_back(static_cast<int32_t>(c));
            if (c > 0) stack.push_back({nv, static_cast<int32_t>(c)});
            if (!over_target() && !too_big()) step();
            if (c > 0) stack.pop_back();
            child_count.pop_back();
        }
        (child_black ? blacks : whites)--;
        black.pop_back();
        parent.pop_back();
        if (left == 1)
            stack.push_back({v, left});
        else
            stack.back().second = left;
    }

    bool too_big() const {
        // Loose safety net; the per-color exact targets already prune.
        return static_cast<int64_t>(parent.size()) > 64 * (bounds.n + 1);
    }

    void run() {
        whites = 1;
        blacks = 0;
        black.push_back(0);
        parent.push_back(-1);
        for (int64_t c : white_support) {
            child_count.push_back(static_cast<int32_t>(c));
            if (c > 0) stack.push_back({0, static_cast<int32_t>(c)});
            if (!over_target()) step();
            if (c > 0) stack.pop_back();
            child_count.pop_back();
        }
    }
};

}  // namespace

std::vector<TwoTypeTree> enum_trees(const EnumBounds& bounds, const ExactOffspring& mu0,
                                    const ExactOffspring& mu1) {
    if (bounds.n < 1 || bounds.n > 8) throw std::invalid_argument("enumeration bound must be 1..8");
    TreeEnumerator e{bounds,
                     mu0.support(bounds.white_child_cap),
                     mu1.support(bounds.black_child_cap),
                     {}, {}, {}, {}, 0, 0, {},};
    e.run();
    return e.out;
}

namespace {

// All compositions of 2k+2 into k+1 positive parts, as increment vectors
// (x_1, ..., x_{k+1}) with x_i >= -1 summing to 0.
void compositions(int64_t k, const std::function<void(const std::vector<int64_t>&)>& f) {
    std::vector<int64_t> x(k + 1);
    std::function<void(int64_t, int64_t)> rec = [&](int64_t i, int64_t rest) {
        if (i == k) {
            x[k] = rest - 2;
            if (x[k] >= -1) f(x);
            return;
        }
        // part y in {1, ..., rest - (k - i)}; x_i = y - 2
        for (int64_t y = 1; y + (k - i) <= rest; ++y) {
            x[i] = y - 2;
            rec(i + 1, rest - y);
        }
    };
    rec(0, 2 * k + 2);
}

}  // namespace

std::vector<std::vector<int64_t>> enum_labelings(const TwoTypeTree& t) {
    auto h = height_process(t.tree);
    const int64_t n = t.size();
    // Gather black vertices and their increment choices.
    std::vector<int32_t> black_vs;
    BigInt total = 1;
    for (int32_t v = 0; v < n; ++v)
        if (h[v] & 1) {
            black_vs.push_back(v);
            total *= n_coeff(t.tree.child_count[v] + 1);
        }
    if (total > 1000000) throw std::invalid_argument("labeling count exceeds the 1e6 guard");

    std::vector<std::vector<std::vector<int64_t>>> choices(black_vs.size());
    for (size_t i = 0; i < black_vs.size(); ++i) {
        int64_t k = t.tree.child_count[black_vs[i]];
        if (k == 0) {
            choices[i] = {{}};
            continue;
        }
        compositions(k, [&](const std::vector<int64_t>& x) {
            std::vector<int64_t> prefix(k);
            int64_t acc = 0;
            for (int64_t j = 0; j < k; ++j) {
                acc += x[j];
                prefix[j] = acc;
            }
            choices[i].push_back(std::move(prefix));
        });
    }

    ChildIndex ci(t.tree);
    std::vector<std::vector<int64_t>> out;
    std::vector<size_t> idx(black_vs.size(), 0);
    for (;;) {
        // Materialize one labeling; blacks run in depth-first order, so a
        // black vertex's parent label is already final when it is processed.
        std::vector<int64_t> labels(n, 0);
        for (size_t i = 0; i < black_vs.size(); ++i) {
            int32_t v = black_vs[i];
            labels[v] = labels[t.tree.parent[v]];
            const auto& pre = choices[i][idx[i]];
            int64_t j = 0;
            for (int32_t w = ci.first_child[v]; w != -1; w = ci.next_sibling[w], ++j)
                labels[w] = labels[v] + pre[j];
        }
        out.push_back(std::move(labels));
        // Advance the mixed-radix counter.
        size_t i = 0;
        while (i < idx.size() && ++idx[i] == choices[i].size()) idx[i++] = 0;
        if (i == idx.size()) break;
    }
    return out;
}

Rational exact_tree_probability(const TwoTypeTree& t, const ExactOffspring& mu0, const ExactOffspring& mu1) {
    auto h = height_process(t.tree);
    Rational p = 1;
    for (int32_t v = 0; v < t.size(); ++v) {
        Rational f = (h[v] & 1) ? mu1.prob(t.tree.child_count[v]) : mu0.prob(t.tree.child_count[v]);
        p *= f;
    }
    return p;
}

Rational exact_tree_probability_weight_form(const TwoTypeTree& t, const WeightSequence& q, const Rational& Z) {
    auto h = height_process(t.tree);
    Rational p = 1;
    int64_t whites = 0;
    for (int32_t v = 0; v < t.size(); ++v) {
        if (h[v] & 1) {
            int64_t c = t.tree.child_count[v];
            Rational zp = 1;
            for (int64_t i = 0; i < c; ++i) zp *= Z;
            p *= zp * Rational(n_coeff(c + 1)) * q.term(c + 1);
        } else {
            whites++;
        }
    }
    for (int64_t i = 0; i < whites; ++i) p /= Z;
    return p;
}

Rational partition_partial_sum(const WeightSequence& q, int64_t N) {
    if (!q.finite_support())
        throw std::invalid_argument("partition partial sums need finite support (tail sums are irrational)");
    if (N < 0 || N > 6) throw std::invalid_argument("partition partial sum capped at N <= 6");
    Rational total = 1;  // the vertex map carries weight q_0 = 1
    // Black support from the weights; white child counts are bounded by the
    // face budget since every black vertex is some white's child.
    std::vector<Rational> mu1_dummy;
    for (int64_t faces = 1; faces <= N; ++faces) {
        EnumBounds b;
        b.kind = ConditioningTarget::Kind::FaceCount;
        b.n = faces;
        b.white_child_cap = faces;
        b.black_child_cap = static_cast<int64_t>(q.prefix().size());
        // Supports: any white count 0..faces, black counts where q positive.
        std::vector<Rational> white_pmf(faces + 1, Rational(1, faces + 1));
        std::vector<Rational> black_pmf;
        for (int64_t k = 0; k + 1 <= static_cast<int64_t>(q.prefix().size()); ++k)
            black_pmf.push_back(q.term(k + 1) > 0 ? Rational(1) : Rational(0));
        auto trees = enum_trees(b, ExactOffspring::table(white_pmf), ExactOffspring::table(black_pmf));
        auto hprob = [&](const TwoTypeTree& t) {
            auto h = height_process(t.tree);
            Rational w = 1;
            for (int32_t v = 0; v < t.size(); ++v)
                if (h[v] & 1) {
                    int64_t c = t.tree.child_count[v];
                    w *= Rational(n_coeff(c + 1)) * q.term(c + 1);
                }
            return w;
        };
        for (const auto& t : trees) total += hprob(t);
    }
    return total;
}

ExactDistribution exact_conditional_law(const WeightSequence& q, const Rational& Z,
                                        const EnumBounds& bounds) {
    auto mu0 = ExactOffspring::mu0_of(Z);
    auto mu1 = ExactOffspring::mu1_of(q, Z);
    auto trees = enum_trees(bounds, mu0, mu1);

    ExactDistribution dist;
    // The caps are complete when no tree of the conditioned family can carry a
    // child count beyond them. Conditioning on n faces bounds white child
    // counts by n; black counts are bounded only for finite-support weights.
    // Conditioning on n whites is finite iff black leaves are impossible, in
    // which case both counts are bounded by n - 1.
    if (bounds.kind == ConditioningTarget::Kind::FaceCount) {
        dist.complete = bounds.white_child_cap >= bounds.n && q.finite_support() &&
                        bounds.black_child_cap + 1 >= static_cast<int64_t>(q.prefix().size());
    } else {
        dist.complete = mu1.prob(0) == 0 && bounds.white_child_cap >= bounds.n - 1 &&
                        bounds.black_child_cap >= bounds.n - 1;
    }

    std::map<std::string, Rational> acc;
    for (const auto& t : trees) {
        Rational shape_p = exact_tree_probability(t, mu0, mu1);
        if (shape_p == 0) continue;
        auto labelings = enum_labelings(t);
        Rational per_label = shape_p / Rational(static_cast<int64_t>(labelings.size()));
        for (auto& labels : labelings) {
            LabeledMobile m;
            m.t = t;
            m.labels = std::move(labels);
            acc.emplace(mobile_to_json(m), per_label);
        }
    }
    for (auto& [k, v] : acc) {
        dist.total += v;
        dist.entries.push_back({k, v});
    }
    return dist;
}

std::string ExactDistribution::to_json() const {
    json j;
    j["complete"] = complete;
    j["total_mass"] = format_rational(total);
    j["entries"] = json::array();
    for (const auto& [key, p] : entries) {
        json e;
        e["mobile"] = json::parse(key);
        e["probability"] = format_rational(p / total);
        e["unconditioned"] = format_rational(p);
        j["entries"].push_back(e);
    }
    return j.dump();
}

DisplacementEnum displacement_enum(int64_t k) {
    if (k < 1 || k > 6) throw std::invalid_argument("displacement enumeration capped at k <= 6");
    DisplacementEnum de;
    de.k = k;
    de.vector_count = n_coeff(k + 1);
    de.marginal.assign(k + 1, std::vector<Rational>(k + 2, Rational(0)));
    std::vector<Rational> ex(k + 1, Rational(0)), exx(k + 1, Rational(0));
    Rational ex1x2 = 0;
    std::vector<Rational> ey2(k, Rational(0));
    BigInt count = 0;
    compositions(k, [&](const std::vector<int64_t>& x) {
        ++count;
        int64_t acc = 0;
        for (int64_t i = 0; i <= k; ++i) {
            de.marginal[i][x[i] + 1] += 1;
            ex[i] += x[i];
            exx[i] += x[i] * x[i];
            if (i < k) {
                acc += x[i];
                ey2[i] += acc * acc;
            }
        }
        ex1x2 += x[0] * x[1];
    });
    if (count != de.vector_count) throw std::logic_error("composition count mismatch");
    Rational N(count);
    for (int64_t i = 0; i <= k; ++i) {
        for (auto& m : de.marginal[i]) m /= N;
        Rational mean = ex[i] / N;
        de.var_x.push_back(exx[i] / N - mean * mean);
    }
    de.cov_x1_x2 = ex1x2 / N - (ex[0] / N) * (ex[1] / N);
    de.sum_var_prefix = 0;
    for (int64_t l = 0; l < k; ++l) {
        de.var_prefix.push_back(ey2[l] / N);  // prefix sums are centered
        de.sum_var_prefix += de.var_prefix.back();
    }
    return de;
}

}  // namespace bpmap
