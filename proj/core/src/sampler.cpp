#include "bpmap/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bpmap {

OffspringDist OffspringDist::geometric(double p) {
    if (!(p > 0 && p < 1)) throw std::invalid_argument("geometric parameter must lie in (0,1)");
    OffspringDist d;
    d.geometric_ = true;
    d.p_ = p;
    d.log_p_ = std::log(p);
    d.mean_ = p / (1 - p);
    return d;
}

OffspringDist OffspringDist::table(const std::vector<double>& pmf) {
    OffspringDist d;
    d.pmf_ = pmf;
    d.cdf_.resize(pmf.size());
    double c = 0;
    for (size_t k = 0; k < pmf.size(); ++k) {
        if (pmf[k] < 0) throw std::invalid_argument("negative pmf entry");
        c += pmf[k];
        d.cdf_[k] = c;
        d.mean_ += static_cast<double>(k) * pmf[k];
    }
    if (c <= 0) throw std::invalid_argument("empty offspring table");
    // Normalize away truncation dust so draws cover the table exactly.
    for (auto& x : d.cdf_) x /= c;
    d.mean_ /= c;
    d.cdf_.back() = 1.0;
    return d;
}

int64_t OffspringDist::draw(Rng& rng) const {
    if (geometric_) {
        if (p_ == 0.5) {
            // Exact: count trailing one-bits of a uniform word.
            int64_t k = 0;
            for (;;) {
                uint64_t u = ~rng.next_u64();
                if (u != 0) return k + __builtin_ctzll(u);
                k += 64;
            }
        }
        double u = rng.next_double();
        if (u <= 0) return 0;
        return static_cast<int64_t>(std::floor(std::log1p(-u) / log_p_));
    }
    double u = rng.next_double();
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<int64_t>(it - cdf_.begin());
}

int64_t OffspringDist::draw_buffered(Rng& rng, BitBuffer& buf) const {
    if (!(geometric_ && p_ == 0.5)) return draw(rng);
    int64_t k = 0;
    for (;;) {
        if (buf.avail == 0) {
            buf.bits = rng.next_u64();
            buf.avail = 64;
        }
        uint64_t mask = buf.avail == 64 ? ~0ull : ((1ull << buf.avail) - 1);
        uint64_t zeros = ~buf.bits & mask;
        if (zeros == 0) {  // the remaining bits are all ones
            k += buf.avail;
            buf.avail = 0;
            continue;
        }
        int run = __builtin_ctzll(zeros);
        buf.bits >>= run + 1;
        buf.avail -= run + 1;
        return k + run;
    }
}

OffspringDist white_offspring(const BranchingLaw& law) { return OffspringDist::geometric(law.mu0_param); }
OffspringDist black_offspring(const BranchingLaw& law) { return OffspringDist::table(law.mu1_pmf); }

namespace {

enum class GenOutcome { Accept, Overshoot, Overflow, Undershoot };

struct ShapeBuffers {
    std::vector<int32_t> parent;
    std::vector<int32_t> child_count;
    std::vector<std::pair<int32_t, int32_t>> stack;  // (vertex, children left to emit)
    std::vector<int8_t> black;                       // color per vertex
    std::vector<int32_t> slots;                      // count-only work stack
};

// Depth-first generation with an explicit work stack. target_count < 0 means
// unconditioned; otherwise generation aborts as soon as the count of the
// target color exceeds it.
GenOutcome generate_shape(const OffspringDist& white, const OffspringDist& black, int64_t max_size,
                          int64_t target_count, bool target_is_black, Rng& rng, BitBuffer& bits,
                          ShapeBuffers& buf) {
    buf.parent.clear();
    buf.child_count.clear();
    buf.black.clear();
    buf.stack.clear();

    int64_t blacks = 0, whites = 1;
    if (target_count >= 0 && !target_is_black && whites > target_count) return GenOutcome::Overshoot;

    int64_t c0 = white.draw_buffered(rng, bits);
    buf.parent.push_back(-1);
    buf.child_count.push_back(static_cast<int32_t>(c0));
    buf.black.push_back(0);
    if (c0 > 0) buf.stack.push_back({0, static_cast<int32_t>(c0)});

    while (!buf.stack.empty()) {
        auto& top = buf.stack.back();
        int32_t v = top.first;
        if (--top.second == 0) buf.stack.pop_back();

        bool child_black = !buf.black[v];
        if (static_cast<int64_t>(buf.parent.size()) >= max_size) return GenOutcome::Overflow;
        int64_t c = child_black ? black.draw_buffered(rng, bits) : white.draw_buffered(rng, bits);
        if (child_black) {
            if (++blacks > target_count && target_count >= 0 && target_is_black) return GenOutcome::Overshoot;
        } else {
            if (++whites > target_count && target_count >= 0 && !target_is_black) return GenOutcome::Overshoot;
        }
        int32_t nv = static_cast<int32_t>(buf.parent.size());
        buf.parent.push_back(v);
        buf.child_count.push_back(static_cast<int32_t>(c));
        buf.black.push_back(child_black ? 1 : 0);
        if (c > 0) buf.stack.push_back({nv, static_cast<int32_t>(c)});
    }

    if (target_count >= 0) {
        int64_t got = target_is_black ? blacks : whites;
        if (got != target_count) return GenOutcome::Undershoot;
    }
    return GenOutcome::Accept;
}

// Count-only replica of generate_shape: identical draw sequence, no arrays.
// The work stack packs (children left << 1) | parent-is-black and runs on a
// raw pointer so pops and pushes compile branch-free. The templated draw
// lets the fair-coin case inline its bit runs.
template <typename DrawWhite, typename DrawBlack>
GenOutcome count_shape_impl(DrawWhite&& draw_white, DrawBlack&& draw_black, int64_t max_size,
                            int64_t target_count, bool target_is_black, std::vector<int32_t>& slots) {
    if (slots.size() < 4096) slots.resize(4096);
    int32_t* base_ptr = slots.data();
    int32_t* sp = base_ptr;
    int32_t* end = base_ptr + slots.size() - 1;

    int64_t blacks = 0, whites = 1, size = 1;
    const int64_t target = target_count < 0 ? (int64_t(1) << 62) : target_count;
    if (!target_is_black && whites > target) return GenOutcome::Overshoot;

    int64_t c0 = draw_white();
    *sp = static_cast<int32_t>(c0 << 1);
    sp += c0 > 0;

    while (sp != base_ptr) {
        int32_t e = sp[-1];
        int32_t child_black = ~e & 1;
        sp[-1] = e - 2;
        sp -= (e >> 1) == 1;

        if (size >= max_size) return GenOutcome::Overflow;
        int64_t c = child_black ? draw_black() : draw_white();
        ++size;
        blacks += child_black;
        whites += child_black ^ 1;
        if ((target_is_black ? blacks : whites) > target) return GenOutcome::Overshoot;
        if (sp == end) {  // grow the stack storage, keeping the offset
            size_t off = static_cast<size_t>(sp - base_ptr);
            slots.resize(slots.size() * 2);
            base_ptr = slots.data();
            sp = base_ptr + off;
            end = base_ptr + slots.size() - 1;
        }
        *sp = static_cast<int32_t>((c << 1) | child_black);
        sp += c > 0;
    }

    if (target_count >= 0) {
        int64_t got = target_is_black ? blacks : whites;
        if (got != target_count) return GenOutcome::Undershoot;
    }
    return GenOutcome::Accept;
}

GenOutcome count_shape(const OffspringDist& white, const OffspringDist& black, int64_t max_size,
                       int64_t target_count, bool target_is_black, Rng& rng, BitBuffer& bits,
                       std::vector<int32_t>& slots) {
    return count_shape_impl([&] { return white.draw_buffered(rng, bits); },
                            [&] { return black.draw_buffered(rng, bits); }, max_size, target_count,
                            target_is_black, slots);
}

// Fair-coin specialization: geometric(1/2) bit runs inlined, one draw site,
// only the targeted color counted. Bit consumption mirrors draw_buffered
// exactly so the accepted attempt replays bit-for-bit.
GenOutcome count_shape_fair(int64_t max_size, int64_t target_count, bool target_is_black, Rng& rng,
                            std::vector<int32_t>& slots) {
    if (slots.size() < 4096) slots.resize(4096);
    int32_t* base_ptr = slots.data();
    int32_t* sp = base_ptr;
    int32_t* end = base_ptr + slots.size() - 1;

    uint64_t zeros = 0;  // inverted remaining bits; high (64 - avail) bits are zero
    int avail = 0;
    auto draw = [&]() -> int64_t {
        int64_t k = 0;
        for (;;) {
            if (avail == 0) {
                zeros = ~rng.next_u64();
                avail = 64;
            }
            if (zeros == 0) {
                k += avail;
                avail = 0;
                continue;
            }
            int run = __builtin_ctzll(zeros);
            zeros >>= run + 1;
            avail -= run + 1;
            return k + run;
        }
    };

    const int32_t tb = target_is_black ? 1 : 0;
    int64_t tcount = target_is_black ? 0 : 1;  // the root is white
    int64_t size = 1;
    if (tcount > target_count) return GenOutcome::Overshoot;

    int64_t c0 = draw();
    *sp = static_cast<int32_t>(c0 << 1);
    sp += c0 > 0;

    while (sp != base_ptr) {
        int32_t e = sp[-1];
        int32_t child_black = ~e & 1;
        sp[-1] = e - 2;
        sp -= (e >> 1) == 1;

        if (size >= max_size) return GenOutcome::Overflow;
        int64_t c = draw();
        ++size;
        tcount += child_black == tb;
        if (tcount > target_count) return GenOutcome::Overshoot;
        if (sp == end) {
            size_t off = static_cast<size_t>(sp - base_ptr);
            slots.resize(slots.size() * 2);
            base_ptr = slots.data();
            sp = base_ptr + off;
            end = base_ptr + slots.size() - 1;
        }
        *sp = static_cast<int32_t>((c << 1) | child_black);
        sp += c > 0;
    }
    return tcount == target_count ? GenOutcome::Accept : GenOutcome::Undershoot;
}

TwoTypeTree to_tree(ShapeBuffers& buf) {
    TwoTypeTree t;
    t.tree.parent = buf.parent;
    t.tree.child_count = buf.child_count;
    t.root_color = Color::White;
    return t;
}

}  // namespace

std::optional<TwoTypeTree> sample_two_type_tree(const OffspringDist& white, const OffspringDist& black,
                                                int64_t max_size, Rng& rng) {
    ShapeBuffers buf;
    BitBuffer bits;
    auto out = generate_shape(white, black, max_size, -1, false, rng, bits, buf);
    if (out == GenOutcome::Overflow) return std::nullopt;
    return to_tree(buf);
}

std::optional<TwoTypeTree> sample_tree(const BranchingLaw& law, const SamplerBudget& budget, Rng& rng) {
    if (law.m0 * law.m1 > 1 + 1e-8) throw std::invalid_argument("sample_tree needs a (sub)critical law");
    return sample_two_type_tree(white_offspring(law), black_offspring(law), budget.max_tree_size, rng);
}

std::vector<int64_t> sample_displacement(int64_t k, Rng& rng) {
    if (k < 1) throw std::invalid_argument("displacement needs k >= 1");
    if (k == 1) {
        // Composition of 4 into two positive parts: first part uniform on {1,2,3}.
        return {rng.uniform_int(-1, 1)};
    }
    // Floyd's algorithm: uniform k-subset of {1, ..., 2k+1}.
    thread_local std::vector<int64_t> bars;
    bars.clear();
    for (int64_t j = k + 2; j <= 2 * k + 1; ++j) {
        int64_t t = rng.uniform_int(1, j);
        auto it = std::lower_bound(bars.begin(), bars.end(), t);
        if (it != bars.end() && *it == t)
            bars.insert(std::lower_bound(bars.begin(), bars.end(), j), j);
        else
            bars.insert(it, t);
    }
    // Parts y_i of a composition of 2k+2; increments x_i = y_i - 2; return
    // prefix sums of the first k increments.
    std::vector<int64_t> out(k);
    int64_t prev = 0, acc = 0;
    for (int64_t i = 0; i < k; ++i) {
        int64_t y = bars[i] - prev;
        prev = bars[i];
        acc += y - 2;
        out[i] = acc;
    }
    return out;
}

std::vector<int64_t> detail::sample_displacement_broken(int64_t k, Rng& rng) {
    // Deliberately wrong: bars drawn from {1, ..., 2k} instead of {1, ..., 2k+1}.
    std::vector<int64_t> bars;
    for (int64_t j = k + 1; j <= 2 * k; ++j) {
        int64_t t = rng.uniform_int(1, j);
        auto it = std::lower_bound(bars.begin(), bars.end(), t);
        if (it != bars.end() && *it == t)
            bars.insert(std::lower_bound(bars.begin(), bars.end(), j), j);
        else
            bars.insert(it, t);
    }
    bars.push_back(2 * k + 1);
    std::vector<int64_t> out(k);
    int64_t prev = 0, acc = 0;
    for (int64_t i = 0; i < k; ++i) {
        int64_t y = bars[i] - prev;
        prev = bars[i];
        acc += y - 2;
        out[i] = acc;
    }
    return out;
}

LabeledMobile label_tree(const TwoTypeTree& t, Rng& rng) {
    if (t.root_color != Color::White) throw std::invalid_argument("label_tree needs a white root");
    const int64_t n = t.size();
    LabeledMobile m;
    m.t = t;
    m.labels.assign(n, 0);
    auto h = height_process(t.tree);
    ChildIndex ci(t.tree);
    for (int32_t v = 0; v < n; ++v) {
        if (!(h[v] & 1)) continue;  // black vertices drive the increments
        m.labels[v] = m.labels[t.tree.parent[v]];
        int64_t c = t.tree.child_count[v];
        if (c == 0) continue;
        auto disp = sample_displacement(c, rng);
        int64_t j = 0;
        for (int32_t w = ci.first_child[v]; w != -1; w = ci.next_sibling[w], ++j)
            m.labels[w] = m.labels[v] + disp[j];
    }
    return m;
}

ConditionedShape sample_conditioned_shape(const OffspringDist& white, const OffspringDist& black,
                                          const ConditioningTarget& target, const SamplerBudget& budget,
                                          const Rng& base) {
    ConditionedShape res;
    res.stats.seed = budget.rng_seed;
    bool target_black = target.kind == ConditioningTarget::Kind::FaceCount;
    bool fair = white.is_fair_geometric() && black.is_fair_geometric();
    ShapeBuffers buf;
    for (int64_t attempt = 0; attempt < budget.max_attempts; ++attempt) {
        Rng rng = base.substream(static_cast<uint64_t>(attempt));
        BitBuffer bits;
        res.stats.attempts++;
        auto out = fair ? count_shape_fair(budget.max_tree_size, target.n, target_black, rng, buf.slots)
                        : count_shape(white, black, budget.max_tree_size, target.n, target_black, rng,
                                      bits, buf.slots);
        if (out == GenOutcome::Overflow) {
            res.stats.aborted_overflow++;
            continue;
        }
        if (out == GenOutcome::Overshoot) {
            res.stats.aborted_overshoot++;
            continue;
        }
        if (out == GenOutcome::Undershoot) continue;
        // Replay the accepted attempt with the same substream and draw
        // discipline, now materializing the arrays.
        Rng replay = base.substream(static_cast<uint64_t>(attempt));
        BitBuffer replay_bits;
        auto out2 = generate_shape(white, black, budget.max_tree_size, target.n, target_black, replay,
                                   replay_bits, buf);
        if (out2 != GenOutcome::Accept) throw std::logic_error("conditioned replay diverged");
        res.tree = to_tree(buf);
        return res;
    }
    return res;
}

bool target_feasible(const BranchingLaw& law, const ConditioningTarget& target) {
    if (target.n < 1) return false;
    if (target.kind == ConditioningTarget::Kind::FaceCount) {
        // mu0 is geometric with full support: a root with n black leaves (or
        // minimal black subtrees) always carries positive probability.
        return true;
    }
    // White count n requires n-1 expressible as a sum of mu1-support values.
    int64_t want = target.n - 1;
    if (want == 0) return true;
    std::vector<char> reach(want + 1, 0);
    reach[0] = 1;
    std::vector<int64_t> supp;
    for (size_t k = 1; k < law.mu1_pmf.size(); ++k)
        if (law.mu1_pmf[k] > 0) supp.push_back(static_cast<int64_t>(k));
    for (int64_t s : supp)
        for (int64_t v = s; v <= want; ++v)
            if (reach[v - s]) reach[v] = 1;
    return reach[want];
}

ConditionedSample sample_conditioned(const BranchingLaw& law, const ConditioningTarget& target,
                                     const SamplerBudget& budget) {
    if (law.m0 * law.m1 > 1 + 1e-8) throw std::invalid_argument("conditioned sampling needs a critical law");
    if (!target_feasible(law, target))
        throw InfeasibleTarget("conditioning event has probability zero on the support lattice");
    Rng base(budget.rng_seed);
    auto shape = sample_conditioned_shape(white_offspring(law), black_offspring(law), target, budget, base);
    ConditionedSample res;
    res.stats = shape.stats;
    if (!shape.tree) return res;
    // Labels only after shape acceptance, on the accepted attempt's substream.
    Rng label_rng = base.substream(static_cast<uint64_t>(res.stats.attempts - 1)).substream(0x1abe1);
    res.mobile = label_tree(*shape.tree, label_rng);
    return res;
}

}  // namespace bpmap
