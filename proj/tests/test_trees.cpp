#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "bpmap/rng.hpp"
#include "bpmap/sampler.hpp"
#include "bpmap/trees.hpp"

using namespace bpmap;

namespace {

LabeledMobile make_mobile(std::vector<int32_t> parents, std::vector<int64_t> labels) {
    LabeledMobile m;
    m.t.tree = PlaneTree::from_parents(std::move(parents));
    m.t.root_color = Color::White;
    m.labels = std::move(labels);
    validate_mobile(m);
    return m;
}

// All plane trees with exactly n vertices, by enumerating height processes.
void all_trees(int n, const std::function<void(const PlaneTree&)>& f) {
    std::vector<int32_t> h(n);
    std::function<void(int)> rec = [&](int i) {
        if (i == n) {
            f(tree_from_height(h));
            return;
        }
        for (int32_t v = 1; v <= h[i - 1] + 1; ++v) {
            h[i] = v;
            rec(i + 1);
        }
    };
    h[0] = 0;
    if (n == 1)
        f(tree_from_height(h));
    else
        rec(1);
}

TwoTypeTree random_two_type(Rng& rng, int64_t cap = 4000) {
    // Slightly subcritical mixed laws so trees stay finite but interesting.
    auto mu0 = OffspringDist::table({0.35, 0.3, 0.2, 0.1, 0.05});
    auto mu1 = OffspringDist::table({0.4, 0.25, 0.2, 0.1, 0.05});
    for (;;) {
        auto t = sample_two_type_tree(mu0, mu1, cap, rng);
        if (t) return *t;
    }
}

}  // namespace

TEST_CASE("height process") {
    CHECK(height_process(PlaneTree::single()) == std::vector<int32_t>{0});
    auto t = PlaneTree::from_parents({-1, 0, 1, 1, 0});
    CHECK(height_process(t) == std::vector<int32_t>{0, 1, 2, 2, 1});
    auto chain = PlaneTree::from_parents({-1, 0, 1, 2});
    CHECK(height_process(chain) == std::vector<int32_t>{0, 1, 2, 3});
}

TEST_CASE("contour process") {
    CHECK(contour_process(PlaneTree::single()) == std::vector<int32_t>{0});
    auto t = PlaneTree::from_parents({-1, 0, 1, 1, 0});
    CHECK(contour_process(t) == std::vector<int32_t>{0, 1, 2, 1, 2, 1, 0, 1, 0});
    auto chain = PlaneTree::from_parents({-1, 0, 1});
    CHECK(contour_process(chain) == std::vector<int32_t>{0, 1, 2, 1, 0});
}

TEST_CASE("first-visit identity links contour and height") {
    Rng rng(7);
    for (int rep = 0; rep < 200; ++rep) {
        auto t = random_two_type(rng).tree;
        auto walk = contour_vertices(t);
        auto h = height_process(t);
        std::vector<int64_t> first_visit(t.size(), -1);
        for (size_t i = 0; i < walk.size(); ++i)
            if (first_visit[walk[i]] == -1) first_visit[walk[i]] = static_cast<int64_t>(i);
        for (int32_t k = 0; k < t.size(); ++k) CHECK(first_visit[k] + h[k] == 2 * k);
    }
}

TEST_CASE("height and contour encodings are bijective") {
    // Exhaustive up to size 8 (every tree), randomized beyond.
    for (int n = 1; n <= 8; ++n) {
        all_trees(n, [&](const PlaneTree& t) {
            auto h = height_process(t);
            auto t2 = tree_from_height(h);
            CHECK(t2.parent == t.parent);
            auto c = contour_process(t);
            auto t3 = tree_from_contour(c);
            CHECK(t3.parent == t.parent);
            CHECK(height_process(t3) == h);
        });
    }
    Rng rng(13);
    for (int rep = 0; rep < 10000; ++rep) {
        auto t = random_two_type(rng, 2000).tree;
        auto t2 = tree_from_contour(contour_process(t));
        CHECK(t2.parent == t.parent);
    }
}

TEST_CASE("snake and contour label processes") {
    auto single = make_mobile({-1}, {0});
    CHECK(snake_process(single) == std::vector<int64_t>{0});
    CHECK(contour_label_process(single) == std::vector<int64_t>{0});

    auto path = make_mobile({-1, 0, 1}, {0, 0, 1});
    CHECK(snake_process(path) == std::vector<int64_t>{0, 0, 1});
    CHECK(contour_label_process(path) == std::vector<int64_t>{0, 1, 0});

    // Black vertex with two children, increments (-1, +1, 0) cyclically.
    auto fork = make_mobile({-1, 0, 1, 1}, {0, 0, -1, 0});
    CHECK(snake_process(fork) == std::vector<int64_t>{0, 0, -1, 0});

    Rng rng(3);
    for (int rep = 0; rep < 100; ++rep) {
        auto m = label_tree(random_two_type(rng), rng);
        auto r = contour_label_process(m);
        CHECK(r.front() == 0);
        CHECK(r.back() == 0);
    }
}

TEST_CASE("theta_min") {
    CHECK(theta_min(make_mobile({-1}, {0})) == 0);
    CHECK(theta_min(make_mobile({-1, 0, 1}, {0, 0, 0})) == 0);
    CHECK(theta_min(make_mobile({-1, 0, 1}, {0, 0, -1})) == 2);
    Rng rng(11);
    for (int rep = 0; rep < 100; ++rep) {
        auto m = label_tree(random_two_type(rng), rng);
        auto rr = reroot(m, theta_min(m));
        CHECK(*std::min_element(rr.mobile.labels.begin(), rr.mobile.labels.end()) == 0);
        CHECK(rr.mobile.labels[0] == 0);
    }
}

TEST_CASE("reroot identities") {
    auto m = make_mobile({-1, 0, 1, 1, 0, 4, 5, 6}, {0, 0, -1, 1, 0, 0, 0, 1});
    const int64_t n = m.size();
    auto r = contour_label_process(m);
    const int64_t period = 2 * (n - 1);

    CHECK(reroot(m, 0).mobile.t.tree.parent == m.t.tree.parent);
    CHECK(reroot(m, 0).x_theta == 2 * n);

    for (int64_t theta = 0; theta < period; theta += 2) {
        auto res = reroot(m, theta);
        validate_mobile(res.mobile);
        CHECK(res.x_theta == 2 * n - theta);

        // Label identity: rerooted labels in contour order are differences of
        // the original cyclic label walk.
        auto r2 = contour_label_process(res.mobile);
        for (int64_t i = 0; i < n; ++i) {
            int64_t src = ((theta + 2 * i) / 2) % (n - 1);
            CHECK(r2[i] == r[src] - r[theta / 2]);
        }

        // Double reroot returns to the original mobile.
        if (theta > 0) {
            auto back = reroot(res.mobile, period - theta);
            CHECK(back.mobile.t.tree.parent == m.t.tree.parent);
            CHECK(back.mobile.labels == m.labels);
        }
    }
    CHECK_THROWS_AS(reroot(m, 1), std::invalid_argument);
}

TEST_CASE("contour reroot height identity") {
    Rng rng(17);
    for (int rep = 0; rep < 50; ++rep) {
        auto m = label_tree(random_two_type(rng, 200), rng);
        const int64_t n = m.size();
        if (n < 2) continue;
        const int64_t period = 2 * (n - 1);
        auto hat = contour_process(m.t.tree);
        std::vector<int32_t> ext(hat.begin(), hat.end() - 1);  // cyclic walk, period entries
        int64_t theta = 2 * static_cast<int64_t>(rng.uniform_below((n - 1)));
        auto res = reroot(m, theta);
        auto hat2 = contour_process(res.mobile.t.tree);
        // Hat H'(i) = Hat H(theta (+) i) + Hat H(theta) - 2 min between the two
        // cyclic times, with (+) modulo the contour period.
        for (int64_t i = 0; i <= period; ++i) {
            int64_t w = (theta + i) % period;
            int64_t lo = std::min(theta, w), hi = std::max(theta, w);
            int32_t mn = 1 << 30;
            for (int64_t u = lo; u <= hi; ++u) mn = std::min(mn, ext[u]);
            CHECK(hat2[i] == ext[w] + ext[theta] - 2 * mn);
        }
    }
}

TEST_CASE("gamma projection") {
    TwoTypeTree single{PlaneTree::single(), Color::White};
    auto g = gamma_project(single);
    CHECK(g.tree.size() == 1);

    TwoTypeTree t{PlaneTree::from_parents({-1, 0, 1, 1}), Color::White};
    auto g2 = gamma_project(t);
    CHECK(g2.tree.size() == 3);
    CHECK(g2.tree.child_count[0] == 2);

    Rng rng(5);
    for (int rep = 0; rep < 200; ++rep) {
        auto tt = random_two_type(rng, 500);
        auto gr = gamma_project(tt);
        validate_plane_tree(gr.tree);
        CHECK(gr.tree.size() == tt.count(Color::White));
        auto h = height_process(tt.tree);
        auto gh = height_process(gr.tree);
        int32_t expected_rank = 0;
        for (int32_t v = 0; v < tt.size(); ++v) {
            if (h[v] & 1) {
                CHECK(gr.image[v] == gr.image[tt.tree.parent[v]]);
                continue;
            }
            CHECK(2 * gh[gr.image[v]] == h[v]);  // heights halve
            CHECK(gr.image[v] == expected_rank++);  // depth-first order preserved
        }
    }
}

TEST_CASE("gamma prime projection") {
    TwoTypeTree single{PlaneTree::single(), Color::White};
    CHECK(gamma_prime_project(single).forest.empty());

    TwoTypeTree t{PlaneTree::from_parents({-1, 0, 1}), Color::White};
    auto g = gamma_prime_project(t);
    REQUIRE(g.forest.size() == 1);
    CHECK(g.forest[0].size() == 1);

    Rng rng(23);
    for (int rep = 0; rep < 200; ++rep) {
        auto tt = random_two_type(rng, 500);
        auto gr = gamma_prime_project(tt);
        int64_t total = 0;
        for (const auto& comp : gr.forest) {
            validate_plane_tree(comp);
            total += comp.size();
        }
        CHECK(total == tt.count(Color::Black));
        CHECK(static_cast<int64_t>(gr.forest.size()) == tt.tree.child_count[0]);

        auto h = height_process(tt.tree);
        std::vector<std::vector<int32_t>> comp_h;
        for (const auto& comp : gr.forest) {
            auto hh = height_process(comp);
            comp_h.emplace_back(hh);
        }
        // Depth-first rank over the whole forest is preserved, and forest-word
        // heights halve: 2(h'+1) = h+1 with tree heights h.
        int32_t comp_idx = 0, rank_in = 0;
        for (int32_t v = 0; v < tt.size(); ++v) {
            if (!(h[v] & 1)) continue;
            auto [ci, r] = gr.image[v];
            if (ci != comp_idx) {
                CHECK(ci == comp_idx + 1);
                comp_idx = ci;
                rank_in = 0;
            }
            CHECK(r == rank_in++);
            CHECK(2 * (comp_h[ci][r] + 1) == h[v] + 1);
        }
    }
}

TEST_CASE("type counting") {
    TwoTypeTree single{PlaneTree::single(), Color::White};
    auto tc = type_counting(single, Color::White);
    CHECK(tc.J == std::vector<int64_t>{1});
    CHECK(tc.G == std::vector<int64_t>{0, 0});

    TwoTypeTree t{PlaneTree::from_parents({-1, 0, 1, 1, 0}), Color::White};
    auto tb = type_counting(t, Color::Black);
    CHECK(tb.J == std::vector<int64_t>{0, 1, 1, 1, 2});
    CHECK(tb.G == std::vector<int64_t>{1, 4, 4});

    auto tw = type_counting(t, Color::White);
    for (size_t k = 0; k < tb.J.size(); ++k)
        CHECK(tb.J[k] + tw.J[k] == static_cast<int64_t>(k) + 1);
}

TEST_CASE("identity deviation statistic") {
    // A perfectly alternating sequence has deviation about 1/size.
    TwoTypeTree t{PlaneTree::from_parents({-1, 0, 1, 2, 3, 4}), Color::White};
    auto tc = type_counting(t, Color::White);
    CHECK(sup_identity_deviation(tc.J, 3) < 0.4);
    CHECK(sup_identity_deviation(tc.J, 3) > 0.0);
}

TEST_CASE("rerooting preserves the unrooted shape and the label multiset") {
    Rng rng(29);
    for (int rep = 0; rep < 300; ++rep) {
        auto m = label_tree(random_two_type(rng, 10), rng);
        if (m.size() < 2 || m.size() > 10) continue;
        auto sig = unrooted_signature(m.t.tree);
        auto h = height_process(m.t.tree);
        std::multiset<int64_t> base;
        for (int32_t v = 0; v < m.size(); ++v)
            if (!(h[v] & 1)) base.insert(m.labels[v]);  // white labels carry the content
        for (int64_t theta = 0; theta < 2 * (m.size() - 1); theta += 2) {
            auto res = reroot(m, theta);
            CHECK(unrooted_signature(res.mobile.t.tree) == sig);
            auto r = contour_label_process(m);
            int64_t shift = r[theta / 2];
            auto h2 = height_process(res.mobile.t.tree);
            std::multiset<int64_t> shifted;
            for (int32_t v = 0; v < res.mobile.size(); ++v)
                if (!(h2[v] & 1)) shifted.insert(res.mobile.labels[v] + shift);
            CHECK(shifted == base);
        }
    }
}

TEST_CASE("mobile json round trip is bit exact") {
    auto m = make_mobile({-1, 0, 1, 1, 0, 4, 5, 6}, {0, 0, -1, 1, 0, 0, 0, 1});
    auto text = mobile_to_json(m);
    auto m2 = mobile_from_json(text);
    CHECK(mobile_to_json(m2) == text);
    CHECK(m2.labels == m.labels);
    CHECK(m2.t.tree.parent == m.t.tree.parent);
}

TEST_CASE("path sample metadata") {
    auto m = make_mobile({-1, 0, 1}, {0, 0, 1});
    auto p = make_path_sample(m, 100);
    CHECK(p.height == std::vector<double>{0, 1, 2});
    CHECK(p.label == std::vector<double>{0, 0, 1});
    CHECK(p.n_half == doctest::Approx(10.0));
    CHECK(p.n_quarter == doctest::Approx(std::sqrt(10.0)));
}

TEST_CASE("mobile invariants rejected when violated") {
    CHECK_THROWS(make_mobile({-1, 0, 1}, {0, 1, 1}));   // black must copy parent
    CHECK_THROWS(make_mobile({-1, 0, 1}, {0, 0, -2}));  // increment below -1
    CHECK_THROWS(make_mobile({-1, 0, 1}, {1, 1, 1}));   // root label nonzero
}

TEST_CASE("height bound against the gamma projection") {
    Rng rng(31);
    for (int rep = 0; rep < 200; ++rep) {
        auto t = random_two_type(rng, 400);
        auto g = gamma_project(t);
        auto h = height_process(t.tree);
        auto gh = height_process(g.tree);
        auto tc = type_counting(t, Color::White);
        int64_t whites = g.tree.size();
        auto gH = [&](int64_t i) -> int64_t { return i >= whites ? 0 : gh[i]; };
        for (int64_t k = 0; k < t.size(); ++k) {
            int64_t j = tc.J[k];
            int64_t lhs = std::llabs(h[k] - 2 * gH(j - 1));
            int64_t rhs = 2 * std::llabs(gH(j - 1) - gH(j)) + 1;
            CHECK(lhs <= rhs);
        }
    }
}
