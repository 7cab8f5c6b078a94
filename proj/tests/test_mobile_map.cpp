#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "bpmap/enumerate.hpp"
#include "bpmap/mobile_map.hpp"
#include "bpmap/sampler.hpp"
#include "bpmap/stats.hpp"

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

std::vector<int32_t> white_vertices(const LabeledMobile& m) {
    auto h = height_process(m.t.tree);
    std::vector<int32_t> w;
    for (int32_t v = 0; v < m.size(); ++v)
        if (!(h[v] & 1)) w.push_back(v);
    return w;
}

// Shifted label of a mobile vertex = its distance to the pointed vertex.
int64_t shifted_label(const LabeledMobile& m, int32_t v) {
    int64_t mn = *std::min_element(m.labels.begin(), m.labels.end());
    return m.labels[v] - mn + 1;
}

void check_map_against_mobile(const LabeledMobile& m, const PlanarMap& map) {
    validate_map(map);
    // Prop.-6-style counts: faces match black vertices, vertices match whites + 1.
    auto whites = white_vertices(m);
    CHECK(map.vertex_count == static_cast<int32_t>(whites.size()) + 1);
    CHECK(map.edge_count() == m.size() - 1);
    auto fd = face_degrees(map);
    CHECK(static_cast<int64_t>(fd.size()) == m.size() - static_cast<int64_t>(whites.size()));

    std::multiset<int64_t> got(fd.begin(), fd.end());
    std::multiset<int64_t> want;
    auto h = height_process(m.t.tree);
    for (int32_t v = 0; v < m.size(); ++v)
        if (h[v] & 1) want.insert(2 * (m.t.tree.child_count[v] + 1));
    CHECK(got == want);

    // Distances from the pointed vertex equal shifted labels on every white vertex.
    auto dist = bfs_distances(map, map.pointed_vertex);
    for (size_t r = 0; r < whites.size(); ++r)
        CHECK(dist[static_cast<int32_t>(r)] == shifted_label(m, whites[r]));

    // Root orientation: the target is farther from the pointed vertex.
    const auto& e = map.darts[map.root_dart];
    int32_t target = map.darts[e.twin].origin;
    CHECK(dist[target] > dist[e.origin]);
}

}  // namespace

TEST_CASE("the singleton mobile maps to the vertex map") {
    auto built = build_map(make_mobile({-1}, {0}));
    CHECK(std::holds_alternative<VertexMapDagger>(built));
    CHECK(radius(built) == 0);
    auto p = profile_from_mobile(make_mobile({-1}, {0}));
    CHECK(p.counts == std::vector<int64_t>{1});
}

TEST_CASE("three-vertex mobiles build the two expected maps") {
    // Labels 0,0,0: both white corners join the pointed vertex: path v - r - u.
    auto m0 = make_mobile({-1, 0, 1}, {0, 0, 0});
    auto b0 = build_map(m0);
    REQUIRE(std::holds_alternative<PlanarMap>(b0));
    const auto& map0 = std::get<PlanarMap>(b0);
    check_map_against_mobile(m0, map0);
    CHECK(map0.vertex_count == 3);
    auto fd0 = face_degrees(map0);
    REQUIRE(fd0.size() == 1);
    CHECK(fd0[0] == 4);
    CHECK(radius(b0) == 1);
    CHECK(radius_from_labels(m0) == 1);
    auto dist0 = bfs_distances(map0, map0.pointed_vertex);
    CHECK(std::count(dist0.begin(), dist0.end(), 1) == 2);
    auto prof = profile_from_mobile(m0);
    CHECK(prof.counts == std::vector<int64_t>{1, 2});
    CHECK(prof.total == 3);

    // Labels 0,0,1: chain pointed - root - leaf.
    auto m1 = make_mobile({-1, 0, 1}, {0, 0, 1});
    auto b1 = build_map(m1);
    const auto& map1 = std::get<PlanarMap>(b1);
    check_map_against_mobile(m1, map1);
    CHECK(radius(b1) == 2);
    CHECK(radius_from_labels(m1) == 2);
    auto dist1 = bfs_distances(map1, map1.pointed_vertex);
    std::multiset<int32_t> ds(dist1.begin(), dist1.end());
    CHECK(ds == std::multiset<int32_t>{0, 1, 2});
}

TEST_CASE("exhaustive bijection at up to three faces") {
    auto q = WeightSequence::dirac(2, Rational(1, 12));
    auto mu0 = ExactOffspring::mu0_of(Rational(2));
    auto mu1 = ExactOffspring::mu1_of(q, Rational(2));
    std::vector<int64_t> expected = {3, 18, 135};
    for (int64_t n = 1; n <= 3; ++n) {
        EnumBounds b;
        b.kind = ConditioningTarget::Kind::FaceCount;
        b.n = n;
        b.white_child_cap = n;
        b.black_child_cap = 2;
        std::set<std::vector<int64_t>> canon;
        int64_t mobiles = 0;
        for (const auto& t : enum_trees(b, mu0, mu1)) {
            for (auto& labels : enum_labelings(t)) {
                LabeledMobile m{t, labels};
                ++mobiles;
                auto built = build_map(m);
                REQUIRE(std::holds_alternative<PlanarMap>(built));
                const auto& map = std::get<PlanarMap>(built);
                check_map_against_mobile(m, map);
                for (int64_t d : face_degrees(map)) CHECK(d == 4);
                canon.insert(canonical_form(map));
            }
        }
        CHECK(mobiles == expected[static_cast<size_t>(n - 1)]);
        // Pairwise non-isomorphic as rooted pointed maps: the count survives.
        CHECK(static_cast<int64_t>(canon.size()) == expected[static_cast<size_t>(n - 1)]);
    }
}

TEST_CASE("bijection properties on sampled quadrangulations") {
    auto q = WeightSequence::dirac(2, Rational(1, 12));
    auto rep = classify(q);
    auto law = derive_branching(q, rep);
    SamplerBudget budget;
    budget.rng_seed = 424242;
    budget.max_tree_size = 100000;
    ConditioningTarget target{ConditioningTarget::Kind::FaceCount, 100};
    auto res = sample_conditioned(law, target, budget);
    REQUIRE(res.mobile.has_value());
    const auto& m = *res.mobile;
    CHECK(m.t.count(Color::Black) == 100);
    auto built = build_map(m);
    const auto& map = std::get<PlanarMap>(built);
    check_map_against_mobile(m, map);
    CHECK(radius(built) == radius_from_labels(m));
    // Profile computed on the map agrees with the label route.
    auto pm = profile_from_map(map);
    auto pl = profile_from_mobile(m);
    CHECK(pm.counts == pl.counts);
    CHECK(pm.total == pl.total);
}

TEST_CASE("bijection properties on a mixed-degree family") {
    // Finite-support weights with faces of degrees 2 and 6.
    WeightSequence base({Rational(1), Rational(0), Rational(1)});
    auto tuned = tune_alpha(base);
    REQUIRE(tuned.has_value());
    auto q = base.scaled(rationalize(tuned->scale));
    auto rep = classify(q);
    REQUIRE(rep.status == Criticality::RegularCritical);
    auto law = derive_branching(q, rep);
    for (uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        SamplerBudget budget;
        budget.rng_seed = seed;
        budget.max_tree_size = 100000;
        auto res = sample_conditioned(law, {ConditioningTarget::Kind::FaceCount, 40}, budget);
        REQUIRE(res.mobile.has_value());
        auto built = build_map(*res.mobile);
        check_map_against_mobile(*res.mobile, std::get<PlanarMap>(built));
    }
}

TEST_CASE("two point distance") {
    auto m0 = make_mobile({-1, 0, 1}, {0, 0, 0});
    Rng rng(5);
    for (int i = 0; i < 20; ++i) CHECK(two_point_distance(m0, rng) == 1);

    auto m1 = make_mobile({-1, 0, 1}, {0, 0, 1});
    std::map<int64_t, int64_t> freq;
    for (int i = 0; i < 40000; ++i) freq[two_point_distance(m1, rng)]++;
    CHECK(freq.size() == 2);
    CHECK(std::abs(freq[1] - 20000) < 600);  // ~4.5 sigma
    CHECK(std::abs(freq[2] - 20000) < 600);

    CHECK_THROWS(two_point_distance(make_mobile({-1}, {0}), rng));
}

TEST_CASE("two point distance matches BFS to a uniform vertex in distribution") {
    auto q = WeightSequence::dirac(2, Rational(1, 12));
    auto law = derive_branching(q, classify(q));
    Rng rng(99);
    for (uint64_t seed = 0; seed < 8; ++seed) {
        SamplerBudget budget;
        budget.rng_seed = 1000 + seed;
        auto res = sample_conditioned(law, {ConditioningTarget::Kind::FaceCount, 12}, budget);
        REQUIRE(res.mobile.has_value());
        const auto& m = *res.mobile;
        auto map = std::get<PlanarMap>(build_map(m));
        auto dist = bfs_distances(map, map.pointed_vertex);
        // Exact law of the BFS distance to a uniform non-pointed vertex.
        std::map<int64_t, int64_t> hist;
        int64_t others = 0;
        for (int32_t v = 0; v < map.vertex_count; ++v)
            if (v != map.pointed_vertex) {
                hist[dist[v]]++;
                ++others;
            }
        std::vector<double> probs;
        std::vector<int64_t> values;
        for (auto& [dval, c] : hist) {
            values.push_back(dval);
            probs.push_back(static_cast<double>(c) / static_cast<double>(others));
        }
        const int64_t N = 20000;
        std::map<int64_t, int64_t> obs;
        for (int64_t i = 0; i < N; ++i) obs[two_point_distance(m, rng)]++;
        std::vector<int64_t> observed;
        for (int64_t v : values) observed.push_back(obs.count(v) ? obs[v] : 0);
        auto chi = chi_square_gof(probs, observed, N);
        CHECK(chi.p_value > 1e-4);
    }
}

TEST_CASE("broken successor orientation is caught by the validators") {
    // A mobile with nested chords; the mirrored successor search must violate
    // planarity or the face-degree correspondence on at least one fixture.
    auto q = WeightSequence::dirac(2, Rational(1, 12));
    auto mu0 = ExactOffspring::mu0_of(Rational(2));
    auto mu1 = ExactOffspring::mu1_of(q, Rational(2));
    EnumBounds b;
    b.kind = ConditioningTarget::Kind::FaceCount;
    b.n = 3;
    b.white_child_cap = 3;
    b.black_child_cap = 2;
    int64_t failures = 0, total = 0;
    for (const auto& t : enum_trees(b, mu0, mu1)) {
        for (auto& labels : enum_labelings(t)) {
            LabeledMobile m{t, labels};
            ++total;
            auto built = detail::build_map_broken_successor(m);
            if (!std::holds_alternative<PlanarMap>(built)) continue;
            const auto& map = std::get<PlanarMap>(built);
            bool ok = true;
            try {
                validate_map(map);
                auto fd = face_degrees(map);
                for (int64_t d : fd)
                    if (d != 4) ok = false;
                if (fd.size() != 3) ok = false;
            } catch (const std::exception&) {
                ok = false;
            }
            if (!ok) ++failures;
        }
    }
    CHECK(total == 135);
    CHECK(failures > 0);
}

TEST_CASE("map json and edge list") {
    auto m = make_mobile({-1, 0, 1}, {0, 0, 1});
    auto map = std::get<PlanarMap>(build_map(m));
    auto text = map_to_json(map);
    auto map2 = map_from_json(text);
    CHECK(map_to_json(map2) == text);
    CHECK(canonical_form(map2) == canonical_form(map));
    auto el = map_edgelist(map);
    CHECK(el.find("# vertices=3 edges=2") != std::string::npos);
}
