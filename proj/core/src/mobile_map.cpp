#include "bpmap/mobile_map.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace bpmap {

using json = nlohmann::json;

namespace {

struct CornerData {
    std::vector<int32_t> vertex;   // white vertex at each even contour time
    std::vector<int64_t> label;    // shifted so the minimum is 1
    std::vector<int32_t> corners_of_white_begin;  // corners grouped by vertex, contour order
    std::vector<int32_t> corners_by_vertex;
};

CornerData corner_sequence(const LabeledMobile& m) {
    CornerData cd;
    auto walk = contour_vertices(m.t.tree);
    int64_t min_label = *std::min_element(m.labels.begin(), m.labels.end());
    int64_t corners = (static_cast<int64_t>(walk.size()) - 1) / 2;  // = size - 1
    cd.vertex.reserve(corners);
    cd.label.reserve(corners);
    for (int64_t k = 0; k < corners; ++k) {
        int32_t v = walk[2 * k];
        cd.vertex.push_back(v);
        cd.label.push_back(m.labels[v] - min_label + 1);
    }
    // Group corner indices by white vertex, preserving contour order.
    int64_t n = m.size();
    std::vector<int32_t> cnt(n, 0);
    for (int32_t v : cd.vertex) cnt[v]++;
    cd.corners_of_white_begin.assign(n + 1, 0);
    for (int64_t v = 0; v < n; ++v) cd.corners_of_white_begin[v + 1] = cd.corners_of_white_begin[v] + cnt[v];
    cd.corners_by_vertex.resize(corners);
    std::vector<int32_t> fill(cd.corners_of_white_begin.begin(), cd.corners_of_white_begin.end() - 1);
    for (int64_t i = 0; i < corners; ++i) cd.corners_by_vertex[fill[cd.vertex[i]]++] = static_cast<int32_t>(i);
    return cd;
}

// succ[i] = first corner after i (cyclically, in contour direction) whose
// label is label[i] - 1; -1 marks an edge to the pointed vertex (label 1).
std::vector<int32_t> successors(const CornerData& cd, bool reversed_direction) {
    const int64_t M = static_cast<int64_t>(cd.vertex.size());
    int64_t max_label = *std::max_element(cd.label.begin(), cd.label.end());
    std::vector<int32_t> next_pos(max_label + 1, -1);
    std::vector<int32_t> succ(M, -2);
    auto scan = [&](int64_t i) {
        int64_t p = reversed_direction ? (M - 1 - (i % M)) : (i % M);
        if (i < M) {
            int64_t target = cd.label[p] - 1;
            succ[p] = target == 0 ? -1 : next_pos[target];
        }
        next_pos[cd.label[p]] = static_cast<int32_t>(p);
    };
    for (int64_t i = 2 * M - 1; i >= 0; --i) scan(i);
    for (int64_t p = 0; p < M; ++p)
        if (succ[p] == -2 || (cd.label[p] >= 2 && succ[p] < 0))
            throw std::logic_error("corner with label >= 2 lacks a successor");
    return succ;
}

BuiltMap build_from(const LabeledMobile& m, bool broken_successor) {
    validate_mobile(m);
    if (m.size() == 1) return VertexMapDagger{};

    CornerData cd = corner_sequence(m);
    const int64_t M = static_cast<int64_t>(cd.vertex.size());
    std::vector<int32_t> succ = successors(cd, broken_successor);

    // White vertices keep their rank among whites; the pointed vertex is last.
    const int64_t n = m.size();
    auto h = height_process(m.t.tree);
    std::vector<int32_t> white_rank(n, -1);
    int32_t whites = 0;
    for (int32_t v = 0; v < n; ++v)
        if (!(h[v] & 1)) white_rank[v] = whites++;
    const int32_t r_vertex = whites;

    PlanarMap map;
    map.vertex_count = whites + 1;
    map.pointed_vertex = r_vertex;
    map.darts.resize(2 * M);

    // Dart 2i sits in corner i (outgoing); dart 2i+1 sits in corner succ[i],
    // or at the pointed vertex when succ[i] < 0.
    std::vector<std::vector<std::pair<int64_t, int32_t>>> ends(M);  // corner -> (sort key, dart)
    std::vector<int32_t> star;                                      // corners chained to r, by position
    for (int64_t i = 0; i < M; ++i) {
        int32_t d_out = static_cast<int32_t>(2 * i);
        int32_t d_in = d_out + 1;
        map.darts[d_out].twin = d_in;
        map.darts[d_in].twin = d_out;
        map.darts[d_out].origin = white_rank[cd.vertex[i]];
        if (succ[i] < 0) {
            map.darts[d_in].origin = r_vertex;
            star.push_back(static_cast<int32_t>(i));
            ends[i].push_back({2 * M - 1, d_out});  // the pointed-vertex edge hugs the departure side
        } else {
            map.darts[d_in].origin = white_rank[cd.vertex[succ[i]]];
            // Within a corner, ends sort by how far behind (against contour
            // direction) their far endpoint lies.
            ends[i].push_back({(2 * i - 2 * succ[i] + 2 * M) % (2 * M), d_out});
            ends[succ[i]].push_back({(2 * succ[i] - 2 * i + 2 * M) % (2 * M), d_in});
        }
    }
    for (auto& e : ends) std::sort(e.begin(), e.end());

    // Clockwise circulation around a white vertex: its corners in contour
    // order, ends within a corner in key order. Stored rotation is ccw.
    auto close_cycle = [&](const std::vector<int32_t>& cw) {
        const size_t k = cw.size();
        for (size_t t = 0; t < k; ++t) map.darts[cw[t]].next = cw[(t + k - 1) % k];
    };
    std::vector<int32_t> cw;
    for (int32_t v = 0; v < n; ++v) {
        if (h[v] & 1) continue;
        cw.clear();
        for (int32_t c = cd.corners_of_white_begin[v]; c < cd.corners_of_white_begin[v + 1]; ++c)
            for (auto& [key, d] : ends[cd.corners_by_vertex[c]]) cw.push_back(d);
        close_cycle(cw);
    }
    // Around the pointed vertex, clockwise = decreasing contour position.
    cw.clear();
    for (auto it = star.rbegin(); it != star.rend(); ++it) cw.push_back(2 * (*it) + 1);
    close_cycle(cw);

    // Root dart: last end of the root's first corner in clockwise order is the
    // first map edge to the left of the root's first tree edge.
    const auto& root_corner_ends = ends[0];
    int32_t end_dart = root_corner_ends.back().second;
    int32_t other = map.darts[end_dart].twin;
    int64_t root_label = cd.label[0];
    int64_t other_label;
    if (map.darts[other].origin == r_vertex) {
        other_label = 0;
    } else {
        // The twin sits in some corner; its label is the vertex label there.
        int64_t edge_id = other / 2;
        int64_t far_corner = (other % 2 == 0) ? edge_id : succ[edge_id];
        other_label = cd.label[far_corner];
    }
    map.root_dart = root_label < other_label ? end_dart : other;
    return map;
}

std::vector<std::vector<int32_t>> adjacency(const PlanarMap& map) {
    std::vector<std::vector<int32_t>> adj(map.vertex_count);
    for (size_t d = 0; d < map.darts.size(); ++d)
        adj[map.darts[d].origin].push_back(map.darts[map.darts[d].twin].origin);
    return adj;
}

}  // namespace

BuiltMap build_map(const LabeledMobile& m) { return build_from(m, false); }

BuiltMap detail::build_map_broken_successor(const LabeledMobile& m) { return build_from(m, true); }

void validate_map(const PlanarMap& map) {
    const int64_t D = static_cast<int64_t>(map.darts.size());
    if (D == 0 || D % 2 != 0) throw std::invalid_argument("dart count must be positive and even");
    std::vector<char> seen(D, 0);
    for (int64_t d = 0; d < D; ++d) {
        const auto& dt = map.darts[d];
        if (dt.twin < 0 || dt.twin >= D || dt.twin == d || map.darts[dt.twin].twin != d)
            throw std::invalid_argument("twin is not a fixed-point-free involution");
        if (dt.next < 0 || dt.next >= D) throw std::invalid_argument("rotation out of range");
        if (dt.origin < 0 || dt.origin >= map.vertex_count) throw std::invalid_argument("origin out of range");
        if (map.darts[dt.next].origin != dt.origin)
            throw std::invalid_argument("rotation must stay at its vertex");
        seen[dt.next]++;
    }
    for (int64_t d = 0; d < D; ++d)
        if (seen[d] != 1) throw std::invalid_argument("rotation is not a permutation");
    // Connectivity over darts via twin and next.
    std::vector<char> vis(D, 0);
    std::vector<int32_t> stack = {0};
    vis[0] = 1;
    int64_t cnt = 0;
    while (!stack.empty()) {
        int32_t d = stack.back();
        stack.pop_back();
        ++cnt;
        for (int32_t e : {map.darts[d].twin, map.darts[d].next})
            if (!vis[e]) {
                vis[e] = 1;
                stack.push_back(e);
            }
    }
    if (cnt != D) throw std::invalid_argument("map is not connected");
    auto fd = face_degrees(map);
    int64_t F = static_cast<int64_t>(fd.size());
    int64_t V = map.vertex_count, E = D / 2;
    if (F - E + V != 2) throw std::invalid_argument("Euler's formula fails (nonzero genus)");
    for (int64_t deg : fd)
        if (deg % 2 != 0) throw std::invalid_argument("odd face degree (map not bipartite)");
    if (map.root_dart < 0 || map.root_dart >= D) throw std::invalid_argument("root dart out of range");
    if (map.pointed_vertex < 0 || map.pointed_vertex >= map.vertex_count)
        throw std::invalid_argument("pointed vertex out of range");
}

std::vector<int32_t> bfs_distances(const PlanarMap& map, int32_t from) {
    auto adj = adjacency(map);
    std::vector<int32_t> dist(map.vertex_count, -1);
    std::queue<int32_t> q;
    dist[from] = 0;
    q.push(from);
    while (!q.empty()) {
        int32_t v = q.front();
        q.pop();
        for (int32_t w : adj[v])
            if (dist[w] == -1) {
                dist[w] = dist[v] + 1;
                q.push(w);
            }
    }
    return dist;
}

std::vector<int64_t> face_degrees(const PlanarMap& map) {
    const int64_t D = static_cast<int64_t>(map.darts.size());
    std::vector<char> vis(D, 0);
    std::vector<int64_t> deg;
    for (int64_t d = 0; d < D; ++d) {
        if (vis[d]) continue;
        int64_t len = 0;
        int64_t e = d;
        while (!vis[e]) {
            vis[e] = 1;
            ++len;
            e = map.darts[map.darts[e].twin].next;
        }
        deg.push_back(len);
    }
    return deg;
}

int64_t radius(const BuiltMap& map) {
    if (std::holds_alternative<VertexMapDagger>(map)) return 0;
    const auto& pm = std::get<PlanarMap>(map);
    auto d = bfs_distances(pm, pm.pointed_vertex);
    return *std::max_element(d.begin(), d.end());
}

int64_t radius_from_labels(const LabeledMobile& m) {
    if (m.size() == 1) return 0;
    auto [mn, mx] = std::minmax_element(m.labels.begin(), m.labels.end());
    return *mx - *mn + 1;
}

DistanceProfile profile_from_mobile(const LabeledMobile& m) {
    DistanceProfile p;
    if (m.size() == 1) {
        p.counts = {1};
        p.total = 1;
        return p;
    }
    int64_t mn = *std::min_element(m.labels.begin(), m.labels.end());
    auto h = height_process(m.t.tree);
    int64_t rad = radius_from_labels(m);
    p.counts.assign(rad + 1, 0);
    p.counts[0] = 1;  // the pointed vertex
    for (int32_t v = 0; v < m.size(); ++v)
        if (!(h[v] & 1)) p.counts[m.labels[v] - mn + 1]++;
    for (int64_t c : p.counts) p.total += c;
    return p;
}

DistanceProfile profile_from_map(const PlanarMap& map) {
    auto d = bfs_distances(map, map.pointed_vertex);
    DistanceProfile p;
    int32_t rad = *std::max_element(d.begin(), d.end());
    p.counts.assign(rad + 1, 0);
    for (int32_t x : d) p.counts[x]++;
    p.total = map.vertex_count;
    return p;
}

int64_t two_point_distance(const LabeledMobile& m, Rng& rng) {
    if (m.size() == 1) throw std::invalid_argument("two-point distance needs at least two vertices");
    auto h = height_process(m.t.tree);
    std::vector<int32_t> whites;
    for (int32_t v = 0; v < m.size(); ++v)
        if (!(h[v] & 1)) whites.push_back(v);
    int32_t u = whites[rng.uniform_below(whites.size())];
    int64_t mn = *std::min_element(m.labels.begin(), m.labels.end());
    return m.labels[u] - mn + 1;
}

std::vector<int64_t> canonical_form(const PlanarMap& map) {
    const int64_t D = static_cast<int64_t>(map.darts.size());
    std::vector<int32_t> id(D, -1), vid(map.vertex_count, -1);
    std::vector<int32_t> order;
    order.reserve(D);
    std::queue<int32_t> q;
    id[map.root_dart] = 0;
    order.push_back(map.root_dart);
    q.push(map.root_dart);
    int32_t next_id = 1, next_vid = 0;
    while (!q.empty()) {
        int32_t d = q.front();
        q.pop();
        if (vid[map.darts[d].origin] == -1) vid[map.darts[d].origin] = next_vid++;
        for (int32_t e : {map.darts[d].twin, map.darts[d].next}) {
            if (id[e] == -1) {
                id[e] = next_id++;
                order.push_back(e);
                q.push(e);
            }
        }
    }
    std::vector<int64_t> sig;
    sig.reserve(3 * D + 2);
    for (int32_t d : order) {
        sig.push_back(id[map.darts[d].twin]);
        sig.push_back(id[map.darts[d].next]);
        sig.push_back(vid[map.darts[d].origin]);
    }
    sig.push_back(vid[map.pointed_vertex]);
    sig.push_back(map.vertex_count);
    return sig;
}

std::string map_to_json(const PlanarMap& map) {
    json j;
    j["darts"] = json::array();
    for (const auto& d : map.darts)
        j["darts"].push_back({{"twin", d.twin}, {"next", d.next}, {"origin", d.origin}});
    j["root_dart"] = map.root_dart;
    j["pointed_vertex"] = map.pointed_vertex;
    j["vertex_count"] = map.vertex_count;
    return j.dump();
}

PlanarMap map_from_json(const std::string& text) {
    json j = json::parse(text);
    PlanarMap map;
    for (const auto& d : j.at("darts"))
        map.darts.push_back({d.at("twin").get<int32_t>(), d.at("next").get<int32_t>(),
                             d.at("origin").get<int32_t>()});
    map.root_dart = j.at("root_dart").get<int32_t>();
    map.pointed_vertex = j.at("pointed_vertex").get<int32_t>();
    map.vertex_count = j.at("vertex_count").get<int32_t>();
    validate_map(map);
    return map;
}

std::string map_edgelist(const PlanarMap& map) {
    auto dist = bfs_distances(map, map.pointed_vertex);
    std::ostringstream os;
    os << "# vertices=" << map.vertex_count << " edges=" << map.edge_count()
       << " pointed=" << map.pointed_vertex << "\n";
    os << "# u v dist_u dist_v\n";
    for (size_t d = 0; d < map.darts.size(); d += 2) {
        int32_t u = map.darts[d].origin;
        int32_t v = map.darts[map.darts[d].twin].origin;
        os << u << " " << v << " " << dist[u] << " " << dist[v] << "\n";
    }
    return os.str();
}

}  // namespace bpmap
