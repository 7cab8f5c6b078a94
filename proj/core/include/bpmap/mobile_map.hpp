#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "bpmap/rng.hpp"
#include "bpmap/trees.hpp"

namespace bpmap {

/// Rooted pointed bipartite planar map as a rotation system of darts.
/// Vertex ids: the white mobile vertices in depth-first order, then the
/// pointed vertex last (id = vertex_count - 1).
struct PlanarMap {
    struct Dart {
        int32_t twin = -1;
        int32_t next = -1;  // counterclockwise rotation around origin
        int32_t origin = -1;
    };
    std::vector<Dart> darts;
    int32_t root_dart = -1;
    int32_t pointed_vertex = -1;
    int32_t vertex_count = 0;

    int64_t edge_count() const { return static_cast<int64_t>(darts.size()) / 2; }
};

/// The vertex map: one vertex, no edges, one face of degree 0.
struct VertexMapDagger {};

using BuiltMap = std::variant<VertexMapDagger, PlanarMap>;

/// Inverse mobile bijection: labels are shifted so their minimum is 1, every
/// white corner with label l >= 2 is chained to the first following corner of
/// label l-1 in clockwise contour order, label-1 corners attach to a new
/// pointed vertex, and the root dart is the first map edge at the tree root to
/// the left of its first tree edge, oriented toward the farther endpoint.
BuiltMap build_map(const LabeledMobile& m);

/// Throws when twin/rotation are not a valid connected genus-0 system with all
/// face degrees even.
void validate_map(const PlanarMap& map);

std::vector<int32_t> bfs_distances(const PlanarMap& map, int32_t from);

/// Degrees of the faces (orbits of the face permutation).
std::vector<int64_t> face_degrees(const PlanarMap& map);

int64_t radius(const BuiltMap& map);
int64_t radius_from_labels(const LabeledMobile& m);

/// Distance profile: counts[k] = vertices at distance k from the pointed
/// vertex (the k = 0 entry is the pointed vertex itself). Sums to total.
struct DistanceProfile {
    std::vector<int64_t> counts;
    int64_t total = 0;
};

DistanceProfile profile_from_mobile(const LabeledMobile& m);
DistanceProfile profile_from_map(const PlanarMap& map);

/// Distance from the pointed vertex to a uniformly chosen other vertex,
/// realized as shifted label of a uniform white vertex. Rejects singletons.
int64_t two_point_distance(const LabeledMobile& m, Rng& rng);

/// Canonical dart relabeling reachable from the root dart; equal arrays iff
/// the rooted pointed maps are isomorphic.
std::vector<int64_t> canonical_form(const PlanarMap& map);

std::string map_to_json(const PlanarMap& map);
PlanarMap map_from_json(const std::string& text);

/// Plain-text edge list with per-vertex distances to the pointed vertex.
std::string map_edgelist(const PlanarMap& map);

namespace detail {
/// Fault-injection hook: successor search runs in the wrong rotational
/// direction, which breaks planarity. Only for tests of the validators.
BuiltMap build_map_broken_successor(const LabeledMobile& m);
}  // namespace detail

}  // namespace bpmap
