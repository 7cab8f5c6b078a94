#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bpmap {

/// Rooted plane tree in depth-first layout: parent[0] == -1, every other
/// vertex's parent precedes it, and sibling order is the depth-first order.
struct PlaneTree {
    std::vector<int32_t> parent;
    std::vector<int32_t> child_count;

    int64_t size() const { return static_cast<int64_t>(parent.size()); }

    static PlaneTree single();
    static PlaneTree from_parents(std::vector<int32_t> parents);
};

/// Throws std::invalid_argument when the arrays are not a valid depth-first tree.
void validate_plane_tree(const PlaneTree& t);

/// First-child / next-sibling navigation, built once in O(n).
struct ChildIndex {
    std::vector<int32_t> first_child;   // -1 when none
    std::vector<int32_t> next_sibling;  // -1 when none

    explicit ChildIndex(const PlaneTree& t);
};

enum class Color : uint8_t { White = 0, Black = 1 };

struct TwoTypeTree {
    PlaneTree tree;
    Color root_color = Color::White;

    int64_t size() const { return tree.size(); }
    /// Color alternates between generations.
    Color color_of(int32_t v, const std::vector<int32_t>& heights) const {
        bool odd = heights[v] & 1;
        return (root_color == Color::White) == !odd ? Color::White : Color::Black;
    }
    int64_t count(Color c) const;
};

/// Two-type tree with white root and integer labels: the root is labeled 0,
/// black vertices copy their parent's label, and around each black vertex the
/// cyclic label increments all lie in {-1, 0, 1, 2, ...}.
struct LabeledMobile {
    TwoTypeTree t;  // root_color must be White
    std::vector<int64_t> labels;

    int64_t size() const { return t.size(); }
};

void validate_mobile(const LabeledMobile& m);

std::vector<int32_t> height_process(const PlaneTree& t);

/// Contour (walk-around) heights, length 2*size - 1.
std::vector<int32_t> contour_process(const PlaneTree& t);

/// Vertices visited by the contour walk, length 2*size - 1.
std::vector<int32_t> contour_vertices(const PlaneTree& t);

PlaneTree tree_from_height(const std::vector<int32_t>& h);
PlaneTree tree_from_contour(const std::vector<int32_t>& c);

/// Labels in depth-first order.
std::vector<int64_t> snake_process(const LabeledMobile& m);

/// Labels of the white vertices in contour order: R(k) = label(F(2k)), length size.
std::vector<int64_t> contour_label_process(const LabeledMobile& m);

/// First contour time visiting a vertex of minimum label (an even time).
int64_t theta_min(const LabeledMobile& m);

struct RerootResult {
    LabeledMobile mobile;
    int64_t x_theta = 0;  // 2*size - theta: recovers the pre-reroot root edge
};

/// Reroots at the contour edge (F(theta), F(theta+1)) and shifts labels so the
/// new root is labeled 0. theta must be even (the new root must be white).
RerootResult reroot(const LabeledMobile& m, int64_t theta);

struct GammaResult {
    PlaneTree tree;                 // induced tree on the white vertices
    std::vector<int32_t> image;     // vertex of t -> vertex of tree (blacks map like their parent)
};

/// Skips odd generations: white vertices connect to their white grandchildren.
GammaResult gamma_project(const TwoTypeTree& t);

struct GammaPrimeResult {
    std::vector<PlaneTree> forest;                      // one component per child of the root
    std::vector<std::pair<int32_t, int32_t>> image;     // black vertex of t -> (component, vertex)
};

/// Skips the first generation, then odd generations of the remaining forest:
/// the result is the forest induced on the black vertices.
GammaPrimeResult gamma_prime_project(const TwoTypeTree& t);

struct TypeCounting {
    std::vector<int64_t> J;  // J(k): vertices of the requested color among u(0..k)
    std::vector<int64_t> G;  // G(n): vertices strictly before the n-th vertex of the color;
                             // G(count) = size - 1 by convention
};

TypeCounting type_counting(const TwoTypeTree& t, Color j);

/// sup over [0,1] of |J((size-1)t)/count - t| for the right-continuous step
/// extension of the counting process.
double sup_identity_deviation(const std::vector<int64_t>& J, int64_t count_of_color);

/// Discretized (height, label) pair plus the rescaling metadata consumed by
/// the statistical harness. Linear interpolation is the reading convention.
struct PathSample {
    std::vector<double> height;
    std::vector<double> label;
    int64_t n = 0;  // conditioning size
    double n_half = 0, n_quarter = 0;
};

PathSample make_path_sample(const LabeledMobile& m, int64_t conditioning_n);

std::string mobile_to_json(const LabeledMobile& m);
LabeledMobile mobile_from_json(const std::string& text);

/// Canonical signature of the underlying unrooted, unordered tree (AHU at the
/// tree center); equal signatures iff isomorphic as unrooted trees.
std::string unrooted_signature(const PlaneTree& t);

}  // namespace bpmap
