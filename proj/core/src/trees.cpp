#include "bpmap/trees.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace bpmap {

using json = nlohmann::json;

PlaneTree PlaneTree::single() { return PlaneTree{{-1}, {0}}; }

PlaneTree PlaneTree::from_parents(std::vector<int32_t> parents) {
    PlaneTree t;
    t.parent = std::move(parents);
    t.child_count.assign(t.parent.size(), 0);
    for (size_t i = 1; i < t.parent.size(); ++i) t.child_count[t.parent[i]]++;
    validate_plane_tree(t);
    return t;
}

void validate_plane_tree(const PlaneTree& t) {
    const int64_t n = t.size();
    if (n == 0 || t.child_count.size() != t.parent.size())
        throw std::invalid_argument("tree arrays empty or inconsistent");
    if (t.parent[0] != -1) throw std::invalid_argument("root must have parent -1");
    std::vector<int32_t> stack = {0};
    std::vector<int32_t> counted(n, 0);
    for (int32_t v = 1; v < n; ++v) {
        int32_t p = t.parent[v];
        if (p < 0 || p >= v) throw std::invalid_argument("parent must precede vertex");
        while (!stack.empty() && stack.back() != p) stack.pop_back();
        if (stack.empty()) throw std::invalid_argument("not a depth-first layout");
        counted[p]++;
        stack.push_back(v);
    }
    for (int64_t v = 0; v < n; ++v)
        if (counted[v] != t.child_count[v]) throw std::invalid_argument("child counts inconsistent");
}

ChildIndex::ChildIndex(const PlaneTree& t) {
    const int64_t n = t.size();
    first_child.assign(n, -1);
    next_sibling.assign(n, -1);
    std::vector<int32_t> last_child(n, -1);
    for (int32_t v = 1; v < n; ++v) {
        int32_t p = t.parent[v];
        if (first_child[p] == -1)
            first_child[p] = v;
        else
            next_sibling[last_child[p]] = v;
        last_child[p] = v;
    }
}

int64_t TwoTypeTree::count(Color c) const {
    auto h = height_process(tree);
    int64_t k = 0;
    for (int64_t v = 0; v < size(); ++v)
        if (color_of(static_cast<int32_t>(v), h) == c) ++k;
    return k;
}

void validate_mobile(const LabeledMobile& m) {
    validate_plane_tree(m.t.tree);
    if (m.t.root_color != Color::White) throw std::invalid_argument("mobile root must be white");
    if (static_cast<int64_t>(m.labels.size()) != m.size())
        throw std::invalid_argument("label array size mismatch");
    if (m.labels[0] != 0) throw std::invalid_argument("root label must be 0");
    auto h = height_process(m.t.tree);
    ChildIndex ci(m.t.tree);
    for (int32_t v = 1; v < m.size(); ++v) {
        if ((h[v] & 1) == 1) {  // black: copies its parent's label
            if (m.labels[v] != m.labels[m.t.tree.parent[v]])
                throw std::invalid_argument("black vertex must copy its parent label");
        }
    }
    // Around each black vertex the cyclic increments must all be >= -1
    // (their total vanishes automatically since the cycle closes on the parent label).
    for (int32_t v = 0; v < m.size(); ++v) {
        if ((h[v] & 1) == 0) continue;
        int64_t prev = m.labels[v];
        for (int32_t c = ci.first_child[v]; c != -1; c = ci.next_sibling[c]) {
            if (m.labels[c] - prev < -1) throw std::invalid_argument("label increment below -1");
            prev = m.labels[c];
        }
        if (m.labels[v] - prev < -1) throw std::invalid_argument("closing label increment below -1");
    }
}

std::vector<int32_t> height_process(const PlaneTree& t) {
    std::vector<int32_t> h(t.size());
    h[0] = 0;
    for (int32_t v = 1; v < t.size(); ++v) h[v] = h[t.parent[v]] + 1;
    return h;
}

std::vector<int32_t> contour_vertices(const PlaneTree& t) {
    const int64_t n = t.size();
    ChildIndex ci(t);
    std::vector<int32_t> walk;
    walk.reserve(2 * n - 1);
    // Explicit walk: descend to first unvisited child, else climb.
    std::vector<int32_t> next_down(ci.first_child);  // next child to explore per vertex
    int32_t v = 0;
    walk.push_back(0);
    while (true) {
        if (next_down[v] != -1) {
            int32_t c = next_down[v];
            next_down[v] = ci.next_sibling[c];
            v = c;
        } else if (v != 0) {
            v = t.parent[v];
        } else {
            break;
        }
        walk.push_back(v);
    }
    return walk;
}

std::vector<int32_t> contour_process(const PlaneTree& t) {
    auto h = height_process(t);
    auto w = contour_vertices(t);
    std::vector<int32_t> c(w.size());
    for (size_t i = 0; i < w.size(); ++i) c[i] = h[w[i]];
    return c;
}

PlaneTree tree_from_height(const std::vector<int32_t>& h) {
    if (h.empty() || h[0] != 0) throw std::invalid_argument("height process must start at 0");
    PlaneTree t;
    t.parent.assign(h.size(), -1);
    t.child_count.assign(h.size(), 0);
    std::vector<int32_t> stack = {0};
    for (int32_t v = 1; v < static_cast<int32_t>(h.size()); ++v) {
        if (h[v] > h[v - 1] + 1 || h[v] < 1) throw std::invalid_argument("invalid height step");
        while (static_cast<int32_t>(stack.size()) > h[v]) stack.pop_back();
        t.parent[v] = stack.back();
        t.child_count[stack.back()]++;
        stack.push_back(v);
    }
    return t;
}

PlaneTree tree_from_contour(const std::vector<int32_t>& c) {
    if (c.empty() || c[0] != 0 || c.back() != 0 || c.size() % 2 != 1)
        throw std::invalid_argument("invalid contour sequence");
    PlaneTree t;
    int64_t n = (static_cast<int64_t>(c.size()) + 1) / 2;
    t.parent.reserve(n);
    t.child_count.reserve(n);
    t.parent.push_back(-1);
    t.child_count.push_back(0);
    std::vector<int32_t> stack = {0};
    for (size_t i = 1; i < c.size(); ++i) {
        if (c[i] == c[i - 1] + 1) {
            int32_t v = static_cast<int32_t>(t.parent.size());
            t.parent.push_back(stack.back());
            t.child_count.push_back(0);
            t.child_count[stack.back()]++;
            stack.push_back(v);
        } else if (c[i] == c[i - 1] - 1) {
            stack.pop_back();
            if (stack.empty()) throw std::invalid_argument("contour drops below the root");
        } else {
            throw std::invalid_argument("contour must step by +-1");
        }
    }
    if (static_cast<int64_t>(t.parent.size()) != n) throw std::invalid_argument("contour length mismatch");
    return t;
}

std::vector<int64_t> snake_process(const LabeledMobile& m) { return m.labels; }

std::vector<int64_t> contour_label_process(const LabeledMobile& m) {
    auto w = contour_vertices(m.t.tree);
    auto h = height_process(m.t.tree);
    std::vector<int64_t> r;
    r.reserve(m.size());
    for (size_t k = 0; 2 * k < w.size(); ++k) {
        int32_t v = w[2 * k];
        if (h[v] & 1) throw std::logic_error("even contour time visited a black vertex");
        r.push_back(m.labels[v]);
    }
    return r;
}

int64_t theta_min(const LabeledMobile& m) {
    auto r = contour_label_process(m);
    int64_t best = 0;
    for (size_t k = 1; k + 1 < r.size(); ++k)
        if (r[k] < r[best]) best = static_cast<int64_t>(k);
    return 2 * best;
}

RerootResult reroot(const LabeledMobile& m, int64_t theta) {
    const int64_t n = m.size();
    if (theta % 2 != 0) throw std::invalid_argument("reroot time must be even");
    if (n == 1) {
        if (theta != 0) throw std::invalid_argument("singleton mobile reroots only at 0");
        return RerootResult{m, 2};
    }
    int64_t period = 2 * (n - 1);
    if (theta < 0 || theta >= period) throw std::invalid_argument("reroot time out of range");

    auto walk = contour_vertices(m.t.tree);  // length period + 1, walk[period] == 0
    // Rebuild the tree by replaying the contour cycle from theta: an edge seen
    // for the first time creates a vertex. Edges are identified by their child
    // endpoint in the original tree.
    std::vector<char> seen(n, 0);
    std::vector<int32_t> old_of_new;
    old_of_new.reserve(n);
    std::vector<int32_t> new_of_old(n, -1);
    PlaneTree nt;
    nt.parent.reserve(n);
    nt.child_count.reserve(n);

    int32_t root_old = walk[theta];
    nt.parent.push_back(-1);
    nt.child_count.push_back(0);
    old_of_new.push_back(root_old);
    new_of_old[root_old] = 0;
    int32_t cur = 0;
    auto h = height_process(m.t.tree);
    for (int64_t i = 0; i < period; ++i) {
        int64_t a = (theta + i) % period;
        int32_t u = walk[a], v = walk[a + 1];  // walk has period+1 entries, walk[period] == walk[0]
        // edge id: the deeper endpoint in the original tree
        int32_t eid = h[u] > h[v] ? u : v;
        if (!seen[eid]) {
            seen[eid] = 1;
            int32_t nv = static_cast<int32_t>(nt.parent.size());
            nt.parent.push_back(cur);
            nt.child_count.push_back(0);
            nt.child_count[cur]++;
            old_of_new.push_back(v);
            if (new_of_old[v] == -1) new_of_old[v] = nv;
            cur = nv;
        } else {
            cur = nt.parent[cur];
        }
    }

    LabeledMobile out;
    out.t.tree = std::move(nt);
    out.t.root_color = Color::White;
    int64_t base = m.labels[root_old];
    out.labels.resize(n);
    // White labels are transported and shifted; black labels are a convention
    // (copy of the father) and follow the new structure.
    auto nh = height_process(out.t.tree);
    for (int32_t v = 0; v < n; ++v) {
        if (nh[v] & 1)
            out.labels[v] = out.labels[out.t.tree.parent[v]];
        else
            out.labels[v] = m.labels[old_of_new[v]] - base;
    }
    return RerootResult{std::move(out), 2 * n - theta};
}

GammaResult gamma_project(const TwoTypeTree& t) {
    if (t.root_color != Color::White) throw std::invalid_argument("gamma needs a white root");
    auto h = height_process(t.tree);
    const int64_t n = t.size();
    GammaResult res;
    res.image.assign(n, -1);
    std::vector<int32_t> white_rank(n, -1);
    int32_t rank = 0;
    for (int32_t v = 0; v < n; ++v)
        if (!(h[v] & 1)) white_rank[v] = rank++;
    res.tree.parent.assign(rank, -1);
    res.tree.child_count.assign(rank, 0);
    for (int32_t v = 0; v < n; ++v) {
        if (h[v] & 1) continue;
        int32_t r = white_rank[v];
        if (h[v] >= 2) {
            int32_t gp = t.tree.parent[t.tree.parent[v]];
            res.tree.parent[r] = white_rank[gp];
            res.tree.child_count[white_rank[gp]]++;
        }
        res.image[v] = r;
    }
    for (int32_t v = 0; v < n; ++v)
        if (h[v] & 1) res.image[v] = res.image[t.tree.parent[v]];
    return res;
}

GammaPrimeResult gamma_prime_project(const TwoTypeTree& t) {
    if (t.root_color != Color::White) throw std::invalid_argument("gamma-prime needs a white root");
    auto h = height_process(t.tree);
    const int64_t n = t.size();
    GammaPrimeResult res;
    res.image.assign(n, {-1, -1});
    // One component per child of the root, in sibling order; each component is
    // the black-vertex set of that subtree under the grandchild relation.
    ChildIndex ci(t.tree);
    int32_t comp = 0;
    for (int32_t c = ci.first_child[0]; c != -1; c = ci.next_sibling[c], ++comp) {
        PlaneTree pt;
        std::vector<int32_t> comp_rank(n, -1);
        // Depth-first over the subtree rooted at c, collecting black vertices.
        int32_t rank = 0;
        // Subtree vertices are contiguous-by-DFS in the original arrays only as a
        // range; walk explicitly instead.
        std::vector<int32_t> stack = {c};
        std::vector<int32_t> order;
        while (!stack.empty()) {
            int32_t v = stack.back();
            stack.pop_back();
            order.push_back(v);
            std::vector<int32_t> kids;
            for (int32_t k = ci.first_child[v]; k != -1; k = ci.next_sibling[k]) kids.push_back(k);
            for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
        }
        for (int32_t v : order) {
            if (!(h[v] & 1)) continue;
            comp_rank[v] = rank++;
        }
        pt.parent.assign(rank, -1);
        pt.child_count.assign(rank, 0);
        for (int32_t v : order) {
            if (!(h[v] & 1)) continue;
            int32_t r = comp_rank[v];
            if (v != c && h[v] >= h[c] + 2) {
                int32_t gp = t.tree.parent[t.tree.parent[v]];
                pt.parent[r] = comp_rank[gp];
                pt.child_count[comp_rank[gp]]++;
            }
            res.image[v] = {comp, r};
        }
        res.forest.push_back(std::move(pt));
    }
    return res;
}

TypeCounting type_counting(const TwoTypeTree& t, Color j) {
    auto h = height_process(t.tree);
    const int64_t n = t.size();
    TypeCounting tc;
    tc.J.resize(n);
    int64_t c = 0;
    for (int64_t k = 0; k < n; ++k) {
        if (t.color_of(static_cast<int32_t>(k), h) == j) {
            tc.G.push_back(k);  // vertices strictly before the c-th one of color j
            ++c;
        }
        tc.J[k] = c;
    }
    tc.G.push_back(n - 1);  // convention G(count) = size - 1
    return tc;
}

double sup_identity_deviation(const std::vector<int64_t>& J, int64_t count_of_color) {
    const int64_t n = static_cast<int64_t>(J.size());
    if (n <= 1 || count_of_color <= 0) return 0;
    double sup = 0;
    for (int64_t k = 0; k < n; ++k) {
        double v = static_cast<double>(J[k]) / static_cast<double>(count_of_color);
        double t_lo = static_cast<double>(k) / static_cast<double>(n - 1);
        double t_hi = static_cast<double>(k + 1) / static_cast<double>(n - 1);
        sup = std::max(sup, std::abs(v - t_lo));
        if (k < n - 1) sup = std::max(sup, std::abs(v - t_hi));
    }
    return sup;
}

PathSample make_path_sample(const LabeledMobile& m, int64_t conditioning_n) {
    PathSample p;
    auto h = height_process(m.t.tree);
    p.height.assign(h.begin(), h.end());
    p.label.assign(m.labels.begin(), m.labels.end());
    p.n = conditioning_n;
    p.n_half = std::sqrt(static_cast<double>(conditioning_n));
    p.n_quarter = std::pow(static_cast<double>(conditioning_n), 0.25);
    return p;
}

std::string mobile_to_json(const LabeledMobile& m) {
    json j;
    j["types_root"] = "white";
    j["parents"] = m.t.tree.parent;
    j["labels"] = m.labels;
    return j.dump();
}

LabeledMobile mobile_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.at("types_root").get<std::string>() != "white")
        throw std::invalid_argument("mobile root must be white");
    LabeledMobile m;
    m.t.tree = PlaneTree::from_parents(j.at("parents").get<std::vector<int32_t>>());
    m.t.root_color = Color::White;
    m.labels = j.at("labels").get<std::vector<int64_t>>();
    validate_mobile(m);
    return m;
}

namespace {

std::string ahu_signature(const PlaneTree& t, const std::vector<std::vector<int32_t>>& adj, int32_t root,
                          int32_t forbid) {
    std::string s = "(";
    std::vector<std::string> subs;
    for (int32_t w : adj[root])
        if (w != forbid) subs.push_back(ahu_signature(t, adj, w, root));
    std::sort(subs.begin(), subs.end());
    for (auto& x : subs) s += x;
    s += ")";
    return s;
}

}  // namespace

std::string unrooted_signature(const PlaneTree& t) {
    const int64_t n = t.size();
    std::vector<std::vector<int32_t>> adj(n);
    for (int32_t v = 1; v < n; ++v) {
        adj[v].push_back(t.parent[v]);
        adj[t.parent[v]].push_back(v);
    }
    if (n == 1) return "()";
    // Peel leaves to find the 1- or 2-vertex center.
    std::vector<int32_t> deg(n);
    std::vector<int32_t> layer;
    for (int32_t v = 0; v < n; ++v) {
        deg[v] = static_cast<int32_t>(adj[v].size());
        if (deg[v] <= 1) layer.push_back(v);
    }
    int64_t remaining = n;
    std::vector<int32_t> cur = layer;
    std::vector<char> removed(n, 0);
    while (remaining > 2) {
        std::vector<int32_t> next;
        for (int32_t v : cur) {
            removed[v] = 1;
            --remaining;
            for (int32_t w : adj[v])
                if (!removed[w] && --deg[w] == 1) next.push_back(w);
        }
        cur = std::move(next);
    }
    // With a two-vertex center both rootings are tried; take the lexicographic min.
    std::string best;
    for (int32_t v = 0; v < n; ++v) {
        if (removed[v]) continue;
        std::string s = ahu_signature(t, adj, v, -1);
        if (best.empty() || s < best) best = s;
    }
    return best;
}

}  // namespace bpmap
