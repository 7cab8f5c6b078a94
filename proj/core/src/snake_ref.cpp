#include "bpmap/snake_ref.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bpmap/parallel.hpp"
#include "bpmap/trees.hpp"

namespace bpmap {

ReferenceSnakeSample sample_reference(int64_t m, const Rng& base, const SnakeRefOptions& opt) {
    if (m < 100) throw std::invalid_argument("reference samples need m >= 100");
    SamplerBudget budget;
    budget.max_attempts = opt.max_attempts;
    budget.max_tree_size = opt.max_tree_size > 0 ? opt.max_tree_size : 64 * m;

    auto geom = OffspringDist::geometric(0.5);
    ConditioningTarget target{ConditioningTarget::Kind::VertexCountWhite, m};
    auto shape = sample_conditioned_shape(geom, geom, target, budget, base);
    if (!shape.tree) throw std::runtime_error("reference sampler exhausted its attempt budget");
    const auto& t = *shape.tree;
    const int64_t n = t.size();

    // Uniform {-1, 0, +1} displacement on every edge.
    Rng rng = base.substream(static_cast<uint64_t>(shape.stats.attempts - 1)).substream(0x5e1f);
    std::vector<double> labels(n, 0.0);
    for (int32_t v = 1; v < n; ++v)
        labels[v] = labels[t.tree.parent[v]] + static_cast<double>(rng.uniform_int(-1, 1));

    auto h = height_process(t.tree);

    ReferenceSnakeSample s;
    s.m = m;
    const double hscale = s.height_divisor * std::sqrt(static_cast<double>(m));
    const double lscale = s.label_divisor * std::pow(static_cast<double>(m), 0.25);

    double mx = 0, mn = 0;
    for (double l : labels) {
        mx = std::max(mx, l);
        mn = std::min(mn, l);
    }
    s.raw_delta_plus = mx / lscale;
    s.raw_delta_minus = mn / lscale;

    // Resample on a uniform grid over [0, n]; both processes close at zero
    // (the contour's final return to the root).
    const int64_t G = opt.grid;
    s.e_path.resize(G);
    s.r_path.resize(G);
    auto at = [&](const auto& seq, double pos) -> double {
        if (pos >= static_cast<double>(n)) return 0.0;
        int64_t k = static_cast<int64_t>(pos);
        double frac = pos - static_cast<double>(k);
        double a = static_cast<double>(seq[k]);
        double b = k + 1 <= n - 1 ? static_cast<double>(seq[k + 1]) : 0.0;
        return a + frac * (b - a);
    };
    for (int64_t g = 0; g < G; ++g) {
        double pos = static_cast<double>(g) / static_cast<double>(G - 1) * static_cast<double>(n);
        s.e_path[g] = at(h, pos) / hscale;
        s.r_path[g] = at(labels, pos) / lscale;
    }
    s.e_path.front() = 0;
    s.e_path.back() = 0;
    s.r_path.front() = 0;
    auto [pmn, pmx] = std::minmax_element(s.r_path.begin(), s.r_path.end());
    s.delta_plus = *pmx;
    s.delta_minus = *pmn;
    return s;
}

ReferenceStats reference_statistics(int64_t n_samples, int64_t m, uint64_t seed, int workers,
                                    const std::function<double(double)>& g, const SnakeRefOptions& opt) {
    if (n_samples < 1) throw std::invalid_argument("need at least one sample");
    ReferenceStats st;
    st.m = m;
    st.samples = n_samples;
    st.seed = seed;
    st.delta.resize(n_samples);
    st.delta_plus.resize(n_samples);
    st.neg_delta_minus.resize(n_samples);
    st.profile_integral.resize(n_samples);
    parallel_for(n_samples, workers, [&](int64_t i) {
        Rng base = Rng::from_stream(seed, static_cast<uint64_t>(i));
        auto s = sample_reference(m, base, opt);
        st.delta[i] = s.delta();
        st.delta_plus[i] = s.delta_plus;
        st.neg_delta_minus[i] = -s.delta_minus;
        double inf = *std::min_element(s.r_path.begin(), s.r_path.end());
        double acc = 0;
        for (double v : s.r_path) acc += g(v - inf);
        st.profile_integral[i] = acc / static_cast<double>(s.r_path.size());
    });
    std::sort(st.delta.begin(), st.delta.end());
    std::sort(st.delta_plus.begin(), st.delta_plus.end());
    std::sort(st.neg_delta_minus.begin(), st.neg_delta_minus.end());
    std::sort(st.profile_integral.begin(), st.profile_integral.end());
    return st;
}

std::string reference_cache_filename(int64_t m, int64_t n_samples, uint64_t seed,
                                     const std::string& g_tag) {
    std::ostringstream os;
    // v2: range statistics taken from the comparison grid paths.
    os << "snake_ref_v2_m" << m << "_N" << n_samples << "_seed" << seed << "_" << g_tag << ".csv";
    return os.str();
}

namespace {

void emit_column(std::ostream& os, const char* name, const std::vector<double>& v) {
    char buf[64];
    for (size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v[i]);
        os << i << "," << name << "," << buf << "\n";
    }
}

}  // namespace

void save_reference_csv(const std::string& path, const ReferenceStats& stats) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "sample_id,statistic,value\n";
    os << "-1,m," << stats.m << "\n";
    os << "-1,samples," << stats.samples << "\n";
    os << "-1,seed," << stats.seed << "\n";
    emit_column(os, "delta", stats.delta);
    emit_column(os, "delta_plus", stats.delta_plus);
    emit_column(os, "neg_delta_minus", stats.neg_delta_minus);
    emit_column(os, "profile_integral", stats.profile_integral);
}

std::optional<ReferenceStats> load_reference_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) return std::nullopt;
    std::string line;
    std::getline(is, line);
    if (line != "sample_id,statistic,value") return std::nullopt;
    ReferenceStats st;
    while (std::getline(is, line)) {
        auto c1 = line.find(',');
        auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) return std::nullopt;
        std::string name = line.substr(c1 + 1, c2 - c1 - 1);
        std::string val = line.substr(c2 + 1);
        if (name == "m")
            st.m = std::stoll(val);
        else if (name == "samples")
            st.samples = std::stoll(val);
        else if (name == "seed")
            st.seed = std::stoull(val);
        else if (name == "delta")
            st.delta.push_back(std::stod(val));
        else if (name == "delta_plus")
            st.delta_plus.push_back(std::stod(val));
        else if (name == "neg_delta_minus")
            st.neg_delta_minus.push_back(std::stod(val));
        else if (name == "profile_integral")
            st.profile_integral.push_back(std::stod(val));
        else
            return std::nullopt;
    }
    if (static_cast<int64_t>(st.delta.size()) != st.samples) return std::nullopt;
    return st;
}

ReferenceStats reference_statistics_cached(const std::string& cache_dir, int64_t n_samples, int64_t m,
                                           uint64_t seed, int workers,
                                           const std::function<double(double)>& g,
                                           const std::string& g_tag) {
    std::filesystem::create_directories(cache_dir);
    std::string path = cache_dir + "/" + reference_cache_filename(m, n_samples, seed, g_tag);
    if (auto cached = load_reference_csv(path)) return *cached;
    auto st = reference_statistics(n_samples, m, seed, workers, g);
    save_reference_csv(path, st);
    return st;
}

}  // namespace bpmap
