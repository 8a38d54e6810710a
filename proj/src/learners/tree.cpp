#include "sse/learners/tree.hpp"

#include <algorithm>
#include <numeric>

#include "sse/error.hpp"

namespace sse::learners {

using nlohmann::json;

std::size_t Tree::depth() const {
    if (nodes.empty()) return 0;
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, d[i]);
        if (nodes[i].feature >= 0) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return deepest;
}

json tree_to_json(const Tree& tree) {
    json f = json::array(), t = json::array(), l = json::array(), r = json::array(), v = json::array();
    for (const auto& n : tree.nodes) {
        f.push_back(n.feature);
        t.push_back(n.threshold);
        l.push_back(n.left);
        r.push_back(n.right);
        v.push_back(n.value);
    }
    return {{"feature", f}, {"threshold", t}, {"left", l}, {"right", r}, {"value", v}};
}

Tree tree_from_json(const json& j) {
    const auto f = j.at("feature").get<std::vector<int>>();
    const auto t = j.at("threshold").get<std::vector<double>>();
    const auto l = j.at("left").get<std::vector<int>>();
    const auto r = j.at("right").get<std::vector<int>>();
    const auto v = j.at("value").get<std::vector<double>>();
    if (t.size() != f.size() || l.size() != f.size() || r.size() != f.size() || v.size() != f.size())
        throw FormatError("tree arrays differ in length");
    Tree tree;
    tree.nodes.resize(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        tree.nodes[i] = {f[i], t[i], l[i], r[i], v[i]};
        if (f[i] >= 0 && (l[i] <= static_cast<int>(i) || r[i] <= static_cast<int>(i) ||
                          l[i] >= static_cast<int>(f.size()) || r[i] >= static_cast<int>(f.size())))
            throw FormatError("tree child index out of range");
    }
    return tree;
}

namespace {

double gini(double pos, double total) {
    if (total <= 0.0) return 0.0;
    const double p = pos / total;
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

/// Threshold strictly above `lo` and not above `hi`.
double split_point(double lo, double hi) {
    const double mid = lo + (hi - lo) * 0.5;
    return mid > lo ? mid : hi;
}

struct CartBuilder {
    const Matrix& x;
    const Labels& y;
    std::span<const double> w;
    const CartParams& params;
    Rng& rng;
    Tree tree;
    std::vector<std::size_t> feature_pool;

    struct Entry {
        double value;
        std::size_t row;
    };
    std::vector<Entry> scratch;

    int build(std::vector<std::size_t>& rows, int depth) {
        double total = 0.0, pos = 0.0;
        for (auto r : rows) {
            total += w[r];
            if (y[r]) pos += w[r];
        }
        const int index = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({-1, 0.0, -1, -1, total > 0.0 ? pos / total : 0.0});
        if (depth >= params.max_depth || rows.size() < params.min_samples_split || pos <= 0.0 || pos >= total)
            return index;

        const double parent = total * gini(pos, total);
        const std::size_t dim = x.cols();
        const std::size_t quota = params.max_features == 0 ? dim : std::min(params.max_features, dim);
        std::iota(feature_pool.begin(), feature_pool.end(), std::size_t{0});

        double best_gain = 1e-12;
        int best_feature = -1;
        double best_threshold = 0.0;
        std::size_t visited = 0;
        for (std::size_t k = 0; k < dim && visited < quota; ++k) {
            if (quota < dim) {
                const auto j = k + static_cast<std::size_t>(rng.below(dim - k));
                std::swap(feature_pool[k], feature_pool[j]);
            }
            const auto f = feature_pool[k];
            scratch.clear();
            for (auto r : rows) scratch.push_back({x(r, f), r});
            auto [lo, hi] = std::minmax_element(scratch.begin(), scratch.end(),
                                                [](const Entry& a, const Entry& b) { return a.value < b.value; });
            if (!(lo->value < hi->value)) continue;  // constant here; does not use up the quota
            ++visited;
            std::sort(scratch.begin(), scratch.end(), [](const Entry& a, const Entry& b) {
                return a.value != b.value ? a.value < b.value : a.row < b.row;
            });
            double lw = 0.0, lp = 0.0;
            for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
                const auto r = scratch[i].row;
                lw += w[r];
                if (y[r]) lp += w[r];
                if (!(scratch[i].value < scratch[i + 1].value)) continue;
                if (i + 1 < params.min_samples_leaf || scratch.size() - i - 1 < params.min_samples_leaf) continue;
                const double rw = total - lw, rp = pos - lp;
                const double gain = parent - lw * gini(lp, lw) - rw * gini(rp, rw);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_threshold = split_point(scratch[i].value, scratch[i + 1].value);
                }
            }
        }
        if (best_feature < 0) return index;

        std::vector<std::size_t> left, right;
        for (auto r : rows) (x(r, static_cast<std::size_t>(best_feature)) < best_threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        const int l = build(left, depth + 1);
        const int r = build(right, depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(index)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = r;
        return index;
    }
};

}  // namespace

Tree fit_cart(const Matrix& x, const Labels& y, std::span<const double> weights, const CartParams& params, Rng& rng) {
    if (x.rows() != y.size() || weights.size() != y.size()) throw ShapeError("tree fit: rows, labels and weights differ");
    CartBuilder b{x, y, weights, params, rng, {}, std::vector<std::size_t>(x.cols()), {}};
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < x.rows(); ++i)
        if (weights[i] > 0.0) rows.push_back(i);
    if (rows.empty()) throw FitError("tree fit: no rows with positive weight");
    b.build(rows, 0);
    return std::move(b.tree);
}

}  // namespace sse::learners
