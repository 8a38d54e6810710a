#include "sse/learners/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "sse/error.hpp"
#include "sse/rng.hpp"

namespace sse::learners {

using nlohmann::json;

double GbdtModel::margin(std::span<const double> x) const {
    double m = base_margin;
    for (const auto& t : trees) m += t.predict(x);
    return m;
}

namespace {

double sigmoid(double m) { return m >= 0 ? 1.0 / (1.0 + std::exp(-m)) : std::exp(m) / (1.0 + std::exp(m)); }

double log1p_exp(double m) { return m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m)); }

/// Non-zero entries of one feature, split by sign and sorted by (value, row).
struct SortedColumn {
    std::vector<std::uint32_t> neg_rows, pos_rows;
    std::vector<double> neg_vals, pos_vals;
};

std::vector<SortedColumn> presort(const Matrix& x) {
    std::vector<SortedColumn> cols(x.cols());
    std::vector<std::pair<double, std::uint32_t>> buf;
    for (std::size_t f = 0; f < x.cols(); ++f) {
        buf.clear();
        for (std::size_t r = 0; r < x.rows(); ++r)
            if (x(r, f) != 0.0) buf.emplace_back(x(r, f), static_cast<std::uint32_t>(r));
        std::sort(buf.begin(), buf.end());
        auto& c = cols[f];
        for (const auto& [v, r] : buf) {
            (v < 0 ? c.neg_rows : c.pos_rows).push_back(r);
            (v < 0 ? c.neg_vals : c.pos_vals).push_back(v);
        }
    }
    return cols;
}

double split_point(double lo, double hi) {
    const double mid = lo + (hi - lo) * 0.5;
    return mid > lo ? mid : hi;
}

struct Booster {
    const Matrix& x;
    const GbdtParams& p;
    const std::vector<SortedColumn>& cols;

    std::vector<double> g, h;
    std::vector<int> node_pos;

    double soft(double G) const {
        if (G > p.l1) return G - p.l1;
        if (G < -p.l1) return G + p.l1;
        return 0.0;
    }
    double score(double G, double H) const {
        const double s = soft(G);
        return s * s / (H + p.l2);
    }
    double leaf(double G, double H) const { return -soft(G) / (H + p.l2) * p.learning_rate; }

    struct LevelNode {
        int tree_index;
        double G, H;
        std::size_t count;
    };
    struct Best {
        double gain = 0.0;
        int feature = -1;
        double threshold = 0.0;
    };

    Tree grow(const std::vector<std::uint32_t>& sampled) {
        Tree tree;
        double G = 0, H = 0;
        for (auto r : sampled) G += g[r], H += h[r];
        tree.nodes.push_back({});
        std::vector<LevelNode> level{{0, G, H, sampled.size()}};
        std::fill(node_pos.begin(), node_pos.end(), -1);
        for (auto r : sampled) node_pos[r] = 0;

        for (int depth = 0; depth < p.max_depth && !level.empty(); ++depth) {
            const std::size_t m = level.size();
            std::vector<Best> best(m);
            std::vector<double> gl(m), hl(m), gp(m), hp(m), last(m);
            std::vector<std::size_t> nl(m), np(m);
            std::vector<char> seen(m);

            auto consider = [&](std::size_t nd, double thr, int f) {
                const auto& n = level[nd];
                const double gr = n.G - gl[nd], hr = n.H - hl[nd];
                if (hl[nd] < p.min_child_weight || hr < p.min_child_weight) return;
                const double gain = 0.5 * (score(gl[nd], hl[nd]) + score(gr, hr) - score(n.G, n.H));
                if (gain > best[nd].gain + 1e-12) best[nd] = {gain, f, thr};
            };
            auto visit = [&](std::uint32_t r, double v, int f) {
                const int nd_i = node_pos[r];
                if (nd_i < 0) return;
                const auto nd = static_cast<std::size_t>(nd_i);
                if (seen[nd] && v > last[nd]) consider(nd, split_point(last[nd], v), f);
                gl[nd] += g[r], hl[nd] += h[r], ++nl[nd];
                last[nd] = v;
                seen[nd] = 1;
            };

            for (std::size_t f = 0; f < cols.size(); ++f) {
                const auto& c = cols[f];
                const int fi = static_cast<int>(f);
                std::fill(gl.begin(), gl.end(), 0.0), std::fill(hl.begin(), hl.end(), 0.0);
                std::fill(gp.begin(), gp.end(), 0.0), std::fill(hp.begin(), hp.end(), 0.0);
                std::fill(nl.begin(), nl.end(), 0), std::fill(np.begin(), np.end(), 0);
                std::fill(seen.begin(), seen.end(), 0);
                for (auto r : c.pos_rows)
                    if (node_pos[r] >= 0) {
                        const auto nd = static_cast<std::size_t>(node_pos[r]);
                        gp[nd] += g[r], hp[nd] += h[r], ++np[nd];
                    }
                for (std::size_t i = 0; i < c.neg_rows.size(); ++i) visit(c.neg_rows[i], c.neg_vals[i], fi);
                for (std::size_t nd = 0; nd < m; ++nd) {
                    const std::size_t zeros = level[nd].count - nl[nd] - np[nd];
                    if (zeros == 0) continue;
                    if (seen[nd]) consider(nd, split_point(last[nd], 0.0), fi);
                    gl[nd] = level[nd].G - gp[nd];
                    hl[nd] = level[nd].H - hp[nd];
                    nl[nd] += zeros;
                    last[nd] = 0.0;
                    seen[nd] = 1;
                }
                for (std::size_t i = 0; i < c.pos_rows.size(); ++i) visit(c.pos_rows[i], c.pos_vals[i], fi);
            }

            std::vector<LevelNode> next;
            std::vector<int> remap(m, -1);
            for (std::size_t nd = 0; nd < m; ++nd) {
                const auto& n = level[nd];
                if (best[nd].feature < 0) {
                    tree.nodes[static_cast<std::size_t>(n.tree_index)].value = leaf(n.G, n.H);
                    continue;
                }
                const int li = static_cast<int>(tree.nodes.size());
                tree.nodes.push_back({});
                tree.nodes.push_back({});
                auto& node = tree.nodes[static_cast<std::size_t>(n.tree_index)];
                node.feature = best[nd].feature;
                node.threshold = best[nd].threshold;
                node.left = li;
                node.right = li + 1;
                remap[nd] = static_cast<int>(next.size());
                next.push_back({li, 0.0, 0.0, 0});
                next.push_back({li + 1, 0.0, 0.0, 0});
            }
            for (auto r : sampled) {
                const int nd = node_pos[r];
                if (nd < 0) continue;
                const int base = remap[static_cast<std::size_t>(nd)];
                if (base < 0) {
                    node_pos[r] = -1;
                    continue;
                }
                const auto& b = best[static_cast<std::size_t>(nd)];
                const int child = base + (x(r, static_cast<std::size_t>(b.feature)) < b.threshold ? 0 : 1);
                node_pos[r] = child;
                auto& c = next[static_cast<std::size_t>(child)];
                c.G += g[r], c.H += h[r], ++c.count;
            }
            level = std::move(next);
        }
        for (const auto& n : level) tree.nodes[static_cast<std::size_t>(n.tree_index)].value = leaf(n.G, n.H);
        return tree;
    }
};

}  // namespace

GbdtModel fit_gbdt(const Matrix& x, const Labels& y, std::span<const double> weights, const GbdtParams& params,
                   std::uint64_t seed) {
    if (x.rows() != y.size() || weights.size() != y.size()) throw ShapeError("gbdt fit: rows, labels and weights differ");
    if (params.n_estimators < 0 || params.max_depth < 0 || !(params.learning_rate > 0.0) ||
        !(params.subsample > 0.0 && params.subsample <= 1.0) || params.l1 < 0.0 || params.l2 < 0.0)
        throw ConfigError("invalid gbdt hyperparameters");

    const std::size_t n = x.rows();
    const auto cols = presort(x);
    Booster b{x, params, cols, std::vector<double>(n), std::vector<double>(n), std::vector<int>(n, -1)};
    Rng rng(seed);

    GbdtModel model;
    std::vector<double> margin(n, model.base_margin);
    double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::uint32_t> sampled;
    sampled.reserve(n);
    for (int round = 0; round < params.n_estimators; ++round) {
        sampled.clear();
        for (std::size_t r = 0; r < n; ++r) {
            const bool take = params.subsample >= 1.0 || rng.uniform() < params.subsample;
            if (take && weights[r] > 0.0) sampled.push_back(static_cast<std::uint32_t>(r));
        }
        if (sampled.empty())
            for (std::size_t r = 0; r < n; ++r)
                if (weights[r] > 0.0) sampled.push_back(static_cast<std::uint32_t>(r));
        for (auto r : sampled) {
            const double pr = sigmoid(margin[r]);
            b.g[r] = (pr - y[r]) * weights[r];
            b.h[r] = std::max(pr * (1.0 - pr), 1e-16) * weights[r];
        }
        auto tree = b.grow(sampled);
        double loss = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            margin[r] += tree.predict(x.row(r));
            loss += weights[r] * (log1p_exp(margin[r]) - y[r] * margin[r]);
        }
        model.train_loss.push_back(wsum > 0 ? loss / wsum : 0.0);
        model.trees.push_back(std::move(tree));
    }
    return model;
}

json gbdt_to_json(const GbdtModel& m) {
    json trees = json::array();
    for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
    return {{"base_margin", m.base_margin}, {"trees", trees}, {"train_loss", m.train_loss}};
}

GbdtModel gbdt_from_json(const json& j) {
    GbdtModel m;
    m.base_margin = j.at("base_margin").get<double>();
    for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
    m.train_loss = j.at("train_loss").get<std::vector<double>>();
    return m;
}

}  // namespace sse::learners
