#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "sse/matrix.hpp"
#include "sse/rng.hpp"

namespace sse::learners {

/// Binary decision tree stored as a flat node array; node 0 is the root.
/// Rows with x[feature] < threshold go left.
struct Tree {
    struct Node {
        int feature = -1;  ///< -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;  ///< leaf output

        friend bool operator==(const Node&, const Node&) = default;
    };
    std::vector<Node> nodes;

    double predict(std::span<const double> x) const {
        int i = 0;
        while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
            const auto& n = nodes[static_cast<std::size_t>(i)];
            i = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(i)].value;
    }
    std::size_t depth() const;

    friend bool operator==(const Tree&, const Tree&) = default;
};

nlohmann::json tree_to_json(const Tree& tree);
Tree tree_from_json(const nlohmann::json& j);

struct CartParams {
    int max_depth = 5;
    /// Features examined per split; 0 means all of them.
    std::size_t max_features = 0;
    std::size_t min_samples_split = 2;
    std::size_t min_samples_leaf = 1;
};

/// Gini-impurity classification tree. `weights` are per-row multiplicities
/// (bootstrap counts or class weights); rows with zero weight are ignored.
/// Leaves hold the weighted fraction of positive rows.
Tree fit_cart(const Matrix& x, const Labels& y, std::span<const double> weights, const CartParams& params, Rng& rng);

}  // namespace sse::learners
