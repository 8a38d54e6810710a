#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "sse/learners/tree.hpp"

namespace sse::learners {

struct GbdtParams {
    double learning_rate = 0.1;
    int n_estimators = 400;
    int max_depth = 5;
    double subsample = 0.7;
    double l1 = 0.01;
    double l2 = 0.01;
    double min_child_weight = 1.0;

    friend bool operator==(const GbdtParams&, const GbdtParams&) = default;
};

/// Additive logistic model: margin = base_margin + sum of tree outputs.
struct GbdtModel {
    double base_margin = 0.0;
    std::vector<Tree> trees;
    /// Mean logistic loss on the full training set after each round.
    std::vector<double> train_loss;

    double margin(std::span<const double> x) const;
    friend bool operator==(const GbdtModel&, const GbdtModel&) = default;
};

/// Second-order boosting with exact greedy splits. Split gain and leaf
/// weights use the L1 soft-threshold and L2 shrinkage of the gradient sums.
GbdtModel fit_gbdt(const Matrix& x, const Labels& y, std::span<const double> weights, const GbdtParams& params,
                   std::uint64_t seed);

nlohmann::json gbdt_to_json(const GbdtModel& m);
GbdtModel gbdt_from_json(const nlohmann::json& j);

}  // namespace sse::learners
