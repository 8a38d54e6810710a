#pragma once

#include <vector>

#include <json.hpp>

#include "sse/learners/tree.hpp"

namespace sse::learners {

enum class MaxFeatures { sqrt, all };

struct ForestParams {
    int n_estimators = 400;
    int max_depth = 5;
    /// `sqrt` is the classifier meaning of "auto".
    MaxFeatures max_features = MaxFeatures::sqrt;
    bool bootstrap = true;

    friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

struct ForestModel {
    std::vector<Tree> trees;

    /// Mean of the per-tree positive fractions.
    double positive_probability(std::span<const double> x) const;
    friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

std::size_t features_per_split(MaxFeatures mode, std::size_t dim);

ForestModel fit_forest(const Matrix& x, const Labels& y, std::span<const double> weights, const ForestParams& params,
                       std::uint64_t seed);

/// Seed handed to the generator of tree `index`; exposed so a single tree can be rebuilt.
std::uint64_t forest_tree_seed(std::uint64_t seed, std::size_t index);

nlohmann::json forest_to_json(const ForestModel& m);
ForestModel forest_from_json(const nlohmann::json& j);

}  // namespace sse::learners
