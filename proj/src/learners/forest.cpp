#include "sse/learners/forest.hpp"

#include <cmath>

#include "sse/error.hpp"

namespace sse::learners {

using nlohmann::json;

double ForestModel::positive_probability(std::span<const double> x) const {
    if (trees.empty()) return 0.5;
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(x);
    return s / static_cast<double>(trees.size());
}

std::size_t features_per_split(MaxFeatures mode, std::size_t dim) {
    if (mode == MaxFeatures::all) return dim;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(dim))));
}

std::uint64_t forest_tree_seed(std::uint64_t seed, std::size_t index) { return mix_seed(seed, 0x7000 + index); }

ForestModel fit_forest(const Matrix& x, const Labels& y, std::span<const double> weights, const ForestParams& params,
                       std::uint64_t seed) {
    if (x.rows() != y.size() || weights.size() != y.size())
        throw ShapeError("forest fit: rows, labels and weights differ");
    if (params.n_estimators < 1 || params.max_depth < 0) throw ConfigError("invalid random forest hyperparameters");

    CartParams cart;
    cart.max_depth = params.max_depth;
    cart.max_features = features_per_split(params.max_features, x.cols());

    ForestModel model;
    const std::size_t n = x.rows();
    std::vector<double> w(n);
    for (int t = 0; t < params.n_estimators; ++t) {
        const auto tree_seed = forest_tree_seed(seed, static_cast<std::size_t>(t));
        if (params.bootstrap) {
            Rng boot(mix_seed(tree_seed, 1));
            std::fill(w.begin(), w.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) w[boot.below(n)] += 1.0;
            for (std::size_t i = 0; i < n; ++i) w[i] *= weights[i];
        } else {
            std::copy(weights.begin(), weights.end(), w.begin());
        }
        Rng rng(tree_seed);
        model.trees.push_back(fit_cart(x, y, w, cart, rng));
    }
    return model;
}

json forest_to_json(const ForestModel& m) {
    json trees = json::array();
    for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
    return {{"trees", trees}};
}

ForestModel forest_from_json(const json& j) {
    ForestModel m;
    for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
    return m;
}

}  // namespace sse::learners
