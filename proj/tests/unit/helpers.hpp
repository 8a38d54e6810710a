#pragma once

#include <cmath>

#include "sse/learners.hpp"
#include "sse/matrix.hpp"
#include "sse/rng.hpp"

namespace sse::unit {

// A learner that ignores its input and always returns p.
inline learners::TrainedLearner constant_learner(double p, std::size_t dim) {
    learners::GbdtModel m;
    m.base_margin = std::log(p / (1.0 - p));
    return {learners::LearnerSpec{learners::GbdtParams{}}, dim, m};
}

// Two Gaussian blobs centred at -shift and +shift on every axis.
struct Blobs {
    Matrix x;
    Labels y;
};

inline Blobs blobs(std::size_t n, std::size_t dim, double shift, std::uint64_t seed) {
    Rng rng(seed);
    Blobs b;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        std::vector<double> row(dim);
        for (auto& v : row) v = rng.normal() + (label ? shift : -shift);
        b.x.append_row(row);
        b.y.push_back(label);
    }
    return b;
}

inline learners::LearnerSpec small_gbdt(std::uint64_t seed = 1) {
    learners::GbdtParams p;
    p.n_estimators = 30;
    p.max_depth = 3;
    return {p, seed};
}

inline learners::LearnerSpec small_forest(std::uint64_t seed = 1) {
    learners::ForestParams p;
    p.n_estimators = 30;
    p.max_depth = 3;
    return {p, seed};
}

inline learners::LearnerSpec small_svm(std::uint64_t seed = 1) {
    learners::SvmParams p;
    p.c = 1.0;
    p.gamma = 0.5;
    return {p, seed};
}

}  // namespace sse::unit
