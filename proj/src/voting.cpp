#include "sse/voting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sse/error.hpp"

namespace sse::voting {

double shannon_entropy(std::span<const double> p) {
    if (p.empty()) throw DomainError("entropy of an empty distribution");
    double sum = 0.0, h = 0.0;
    for (double pi : p) {
        if (!(pi >= 0.0 && pi <= 1.0)) throw DomainError("probability outside [0, 1]");
        sum += pi;
        if (pi > 0.0) h -= pi * std::log2(pi);
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DomainError("probabilities do not sum to 1");
    return h;
}

double shannon_entropy(const ProbabilityRow& row) {
    const double p[2] = {row.negative, row.positive};
    return shannon_entropy(p);
}

int predicted_label(const ProbabilityRow& row) { return row.positive > row.negative ? 1 : 0; }

EntropyStats entropy_stats(std::span<const ProbabilityRow> rows, const Labels& y_true, const Labels& y_pred) {
    if (rows.size() != y_true.size() || rows.size() != y_pred.size())
        throw ShapeError("entropy_stats: rows, true labels and predictions differ in length");
    if (rows.empty()) throw ShapeError("entropy_stats: empty validation set");
    EntropyStats s;
    double correct = 0.0, wrong = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double h = shannon_entropy(rows[i]);
        if (y_true[i] == y_pred[i]) {
            correct += h;
            ++s.n_correct;
        } else {
            wrong += h;
            ++s.n_wrong;
        }
    }
    s.mec = s.n_correct > 0 ? correct / static_cast<double>(s.n_correct) : kEntropyFloor;
    s.mew = s.n_wrong > 0 ? wrong / static_cast<double>(s.n_wrong) : kEntropyFloor;
    return s;
}

EnsembleWeights EnsembleWeights::uniform(std::size_t learners) {
    return {std::vector<double>(learners, 1.0 / static_cast<double>(learners))};
}

EnsembleWeights ensemble_weights(std::span<const EntropyStats> stats) {
    if (stats.empty()) throw ShapeError("ensemble_weights: no learners");
    std::vector<double> ratio(stats.size());
    for (std::size_t i = 0; i < stats.size(); ++i)
        ratio[i] = std::max(stats[i].mew, 0.0) / std::max(stats[i].mec, kEntropyFloor);
    const double total = std::accumulate(ratio.begin(), ratio.end(), 0.0);
    // All MEW zero cannot happen with the floor, but guard the division anyway.
    if (!(total > 0.0) || !std::isfinite(total)) return EnsembleWeights::uniform(stats.size());
    for (auto& r : ratio) r /= total;
    return {std::move(ratio)};
}

VoteResult weighted_vote(std::span<const ProbabilityRow> rows, const EnsembleWeights& weights) {
    if (rows.size() != weights.w.size())
        throw ShapeError("weighted_vote: " + std::to_string(rows.size()) + " learner rows but " +
                         std::to_string(weights.w.size()) + " weights");
    if (rows.empty()) throw ShapeError("weighted_vote: no learners");
    VoteResult v;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        v.tpp_sale += weights.w[i] * rows[i].positive;
        v.tpp_no_sale += weights.w[i] * rows[i].negative;
    }
    v.pseudo_label = v.tpp_sale > v.tpp_no_sale ? Vote::sale : Vote::no_sale;
    double sum = 0.0;
    for (const auto& r : rows) sum += v.pseudo_label == Vote::sale ? r.positive : r.negative;
    v.confidence = sum / static_cast<double>(rows.size());
    return v;
}

}  // namespace sse::voting
