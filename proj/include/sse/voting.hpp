#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sse/learners.hpp"

namespace sse::voting {

using learners::ProbabilityRow;

/// Lower clamp for mean entropies before division, and the stand-in value
/// for an empty correct or wrong set.
inline constexpr double kEntropyFloor = 1e-6;

/// Shannon entropy in bits, with 0 log 0 = 0. Throws DomainError unless
/// every p_i is in [0, 1] and the p_i sum to 1 within 1e-9.
double shannon_entropy(std::span<const double> p);
double shannon_entropy(const ProbabilityRow& row);

struct EntropyStats {
    double mec = kEntropyFloor;  ///< mean entropy over correctly classified rows
    double mew = kEntropyFloor;  ///< mean entropy over misclassified rows
    std::size_t n_correct = 0;
    std::size_t n_wrong = 0;

    friend bool operator==(const EntropyStats&, const EntropyStats&) = default;
};

EntropyStats entropy_stats(std::span<const ProbabilityRow> rows, const Labels& y_true, const Labels& y_pred);

/// Hard prediction of one learner: positive iff p_positive > p_negative.
int predicted_label(const ProbabilityRow& row);

struct EnsembleWeights {
    std::vector<double> w;

    static EnsembleWeights uniform(std::size_t learners);
    friend bool operator==(const EnsembleWeights&, const EnsembleWeights&) = default;
};

/// w_i proportional to MEW_i / max(MEC_i, floor).
EnsembleWeights ensemble_weights(std::span<const EntropyStats> stats);

enum class Vote { no_sale = 0, sale = 1 };

struct VoteResult {
    double tpp_sale = 0.0;
    double tpp_no_sale = 0.0;
    Vote pseudo_label = Vote::no_sale;
    /// Unweighted mean over learners of the probability given to pseudo_label.
    double confidence = 0.0;
};

/// Weighted total probability per class; ties resolve to no_sale.
VoteResult weighted_vote(std::span<const ProbabilityRow> rows, const EnsembleWeights& weights);

/// Confidence gate used for pseudo-labelling: confidence >= theta.
inline bool confident(const VoteResult& v, double theta) { return v.confidence >= theta; }

}  // namespace sse::voting
