#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sse/learners/forest.hpp"
#include "sse/learners/gbdt.hpp"
#include "sse/learners/svm.hpp"
#include "sse/matrix.hpp"

namespace sse::learners {

enum class LearnerKind { gbdt, random_forest, svm };

std::string to_string(LearnerKind kind);

struct LearnerSpec {
    std::variant<GbdtParams, ForestParams, SvmParams> params;
    std::uint64_t seed = 0;
    /// Reweight classes inversely to their frequency. Off by default.
    bool balance_classes = false;

    LearnerKind kind() const { return static_cast<LearnerKind>(params.index()); }
    friend bool operator==(const LearnerSpec&, const LearnerSpec&) = default;
};

/// Tuned configurations used by the pipeline.
namespace presets {
LearnerSpec stage1_gbdt(std::uint64_t seed = 0);
LearnerSpec stage1_forest(std::uint64_t seed = 0);
LearnerSpec stage1_svm(std::uint64_t seed = 0);
LearnerSpec drug_gbdt(std::uint64_t seed = 0);
LearnerSpec weapon_gbdt(std::uint64_t seed = 0);
LearnerSpec credential_gbdt(std::uint64_t seed = 0);
}  // namespace presets

/// Hyperparameters outside the tuning grid, as human-readable notes.
/// An empty result means the spec lies on the grid.
std::vector<std::string> out_of_range(const LearnerSpec& spec);

struct ProbabilityRow {
    double negative = 0.5;
    double positive = 0.5;

    static ProbabilityRow from_positive(double p) { return {1.0 - p, p}; }
    friend bool operator==(const ProbabilityRow&, const ProbabilityRow&) = default;
};

class TrainedLearner {
public:
    using State = std::variant<GbdtModel, ForestModel, SvmModel>;

    TrainedLearner(LearnerSpec spec, std::size_t feature_dim, State state)
        : spec_(std::move(spec)), feature_dim_(feature_dim), state_(std::move(state)) {}

    const LearnerSpec& spec() const noexcept { return spec_; }
    std::size_t feature_dim() const noexcept { return feature_dim_; }
    const State& state() const noexcept { return state_; }

    /// Probability of the positive class for one sample.
    double positive_probability(std::span<const double> x) const;

    friend bool operator==(const TrainedLearner&, const TrainedLearner&) = default;

private:
    LearnerSpec spec_;
    std::size_t feature_dim_;
    State state_;
};

/// Fits one base learner. Throws FitError for a single-class `y` and
/// ShapeError when rows(x) != y.size().
TrainedLearner fit(const LearnerSpec& spec, const Matrix& x, const Labels& y);

std::vector<ProbabilityRow> predict_proba(const TrainedLearner& model, const Matrix& x);
ProbabilityRow predict_proba(const TrainedLearner& model, std::span<const double> x);

nlohmann::json spec_to_json(const LearnerSpec& spec);
LearnerSpec spec_from_json(const nlohmann::json& j);
/// Spec-only overrides: keys absent from `j` keep the values in `base`.
LearnerSpec spec_from_json(const nlohmann::json& j, const LearnerSpec& base);

nlohmann::json learner_to_json(const TrainedLearner& model);
TrainedLearner learner_from_json(const nlohmann::json& j);

}  // namespace sse::learners
