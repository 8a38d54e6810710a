#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sse/corpus.hpp"
#include "sse/learners.hpp"
#include "sse/voting.hpp"

namespace sse::selftrain {

using learners::LearnerSpec;
using learners::TrainedLearner;

/// Feature rows with binary targets.
struct LabeledSet {
    Matrix x;
    Labels y;
    std::vector<std::string> ids;
};

/// Feature rows with full multi-label annotations (Stage 2 input).
struct AnnotatedSet {
    Matrix x;
    std::vector<LabelSet> labels;
    std::vector<std::string> ids;
};

struct UnlabeledSet {
    Matrix x;
    std::vector<std::string> ids;
};

struct SseConfig {
    double theta = 0.9;
    int max_iterations = 75;
    std::array<LearnerSpec, 3> learner_specs = {learners::presets::stage1_gbdt(), learners::presets::stage1_forest(),
                                                learners::presets::stage1_svm()};
    std::uint64_t seed = 0;
};

enum class Termination { max_iterations, pool_exhausted, no_confident };
std::string to_string(Termination t);

struct Addition {
    std::string id;
    int label = 0;
    double confidence = 0.0;
};

struct IterationLog {
    std::string stage;
    int iteration = 0;
    std::vector<double> weights;  ///< voting weights in this iteration; empty for single-learner stages
    std::vector<voting::EntropyStats> stats;  ///< per learner, on the validation rows
    std::size_t train_size = 0;               ///< pool rows the learners were fitted on
    std::vector<Addition> additions;
    std::size_t pool_remaining = 0;           ///< unlabeled rows left after this iteration
};

nlohmann::json iteration_to_json(const IterationLog& log);

struct SseModel {
    std::vector<TrainedLearner> learners;
    voting::EnsembleWeights weights;
    std::vector<IterationLog> history;
    Termination termination = Termination::max_iterations;
    std::size_t final_train_size = 0;

    voting::VoteResult vote(std::span<const double> x) const;
};

/// Effective seed of learner `index` in an ensemble seeded with `seed`.
LearnerSpec seeded(const LearnerSpec& spec, std::uint64_t seed, std::size_t index);

/// Fits the three learners on `train` and weights them on `validation`; no self-training.
SseModel train_supervised_ensemble(const LabeledSet& train, const LabeledSet& validation, const SseConfig& cfg);

/// Entropy-weighted ensemble self-training. Each iteration fits the learners
/// on the current pool, reweights them on `validation`, votes on every
/// remaining unlabeled row and moves rows with confidence >= theta into the
/// pool. Stops at max_iterations, an empty unlabeled pool, or an iteration
/// without confident rows, then refits on the final pool.
SseModel train_sse(const LabeledSet& train, const LabeledSet& validation, const UnlabeledSet& unlabeled,
                   const SseConfig& cfg);

enum class Category { drug = 0, weapon = 1, credential = 2 };
inline constexpr std::array<Category, 3> kCategories = {Category::drug, Category::weapon, Category::credential};
std::string to_string(Category c);
bool category_flag(const LabelSet& l, Category c);

struct CategoryConfig {
    double theta = 0.9;
    int max_iterations = 25;
    LearnerSpec learner = learners::presets::drug_gbdt();
};

struct Stage2Config {
    std::array<CategoryConfig, 3> categories = {
        CategoryConfig{0.9, 25, learners::presets::drug_gbdt()},
        CategoryConfig{0.85, 25, learners::presets::weapon_gbdt()},
        CategoryConfig{0.9, 50, learners::presets::credential_gbdt()}};
    double validation_fraction = 0.2;
    std::uint64_t seed = 0;
};

struct CategoryModel {
    Category category = Category::drug;
    TrainedLearner learner;
    double theta = 0.9;
    int max_iterations = 25;
    std::vector<IterationLog> history;
    Termination termination = Termination::max_iterations;
};

struct CategoryModels {
    std::vector<CategoryModel> models;  ///< indexed by Category

    const CategoryModel& at(Category c) const { return models.at(static_cast<std::size_t>(c)); }
};

/// Stratified 80/20 split of one category's labels, seeded with seed + category index.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stage2_split(const Labels& y, double validation_fraction,
                                                                         std::uint64_t seed);

/// Per-category rows of `pool` that qualify for pseudo-labelling: p_c >= theta_c.
std::array<bool, 3> stage2_admission(const std::array<double, 3>& probabilities, const Stage2Config& cfg);

/// Independent single-learner self-training per category over the
/// Stage-1 sale pool. Only confident positives are admitted; each category
/// scores the pool rows it has not yet admitted.
CategoryModels train_stage2(const AnnotatedSet& labeled, const UnlabeledSet& sale_pool, const Stage2Config& cfg);

struct PredictionRecord {
    std::string id;
    bool sale = false;
    double sale_confidence = 0.0;  ///< vote confidence of the Stage-1 label
    double tpp_sale = 0.0;
    bool drug = false, weapon = false, credential = false;
    double p_drug = 0.0, p_weapon = 0.0, p_credential = 0.0;
    bool stage2_evaluated = false;

    LabelSet labels() const { return {sale, drug, weapon, credential}; }
};

nlohmann::json prediction_to_json(const PredictionRecord& r);

/// Stage-2 decision threshold at inference time.
inline constexpr double kCategoryThreshold = 0.5;

/// Sequential prediction: Stage 2 runs only on rows voted sale.
PredictionRecord predict(const SseModel& stage1, const CategoryModels& stage2, const std::string& id,
                         std::span<const double> x);

}  // namespace sse::selftrain
