#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sse/corpus.hpp"
#include "sse/embeddings.hpp"
#include "sse/eval.hpp"
#include "sse/selftrain.hpp"

namespace sse::pipeline {

enum class EmbeddingMode { tfidf, table };

struct EmbeddingOptions {
    EmbeddingMode mode = EmbeddingMode::tfidf;
    std::size_t max_features = 5000;
    std::filesystem::path table_path;  // table mode only
};

// How Stage 1 is trained. `sse` is the full method; the other two are baselines.
enum class Stage1Mode { sse, ensemble, gbdt };
std::string to_string(Stage1Mode m);

struct RunConfig {
    std::filesystem::path corpus;
    std::filesystem::path output_dir;
    EmbeddingOptions embedding;
    SplitRatios ratios;
    std::uint64_t split_seed = 0;
    Stage1Mode stage1_mode = Stage1Mode::sse;
    selftrain::SseConfig sse;
    selftrain::Stage2Config stage2;
};

// Relative paths resolve against `base_dir`. Throws ConfigError.
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);
// Model-relevant fields only; paths are left out so bundles do not depend on where they were built.
nlohmann::json config_to_json(const RunConfig& cfg);

class Featurizer {
public:
    static Featurizer fit_tfidf(const std::vector<std::string>& texts, std::size_t max_features);
    static Featurizer from_table(embeddings::EmbeddingTable table);

    EmbeddingMode mode() const noexcept { return mode_; }
    std::size_t embedding_dim() const noexcept;
    std::size_t dim() const noexcept { return embedding_dim() + features::kManualSize; }
    embeddings::FeatureVector features(const Document& doc) const;
    Matrix matrix(const std::vector<const Document*>& docs) const;

    const embeddings::TfidfModel& tfidf() const { return tfidf_; }
    void attach_table(embeddings::EmbeddingTable table);

    nlohmann::json to_json() const;
    static Featurizer from_json(const nlohmann::json& j);

private:
    EmbeddingMode mode_ = EmbeddingMode::tfidf;
    embeddings::TfidfModel tfidf_;
    embeddings::EmbeddingTable table_;
    std::size_t table_dim_ = 0;
};

// One `{id, manual, schema_version}` JSON line per document.
std::string manual_features_jsonl(const std::vector<Document>& docs);

struct PipelineModel {
    RunConfig config;
    DatasetSplit split;
    Featurizer featurizer;
    selftrain::SseModel stage1;
    selftrain::CategoryModels stage2;
};

// Trains on `train_ids` (labeled), weights on `validation_ids`, and self-trains
// over every unlabeled document of the corpus.
PipelineModel train_pipeline(const std::vector<Document>& corpus, const DatasetSplit& split, const RunConfig& cfg);
PipelineModel train_pipeline(const std::vector<Document>& corpus, const RunConfig& cfg);

std::vector<nlohmann::json> training_log(const PipelineModel& model);

void save_bundle(const std::filesystem::path& dir, const PipelineModel& model);
// `table_override` replaces the table path recorded in the bundle (table mode only).
PipelineModel load_bundle(const std::filesystem::path& dir,
                          const std::optional<std::filesystem::path>& table_override = std::nullopt);

std::vector<selftrain::PredictionRecord> predict_documents(const PipelineModel& model,
                                                           const std::vector<Document>& docs);
// Labeled documents only; unlabeled ones are skipped.
eval::EvaluationReport evaluate(const PipelineModel& model, const std::vector<Document>& docs);
eval::EvaluationReport evaluate_records(const std::vector<selftrain::PredictionRecord>& records,
                                        const std::vector<LabelSet>& truth);

// Stratified by primary class (no sale / drug / weapon / credential), at least one per group.
std::vector<std::string> subsample_labeled(const std::vector<Document>& corpus, const std::vector<std::string>& ids,
                                           double fraction, std::uint64_t seed);

struct SweepCell {
    double fraction = 1.0;
    std::uint64_t seed = 0;
    std::optional<eval::MetricSet> macro;
    std::string skip_reason;
};

struct SweepSummary {
    double fraction = 1.0;
    std::size_t completed = 0;
    eval::MetricSet mean, stddev;
};

struct SweepReport {
    std::vector<SweepCell> cells;
    std::vector<SweepSummary> summary;
};

SweepReport labeled_fraction_sweep(const std::vector<Document>& corpus, const std::vector<double>& fractions,
                                   const std::vector<std::uint64_t>& seeds, const RunConfig& cfg);
// `fraction,seed,accuracy,f1,tmcc`; skipped cells leave the metrics empty.
std::string sweep_csv(const SweepReport& report);
nlohmann::json sweep_to_json(const SweepReport& report);

}  // namespace sse::pipeline
