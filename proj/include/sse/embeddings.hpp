#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "sse/features.hpp"

namespace sse::embeddings {

/// Precomputed document vectors keyed by id; all rows share one dimension.
struct EmbeddingTable {
    std::size_t dim = 0;
    std::unordered_map<std::string, std::vector<double>> entries;
    std::vector<std::string> order;  ///< ids in file order

    bool usable() const noexcept { return dim > 0 && !entries.empty(); }
    const std::vector<double>& at(const std::string& id) const;
};

/// Parses vector-file JSONL rows `{"id": ..., "vector": [...]}`.
EmbeddingTable parse_embedding_table(std::string_view jsonl);
EmbeddingTable load_embedding_table(const std::filesystem::path& path);

/// One JSONL row per entry, in the given order.
std::string serialize_vectors(const std::vector<std::pair<std::string, std::vector<double>>>& rows);

struct TfidfConfig {
    std::size_t max_features = 5000;
    friend bool operator==(const TfidfConfig&, const TfidfConfig&) = default;
};

struct TfidfModel {
    TfidfConfig config;
    std::map<std::string, std::size_t> vocabulary;  ///< term -> column
    std::vector<double> idf;

    std::size_t dim() const noexcept { return idf.size(); }
    friend bool operator==(const TfidfModel&, const TfidfModel&) = default;
};

/// Lowercased ASCII-alphanumeric tokens; every other byte separates.
std::vector<std::string> tokenize(std::string_view text);

TfidfModel tfidf_fit(const std::vector<std::string>& texts, const TfidfConfig& config = {});
std::vector<double> tfidf_embed(const TfidfModel& model, std::string_view text);

nlohmann::json tfidf_to_json(const TfidfModel& model);
TfidfModel tfidf_from_json(const nlohmann::json& j);

/// [embedding || manual] for one document.
struct FeatureVector {
    std::string id;
    std::vector<double> values;
    std::string schema;  ///< embedding source tag, e.g. "tfidf" or "table"
};

FeatureVector concat_features(std::string id, std::span<const double> embedding,
                              const features::ManualFeatureVector& manual, std::string schema);

/// Joins an embedding row and a manual row; ids must match.
FeatureVector concat_features(const std::string& embedding_id, std::span<const double> embedding,
                              const std::string& manual_id, const features::ManualFeatureVector& manual,
                              std::string schema);

}  // namespace sse::embeddings
