#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace sse {

enum class Source { deep_web, dark_web, social_media, pastebin };

inline constexpr std::array<Source, 4> kAllSources = {Source::deep_web, Source::dark_web,
                                                     Source::social_media, Source::pastebin};

std::string_view to_string(Source source);
Source source_from_string(std::string_view name);

/// Multi-label annotation. Category flags imply `sale`.
struct LabelSet {
    bool sale = false;
    bool drug = false;
    bool weapon = false;
    bool credential = false;

    bool consistent() const noexcept { return sale || !(drug || weapon || credential); }
    friend bool operator==(const LabelSet&, const LabelSet&) = default;
};

using Timestamp = std::chrono::sys_seconds;

Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

struct Document {
    std::string id;
    Source source = Source::deep_web;
    Timestamp timestamp{};
    std::string raw_text;
    std::optional<LabelSet> labels;

    bool labeled() const noexcept { return labels.has_value(); }
    friend bool operator==(const Document&, const Document&) = default;
};

/// Parses one JSON object. Throws ParseError (with byte offset) or SchemaError.
Document parse_document(std::string_view json_text);
Document document_from_json(const nlohmann::json& j);
nlohmann::json document_to_json(const Document& doc);
/// Single-line JSON; the inverse of parse_document.
std::string serialize_document(const Document& doc);

/// Reads a JSON Lines corpus; blank lines are skipped. Ids must be unique.
std::vector<Document> read_corpus(const std::filesystem::path& path);
std::vector<Document> parse_corpus(std::string_view jsonl);
std::string serialize_corpus(const std::vector<Document>& docs);
void write_corpus(const std::filesystem::path& path, const std::vector<Document>& docs);

struct SplitRatios {
    double train = 0.6;
    double validation = 0.2;
    double test = 0.2;
};

struct DatasetSplit {
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test;
    std::uint64_t seed = 0;

    friend bool operator==(const DatasetSplit&, const DatasetSplit&) = default;
};

/// Part sizes for `n` items: floor of each share, remainder handed out to
/// train first, then validation, then test.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios);

/// Seeded shuffle of the labeled documents followed by contiguous partitioning.
DatasetSplit split_labeled(const std::vector<Document>& corpus, const SplitRatios& ratios, std::uint64_t seed);

nlohmann::json split_to_json(const DatasetSplit& split);
DatasetSplit split_from_json(const nlohmann::json& j);

enum class LabeledSampling { stratified, uniform };

struct SyntheticSpec {
    std::size_t labeled = 300;
    std::size_t unlabeled = 2000;
    double noise = 0.0;            ///< label flip rate on the labeled subset, in [0, 1)
    double sale_rate = 0.5;        ///< fraction of sale documents
    double signal_rate = 0.6;      ///< per-line probability of planting a sale/category keyword
    double pattern_rate = 0.7;     ///< probability of embedding category pattern items in a sale document
    double confuser_rate = 0.25;   ///< probability that a non-sale document discusses a category topic
    LabeledSampling sampling = LabeledSampling::stratified;
};

struct SyntheticCorpus {
    std::vector<Document> labeled;
    std::vector<Document> unlabeled;
    /// Labels before noise, parallel to `labeled`.
    std::vector<LabelSet> clean_labels;
    /// Ground truth for the unlabeled documents (never written to corpus files).
    std::vector<LabelSet> unlabeled_truth;
    std::size_t flipped = 0;
};

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace sse
