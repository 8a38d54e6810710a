#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "sse/corpus.hpp"

namespace sse::features {

/// Line width and indentation statistics over non-empty lines.
struct LayoutFeatures {
    double width_min = 0, width_max = 0, width_mean = 0, width_median = 0, width_std = 0, width_var = 0;
    double indent_min = 0, indent_max = 0, indent_mean = 0, indent_median = 0, indent_std = 0, indent_var = 0;
    std::size_t nonempty_lines = 0;
    std::size_t empty_lines = 0;

    friend bool operator==(const LayoutFeatures&, const LayoutFeatures&) = default;
};

enum class ItemKind { image, credit_card, ip_address, email, url, bitcoin_address };

inline constexpr std::size_t kItemKinds = 6;
inline constexpr std::array<ItemKind, kItemKinds> kAllItemKinds = {
    ItemKind::image, ItemKind::credit_card, ItemKind::ip_address,
    ItemKind::email, ItemKind::url,         ItemKind::bitcoin_address};

std::string_view to_string(ItemKind kind);

struct PatternItemFeatures {
    std::array<std::size_t, kItemKinds> counts{};
    std::array<double, kItemKinds> weights{};

    std::size_t count(ItemKind k) const { return counts[static_cast<std::size_t>(k)]; }
    double weight(ItemKind k) const { return weights[static_cast<std::size_t>(k)]; }
    friend bool operator==(const PatternItemFeatures&, const PatternItemFeatures&) = default;
};

struct MetadataFeatures {
    double src_deep = 0, src_dark = 0, src_social = 0, src_pastebin = 0;
    double date_scalar = 0;  ///< whole days since 1970-01-01 UTC, times 1e-4

    friend bool operator==(const MetadataFeatures&, const MetadataFeatures&) = default;
};

inline constexpr std::size_t kLayoutSize = 14;
inline constexpr std::size_t kPatternSize = 2 * kItemKinds;
inline constexpr std::size_t kMetadataSize = 5;
inline constexpr std::size_t kManualSize = kLayoutSize + kPatternSize + kMetadataSize;
inline constexpr int kSchemaVersion = 1;

/// Fixed feature vector of 31 reals, ordered as manual_schema().
using ManualFeatureVector = std::array<double, kManualSize>;

/// Feature names in vector order.
const std::array<std::string, kManualSize>& manual_schema();

LayoutFeatures layout_features(std::string_view raw_text);

/// Non-overlapping matches of one item kind, as [begin, end) byte ranges.
std::vector<std::pair<std::size_t, std::size_t>> find_items(std::string_view raw_text, ItemKind kind);

/// Item counts and count/total weights.
PatternItemFeatures pattern_item_features(std::string_view raw_text);

MetadataFeatures metadata_features(const Document& doc);

ManualFeatureVector assemble_manual_features(const Document& doc);

bool luhn_valid(std::string_view digits);

}  // namespace sse::features
