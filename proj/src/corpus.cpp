#include "sse/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "sse/error.hpp"
#include "sse/io.hpp"
#include "sse/rng.hpp"

namespace sse {

using nlohmann::json;

std::string_view to_string(Source source) {
    switch (source) {
        case Source::deep_web: return "deep_web";
        case Source::dark_web: return "dark_web";
        case Source::social_media: return "social_media";
        case Source::pastebin: return "pastebin";
    }
    return "deep_web";
}

Source source_from_string(std::string_view name) {
    for (auto s : kAllSources)
        if (to_string(s) == name) return s;
    throw SchemaError("unknown source '" + std::string(name) + "'");
}

namespace {

int parse_digits(std::string_view text, std::size_t pos, std::size_t count) {
    if (pos + count > text.size()) throw SchemaError("timestamp too short: '" + std::string(text) + "'");
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + count, value);
    if (ec != std::errc() || ptr != text.data() + pos + count)
        throw SchemaError("invalid digits in timestamp '" + std::string(text) + "'");
    return value;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
    if (pos >= text.size() || text[pos] != c)
        throw SchemaError("malformed timestamp '" + std::string(text) + "'");
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    const int y = parse_digits(text, 0, 4);
    expect_char(text, 4, '-');
    const int mo = parse_digits(text, 5, 2);
    expect_char(text, 7, '-');
    const int d = parse_digits(text, 8, 2);
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw SchemaError("invalid calendar date in timestamp '" + std::string(text) + "'");
    Timestamp ts = sys_days{ymd};
    if (text.size() == 10) return ts;

    if (text[10] != 'T' && text[10] != 't' && text[10] != ' ')
        throw SchemaError("malformed timestamp '" + std::string(text) + "'");
    const int hh = parse_digits(text, 11, 2);
    expect_char(text, 13, ':');
    const int mm = parse_digits(text, 14, 2);
    int ss = 0;
    std::size_t pos = 16;
    if (pos < text.size() && text[pos] == ':') {
        ss = parse_digits(text, 17, 2);
        pos = 19;
        if (pos < text.size() && (text[pos] == '.' || text[pos] == ',')) {
            ++pos;
            const auto start = pos;
            while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
            if (pos == start) throw SchemaError("malformed fractional seconds in '" + std::string(text) + "'");
        }
    }
    if (hh > 23 || mm > 59 || ss > 60) throw SchemaError("time out of range in '" + std::string(text) + "'");
    ts += hours{hh} + minutes{mm} + seconds{ss};

    if (pos == text.size()) return ts;  // no designator: treated as UTC
    if ((text[pos] == 'Z' || text[pos] == 'z') && pos + 1 == text.size()) return ts;
    if (text[pos] == '+' || text[pos] == '-') {
        const int sign = text[pos] == '+' ? 1 : -1;
        const int oh = parse_digits(text, pos + 1, 2);
        std::size_t p = pos + 3;
        if (p < text.size() && text[p] == ':') ++p;
        const int om = parse_digits(text, p, 2);
        if (p + 2 != text.size()) throw SchemaError("malformed offset in '" + std::string(text) + "'");
        return ts - sign * (hours{oh} + minutes{om});
    }
    throw SchemaError("malformed timestamp '" + std::string(text) + "'");
}

std::string format_timestamp(Timestamp ts) {
    using namespace std::chrono;
    const auto days = floor<std::chrono::days>(ts);
    const year_month_day ymd{days};
    const hh_mm_ss tod{ts - days};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                  static_cast<long>(tod.seconds().count()));
    return buf;
}

namespace {

const json& require(const json& j, const char* field) {
    auto it = j.find(field);
    if (it == j.end() || it->is_null()) throw SchemaError(std::string("missing required field '") + field + "'");
    return *it;
}

std::string require_string(const json& j, const char* field) {
    const auto& v = require(j, field);
    if (!v.is_string()) throw SchemaError(std::string("field '") + field + "' must be a string");
    return v.get<std::string>();
}

bool label_flag(const json& labels, const char* name) {
    auto it = labels.find(name);
    if (it == labels.end()) return false;
    if (!it->is_boolean()) throw SchemaError(std::string("label '") + name + "' must be a boolean");
    return it->get<bool>();
}

}  // namespace

Document document_from_json(const json& j) {
    if (!j.is_object()) throw SchemaError("document record must be a JSON object");
    Document doc;
    doc.id = require_string(j, "id");
    if (doc.id.empty()) throw SchemaError("field 'id' must be non-empty");
    doc.source = source_from_string(require_string(j, "source"));
    doc.timestamp = parse_timestamp(require_string(j, "timestamp"));
    doc.raw_text = require_string(j, "raw_text");
    if (auto it = j.find("labels"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) throw SchemaError("field 'labels' must be an object");
        if (!it->contains("sale")) throw SchemaError("missing required field 'labels.sale'");
        LabelSet labels{label_flag(*it, "sale"), label_flag(*it, "drug"), label_flag(*it, "weapon"),
                        label_flag(*it, "credential")};
        if (!labels.consistent())
            throw SchemaError("labels of '" + doc.id + "' mark a category sale while sale is false");
        doc.labels = labels;
    }
    return doc;
}

Document parse_document(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what(), e.byte);
    }
    return document_from_json(j);
}

json document_to_json(const Document& doc) {
    json j = {{"id", doc.id},
              {"source", std::string(to_string(doc.source))},
              {"timestamp", format_timestamp(doc.timestamp)},
              {"raw_text", doc.raw_text}};
    if (doc.labels) {
        j["labels"] = {{"sale", doc.labels->sale},
                       {"drug", doc.labels->drug},
                       {"weapon", doc.labels->weapon},
                       {"credential", doc.labels->credential}};
    }
    return j;
}

std::string serialize_document(const Document& doc) { return document_to_json(doc).dump(); }

std::vector<Document> parse_corpus(std::string_view jsonl) {
    std::vector<Document> docs;
    std::unordered_set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= jsonl.size()) {
        auto end = jsonl.find('\n', start);
        if (end == std::string_view::npos) end = jsonl.size();
        ++line_no;
        auto line = jsonl.substr(start, end - start);
        if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
            try {
                docs.push_back(parse_document(line));
            } catch (const ParseError& e) {
                throw ParseError("line " + std::to_string(line_no) + ": " + e.what(), start + e.offset());
            } catch (const SchemaError& e) {
                throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
            }
            if (!seen.insert(docs.back().id).second)
                throw SchemaError("line " + std::to_string(line_no) + ": duplicate id '" + docs.back().id + "'");
        }
        start = end + 1;
    }
    return docs;
}

std::vector<Document> read_corpus(const std::filesystem::path& path) { return parse_corpus(io::read_file(path)); }

std::string serialize_corpus(const std::vector<Document>& docs) {
    std::string out;
    for (const auto& d : docs) {
        out += serialize_document(d);
        out += '\n';
    }
    return out;
}

void write_corpus(const std::filesystem::path& path, const std::vector<Document>& docs) {
    io::write_file_atomic(path, serialize_corpus(docs));
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios) {
    const double parts[3] = {ratios.train, ratios.validation, ratios.test};
    for (double p : parts)
        if (!(p > 0.0)) throw ConfigError("split ratios must be positive");
    if (std::abs(parts[0] + parts[1] + parts[2] - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");

    std::array<std::size_t, 3> sizes{};
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        // Nudge by a tiny epsilon so that shares like 0.6 * 1575 = 944.999... floor to 945.
        sizes[i] = static_cast<std::size_t>(std::floor(parts[i] * static_cast<double>(n) + 1e-9));
        assigned += sizes[i];
    }
    for (std::size_t r = 0; assigned < n; ++r, ++assigned) ++sizes[r % 3];
    return sizes;
}

DatasetSplit split_labeled(const std::vector<Document>& corpus, const SplitRatios& ratios, std::uint64_t seed) {
    std::vector<std::string> ids;
    for (const auto& d : corpus)
        if (d.labeled()) ids.push_back(d.id);
    if (ids.empty()) throw ConfigError("cannot split a corpus without labeled documents");
    const auto sizes = split_sizes(ids.size(), ratios);

    Rng rng(seed);
    rng.shuffle(std::span(ids));

    DatasetSplit split;
    split.seed = seed;
    auto it = ids.begin();
    auto take = [&](std::vector<std::string>& part, std::size_t n) {
        part.assign(it, it + static_cast<std::ptrdiff_t>(n));
        it += static_cast<std::ptrdiff_t>(n);
    };
    take(split.train, sizes[0]);
    take(split.validation, sizes[1]);
    take(split.test, sizes[2]);
    return split;
}

json split_to_json(const DatasetSplit& split) {
    return {{"train", split.train}, {"validation", split.validation}, {"test", split.test}, {"seed", split.seed}};
}

DatasetSplit split_from_json(const json& j) {
    try {
        DatasetSplit s;
        s.train = j.at("train").get<std::vector<std::string>>();
        s.validation = j.at("validation").get<std::vector<std::string>>();
        s.test = j.at("test").get<std::vector<std::string>>();
        s.seed = j.at("seed").get<std::uint64_t>();
        return s;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("invalid split manifest: ") + e.what());
    }
}

}  // namespace sse
