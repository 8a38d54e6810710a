#include "sse/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "sse/error.hpp"
#include "sse/io.hpp"

namespace sse::embeddings {

using nlohmann::json;

const std::vector<double>& EmbeddingTable::at(const std::string& id) const {
    auto it = entries.find(id);
    if (it == entries.end()) throw JoinError("no embedding row for id '" + id + "'");
    return it->second;
}

EmbeddingTable parse_embedding_table(std::string_view jsonl) {
    EmbeddingTable table;
    std::size_t start = 0, line_no = 0;
    while (start < jsonl.size()) {
        auto end = jsonl.find('\n', start);
        if (end == std::string_view::npos) end = jsonl.size();
        ++line_no;
        const auto line = jsonl.substr(start, end - start);
        start = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        json row;
        try {
            row = json::parse(line);
        } catch (const json::parse_error& e) {
            throw FormatError("vector file line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!row.is_object() || !row.contains("id") || !row["id"].is_string() || !row.contains("vector") ||
            !row["vector"].is_array())
            throw FormatError("vector file line " + std::to_string(line_no) + ": expected {\"id\", \"vector\"}");
        auto id = row["id"].get<std::string>();
        std::vector<double> v;
        v.reserve(row["vector"].size());
        for (const auto& x : row["vector"]) {
            if (!x.is_number()) throw FormatError("non-numeric value in vector of id '" + id + "'");
            const double d = x.get<double>();
            if (!std::isfinite(d)) throw FormatError("non-finite value in vector of id '" + id + "'");
            v.push_back(d);
        }
        if (table.order.empty()) {
            table.dim = v.size();
        } else if (v.size() != table.dim) {
            throw FormatError("inconsistent dimension for id '" + id + "': expected " + std::to_string(table.dim) +
                              ", got " + std::to_string(v.size()));
        }
        if (table.entries.contains(id)) throw FormatError("duplicate id '" + id + "' in vector file");
        table.order.push_back(id);
        table.entries.emplace(std::move(id), std::move(v));
    }
    return table;
}

EmbeddingTable load_embedding_table(const std::filesystem::path& path) {
    return parse_embedding_table(io::read_file(path));
}

std::string serialize_vectors(const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
    std::string out;
    for (const auto& [id, v] : rows) {
        out += json{{"id", id}, {"vector", v}}.dump();
        out += '\n';
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        const bool alnum = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
        if (alnum) {
            cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

TfidfModel tfidf_fit(const std::vector<std::string>& texts, const TfidfConfig& config) {
    if (texts.empty()) throw FitError("tf-idf fit needs at least one text");
    if (config.max_features == 0) throw ConfigError("tf-idf max_features must be positive");
    std::unordered_map<std::string, std::size_t> df;
    for (const auto& t : texts) {
        auto toks = tokenize(t);
        std::sort(toks.begin(), toks.end());
        toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
        for (auto& tok : toks) ++df[std::move(tok)];
    }
    if (df.empty()) throw FitError("tf-idf fit: all texts are empty after tokenization");

    std::vector<std::pair<std::string, std::size_t>> terms(df.begin(), df.end());
    std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (terms.size() > config.max_features) terms.resize(config.max_features);
    // Columns in lexicographic term order.
    std::sort(terms.begin(), terms.end());

    TfidfModel model;
    model.config = config;
    const double n = static_cast<double>(texts.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
        model.vocabulary.emplace(terms[i].first, i);
        model.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(terms[i].second))) + 1.0);
    }
    return model;
}

std::vector<double> tfidf_embed(const TfidfModel& model, std::string_view text) {
    std::vector<double> v(model.dim(), 0.0);
    for (const auto& tok : tokenize(text))
        if (auto it = model.vocabulary.find(tok); it != model.vocabulary.end()) v[it->second] += 1.0;
    double norm = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] *= model.idf[i];
        norm += v[i] * v[i];
    }
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (auto& x : v) x /= norm;
    }
    return v;
}

json tfidf_to_json(const TfidfModel& model) {
    std::vector<std::string> terms(model.vocabulary.size());
    for (const auto& [term, idx] : model.vocabulary) terms[idx] = term;
    return {{"kind", "tfidf"}, {"max_features", model.config.max_features}, {"terms", terms}, {"idf", model.idf}};
}

TfidfModel tfidf_from_json(const json& j) {
    try {
        TfidfModel m;
        m.config.max_features = j.at("max_features").get<std::size_t>();
        const auto terms = j.at("terms").get<std::vector<std::string>>();
        m.idf = j.at("idf").get<std::vector<double>>();
        if (terms.size() != m.idf.size()) throw FormatError("tf-idf model: terms and idf lengths differ");
        for (std::size_t i = 0; i < terms.size(); ++i) m.vocabulary.emplace(terms[i], i);
        return m;
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid tf-idf model: ") + e.what());
    }
}

FeatureVector concat_features(std::string id, std::span<const double> embedding,
                              const features::ManualFeatureVector& manual, std::string schema) {
    FeatureVector fv{std::move(id), {}, std::move(schema)};
    fv.values.reserve(embedding.size() + manual.size());
    fv.values.insert(fv.values.end(), embedding.begin(), embedding.end());
    fv.values.insert(fv.values.end(), manual.begin(), manual.end());
    return fv;
}

FeatureVector concat_features(const std::string& embedding_id, std::span<const double> embedding,
                              const std::string& manual_id, const features::ManualFeatureVector& manual,
                              std::string schema) {
    if (embedding_id != manual_id)
        throw JoinError("embedding row '" + embedding_id + "' does not match manual row '" + manual_id + "'");
    return concat_features(embedding_id, embedding, manual, std::move(schema));
}

}  // namespace sse::embeddings
