#include "sse/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "sse/error.hpp"
#include "sse/io.hpp"
#include "sse/rng.hpp"

namespace sse::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using selftrain::Category;

std::string to_string(Stage1Mode m) {
    switch (m) {
        case Stage1Mode::sse: return "sse";
        case Stage1Mode::ensemble: return "ensemble";
        case Stage1Mode::gbdt: return "gbdt";
    }
    return "sse";
}

namespace {

Stage1Mode stage1_mode_from(const std::string& s) {
    if (s == "sse") return Stage1Mode::sse;
    if (s == "ensemble") return Stage1Mode::ensemble;
    if (s == "gbdt") return Stage1Mode::gbdt;
    throw ConfigError("unknown stage1 mode '" + s + "'");
}

EmbeddingMode embedding_mode_from(const std::string& s) {
    if (s == "tfidf") return EmbeddingMode::tfidf;
    if (s == "table") return EmbeddingMode::table;
    throw ConfigError("unknown embedding mode '" + s + "'");
}

fs::path resolve(const fs::path& base, const std::string& p) {
    if (p.empty()) return {};
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

void check_theta(double theta, const std::string& what) {
    if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError(what + " theta must lie in (0, 1]");
}

void check_iterations(int n, const std::string& what) {
    if (n < 1) throw ConfigError(what + " max_iterations must be positive");
}

}  // namespace

RunConfig config_from_json(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig cfg;
    try {
        cfg.corpus = resolve(base_dir, j.value("corpus", std::string{}));
        cfg.output_dir = resolve(base_dir, j.value("output_dir", std::string{}));
        if (j.contains("embedding")) {
            const auto& e = j.at("embedding");
            cfg.embedding.mode = embedding_mode_from(e.value("mode", std::string("tfidf")));
            cfg.embedding.max_features = e.value("max_features", cfg.embedding.max_features);
            if (e.contains("path") && !e.at("path").is_null())
                cfg.embedding.table_path = resolve(base_dir, e.at("path").get<std::string>());
        }
        if (cfg.embedding.max_features == 0) throw ConfigError("embedding max_features must be positive");
        if (cfg.embedding.mode == EmbeddingMode::table && cfg.embedding.table_path.empty())
            throw ConfigError("table embedding mode needs embedding.path");
        if (j.contains("split")) {
            const auto& s = j.at("split");
            cfg.ratios.train = s.value("train", cfg.ratios.train);
            cfg.ratios.validation = s.value("validation", cfg.ratios.validation);
            cfg.ratios.test = s.value("test", cfg.ratios.test);
            cfg.split_seed = s.value("seed", cfg.split_seed);
        }
        const double sum = cfg.ratios.train + cfg.ratios.validation + cfg.ratios.test;
        if (!(cfg.ratios.train > 0 && cfg.ratios.validation > 0 && cfg.ratios.test >= 0) || std::abs(sum - 1.0) > 1e-9)
            throw ConfigError("split ratios must be positive and sum to 1");
        if (j.contains("stage1")) {
            const auto& s = j.at("stage1");
            cfg.stage1_mode = stage1_mode_from(s.value("mode", std::string("sse")));
            cfg.sse.theta = s.value("theta", cfg.sse.theta);
            cfg.sse.max_iterations = s.value("max_iterations", cfg.sse.max_iterations);
            cfg.sse.seed = s.value("seed", cfg.sse.seed);
            if (s.contains("learners")) {
                const auto& ls = s.at("learners");
                if (!ls.is_array() || ls.size() != 3) throw ConfigError("stage1.learners must list 3 learners");
                for (std::size_t i = 0; i < 3; ++i)
                    cfg.sse.learner_specs[i] = learners::spec_from_json(ls[i], cfg.sse.learner_specs[i]);
            }
        }
        check_theta(cfg.sse.theta, "stage1");
        check_iterations(cfg.sse.max_iterations, "stage1");
        if (j.contains("stage2")) {
            const auto& s = j.at("stage2");
            cfg.stage2.validation_fraction = s.value("validation_fraction", cfg.stage2.validation_fraction);
            cfg.stage2.seed = s.value("seed", cfg.stage2.seed);
            for (auto c : selftrain::kCategories) {
                const auto name = selftrain::to_string(c);
                if (!s.contains(name)) continue;
                auto& cc = cfg.stage2.categories[static_cast<std::size_t>(c)];
                const auto& cj = s.at(name);
                cc.theta = cj.value("theta", cc.theta);
                cc.max_iterations = cj.value("max_iterations", cc.max_iterations);
                if (cj.contains("learner")) cc.learner = learners::spec_from_json(cj.at("learner"), cc.learner);
            }
        }
        if (!(cfg.stage2.validation_fraction >= 0.0 && cfg.stage2.validation_fraction < 1.0))
            throw ConfigError("stage2 validation_fraction must lie in [0, 1)");
        for (auto c : selftrain::kCategories) {
            const auto& cc = cfg.stage2.categories[static_cast<std::size_t>(c)];
            check_theta(cc.theta, selftrain::to_string(c));
            check_iterations(cc.max_iterations, selftrain::to_string(c));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig load_config(const fs::path& path) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    auto cfg = config_from_json(j, path.parent_path());
    if (cfg.corpus.empty()) throw ConfigError("config names no corpus");
    if (!fs::exists(cfg.corpus)) throw ConfigError("corpus not found: " + cfg.corpus.string());
    if (cfg.embedding.mode == EmbeddingMode::table && !fs::exists(cfg.embedding.table_path))
        throw ConfigError("embedding table not found: " + cfg.embedding.table_path.string());
    return cfg;
}

json config_to_json(const RunConfig& cfg) {
    json learners_j = json::array();
    for (const auto& s : cfg.sse.learner_specs) learners_j.push_back(learners::spec_to_json(s));
    json stage2 = {{"validation_fraction", cfg.stage2.validation_fraction}, {"seed", cfg.stage2.seed}};
    for (auto c : selftrain::kCategories) {
        const auto& cc = cfg.stage2.categories[static_cast<std::size_t>(c)];
        stage2[selftrain::to_string(c)] = {
            {"theta", cc.theta}, {"max_iterations", cc.max_iterations}, {"learner", learners::spec_to_json(cc.learner)}};
    }
    json embedding = {{"mode", cfg.embedding.mode == EmbeddingMode::tfidf ? "tfidf" : "table"},
                      {"max_features", cfg.embedding.max_features}};
    return {{"embedding", embedding},
            {"split",
             {{"train", cfg.ratios.train},
              {"validation", cfg.ratios.validation},
              {"test", cfg.ratios.test},
              {"seed", cfg.split_seed}}},
            {"stage1",
             {{"mode", to_string(cfg.stage1_mode)},
              {"theta", cfg.sse.theta},
              {"max_iterations", cfg.sse.max_iterations},
              {"seed", cfg.sse.seed},
              {"learners", learners_j}}},
            {"stage2", stage2}};
}

// ---- featurizer

Featurizer Featurizer::fit_tfidf(const std::vector<std::string>& texts, std::size_t max_features) {
    Featurizer f;
    f.mode_ = EmbeddingMode::tfidf;
    f.tfidf_ = embeddings::tfidf_fit(texts, {max_features});
    return f;
}

Featurizer Featurizer::from_table(embeddings::EmbeddingTable table) {
    if (!table.usable()) throw FormatError("embedding table is empty");
    Featurizer f;
    f.mode_ = EmbeddingMode::table;
    f.table_dim_ = table.dim;
    f.table_ = std::move(table);
    return f;
}

void Featurizer::attach_table(embeddings::EmbeddingTable table) {
    if (mode_ != EmbeddingMode::table) throw ConfigError("featurizer does not use an embedding table");
    if (table.dim != table_dim_)
        throw FormatError("embedding table dimension " + std::to_string(table.dim) + " differs from model's " +
                          std::to_string(table_dim_));
    table_ = std::move(table);
}

std::size_t Featurizer::embedding_dim() const noexcept {
    return mode_ == EmbeddingMode::tfidf ? tfidf_.dim() : table_dim_;
}

embeddings::FeatureVector Featurizer::features(const Document& doc) const {
    const auto manual = features::assemble_manual_features(doc);
    if (mode_ == EmbeddingMode::tfidf)
        return embeddings::concat_features(doc.id, embeddings::tfidf_embed(tfidf_, doc.raw_text), manual, "tfidf");
    return embeddings::concat_features(doc.id, table_.at(doc.id), manual, "table");
}

Matrix Featurizer::matrix(const std::vector<const Document*>& docs) const {
    Matrix m(0, dim());
    for (const auto* d : docs) m.append_row(features(*d).values);
    return m;
}

json Featurizer::to_json() const {
    if (mode_ == EmbeddingMode::tfidf) return {{"mode", "tfidf"}, {"tfidf", embeddings::tfidf_to_json(tfidf_)}};
    return {{"mode", "table"}, {"dim", table_dim_}};
}

Featurizer Featurizer::from_json(const json& j) {
    Featurizer f;
    try {
        const auto mode = j.at("mode").get<std::string>();
        if (mode == "tfidf") {
            f.mode_ = EmbeddingMode::tfidf;
            f.tfidf_ = embeddings::tfidf_from_json(j.at("tfidf"));
        } else if (mode == "table") {
            f.mode_ = EmbeddingMode::table;
            f.table_dim_ = j.at("dim").get<std::size_t>();
        } else {
            throw FormatError("unknown featurizer mode '" + mode + "'");
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("featurizer: ") + e.what());
    }
    return f;
}

std::string manual_features_jsonl(const std::vector<Document>& docs) {
    std::string out;
    for (const auto& d : docs) {
        const auto m = features::assemble_manual_features(d);
        out += json{{"id", d.id},
                    {"manual", std::vector<double>(m.begin(), m.end())},
                    {"schema_version", features::kSchemaVersion}}
                   .dump();
        out += '\n';
    }
    return out;
}

// ---- training

namespace {

std::unordered_map<std::string, const Document*> index_corpus(const std::vector<Document>& corpus) {
    std::unordered_map<std::string, const Document*> by_id;
    for (const auto& d : corpus) by_id.emplace(d.id, &d);
    return by_id;
}

std::vector<const Document*> lookup(const std::unordered_map<std::string, const Document*>& by_id,
                                    const std::vector<std::string>& ids) {
    std::vector<const Document*> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw JoinError("split refers to unknown document '" + id + "'");
        if (!it->second->labeled()) throw SchemaError("split refers to unlabeled document '" + id + "'");
        out.push_back(it->second);
    }
    return out;
}

selftrain::SseModel train_single_gbdt(const selftrain::LabeledSet& train, const selftrain::SseConfig& cfg) {
    selftrain::SseModel m;
    m.learners.push_back(learners::fit(selftrain::seeded(cfg.learner_specs[0], cfg.seed, 0), train.x, train.y));
    m.weights = voting::EnsembleWeights::uniform(1);
    m.final_train_size = train.x.rows();
    return m;
}

}  // namespace

PipelineModel train_pipeline(const std::vector<Document>& corpus, const DatasetSplit& split, const RunConfig& cfg) {
    const auto by_id = index_corpus(corpus);
    const auto train_docs = lookup(by_id, split.train);
    const auto val_docs = lookup(by_id, split.validation);
    std::vector<const Document*> unlabeled_docs;
    for (const auto& d : corpus)
        if (!d.labeled()) unlabeled_docs.push_back(&d);

    PipelineModel model{cfg, split, {}, {}, {}};
    if (cfg.embedding.mode == EmbeddingMode::tfidf) {
        std::vector<std::string> texts;
        for (const auto* d : train_docs) texts.push_back(d->raw_text);
        for (const auto* d : unlabeled_docs) texts.push_back(d->raw_text);
        model.featurizer = Featurizer::fit_tfidf(texts, cfg.embedding.max_features);
    } else {
        model.featurizer = Featurizer::from_table(embeddings::load_embedding_table(cfg.embedding.table_path));
    }
    const auto& fz = model.featurizer;

    selftrain::LabeledSet train{fz.matrix(train_docs), {}, split.train};
    for (const auto* d : train_docs) train.y.push_back(d->labels->sale ? 1 : 0);
    selftrain::LabeledSet validation{fz.matrix(val_docs), {}, split.validation};
    for (const auto* d : val_docs) validation.y.push_back(d->labels->sale ? 1 : 0);
    selftrain::UnlabeledSet unlabeled{fz.matrix(unlabeled_docs), {}};
    for (const auto* d : unlabeled_docs) unlabeled.ids.push_back(d->id);

    switch (cfg.stage1_mode) {
        case Stage1Mode::sse: model.stage1 = selftrain::train_sse(train, validation, unlabeled, cfg.sse); break;
        case Stage1Mode::ensemble: model.stage1 = selftrain::train_supervised_ensemble(train, validation, cfg.sse); break;
        case Stage1Mode::gbdt: model.stage1 = train_single_gbdt(train, cfg.sse); break;
    }

    selftrain::UnlabeledSet sale_pool{Matrix(0, fz.dim()), {}};
    for (std::size_t r = 0; r < unlabeled.x.rows(); ++r) {
        if (model.stage1.vote(unlabeled.x.row(r)).pseudo_label == voting::Vote::sale) {
            sale_pool.x.append_row(unlabeled.x.row(r));
            sale_pool.ids.push_back(unlabeled.ids[r]);
        }
    }
    // category classifiers only ever see sale documents, so they learn from the labeled sale subset
    std::vector<std::size_t> sale_rows;
    selftrain::AnnotatedSet annotated;
    for (std::size_t i = 0; i < train_docs.size(); ++i) {
        if (!train_docs[i]->labels->sale) continue;
        sale_rows.push_back(i);
        annotated.labels.push_back(*train_docs[i]->labels);
        annotated.ids.push_back(train_docs[i]->id);
    }
    annotated.x = train.x.select_rows(sale_rows);
    model.stage2 = selftrain::train_stage2(annotated, sale_pool, cfg.stage2);
    return model;
}

PipelineModel train_pipeline(const std::vector<Document>& corpus, const RunConfig& cfg) {
    return train_pipeline(corpus, split_labeled(corpus, cfg.ratios, cfg.split_seed), cfg);
}

std::vector<json> training_log(const PipelineModel& model) {
    std::vector<json> lines;
    for (const auto& h : model.stage1.history) lines.push_back(selftrain::iteration_to_json(h));
    for (const auto& m : model.stage2.models)
        for (const auto& h : m.history) lines.push_back(selftrain::iteration_to_json(h));
    return lines;
}

// ---- bundle

namespace {

constexpr const char* kBundleFormat = "sse-bundle";
constexpr int kBundleVersion = 1;

void write_json(const fs::path& p, const json& j, int indent = 2) {
    std::ofstream out(p, std::ios::binary);
    out << j.dump(indent) << '\n';
    if (!out) throw std::runtime_error("cannot write " + p.string());
}

json read_json(const fs::path& p) {
    try {
        return json::parse(io::read_file(p));
    } catch (const json::parse_error& e) {
        throw FormatError(p.string() + ": " + e.what());
    }
}

selftrain::Termination termination_from(const std::string& s) {
    if (s == "max_iterations") return selftrain::Termination::max_iterations;
    if (s == "pool_exhausted") return selftrain::Termination::pool_exhausted;
    if (s == "no_confident") return selftrain::Termination::no_confident;
    throw FormatError("unknown termination '" + s + "'");
}

}  // namespace

void save_bundle(const fs::path& dir, const PipelineModel& model) {
    io::write_directory_atomic(dir, [&](const fs::path& tmp) {
        fs::create_directories(tmp / "learners");
        json stage2 = json::array();
        for (const auto& m : model.stage2.models) {
            const auto name = selftrain::to_string(m.category);
            stage2.push_back({{"category", name},
                              {"theta", m.theta},
                              {"max_iterations", m.max_iterations},
                              {"termination", selftrain::to_string(m.termination)},
                              {"learner", "learners/stage2_" + name + ".json"}});
            write_json(tmp / "learners" / ("stage2_" + name + ".json"), learners::learner_to_json(m.learner), -1);
        }
        json stage1_files = json::array();
        for (std::size_t i = 0; i < model.stage1.learners.size(); ++i) {
            const auto file = "learners/stage1_" + std::to_string(i) + ".json";
            stage1_files.push_back(file);
            write_json(tmp / file, learners::learner_to_json(model.stage1.learners[i]), -1);
        }
        json manifest = {{"format", kBundleFormat},
                         {"version", kBundleVersion},
                         {"feature_schema_version", features::kSchemaVersion},
                         {"feature_dim", model.featurizer.dim()},
                         {"stage1",
                          {{"mode", to_string(model.config.stage1_mode)},
                           {"theta", model.config.sse.theta},
                           {"weights", model.stage1.weights.w},
                           {"termination", selftrain::to_string(model.stage1.termination)},
                           {"iterations", model.stage1.history.size()},
                           {"final_train_size", model.stage1.final_train_size},
                           {"learners", stage1_files}}},
                         {"stage2", stage2},
                         {"category_threshold", selftrain::kCategoryThreshold}};
        if (model.featurizer.mode() == EmbeddingMode::table)
            manifest["embedding_table"] = model.config.embedding.table_path.string();
        write_json(tmp / "manifest.json", manifest);
        write_json(tmp / "config.json", config_to_json(model.config));
        write_json(tmp / "split.json", split_to_json(model.split));
        write_json(tmp / "featurizer.json", model.featurizer.to_json(), -1);
        std::string log;
        for (const auto& line : training_log(model)) log += line.dump() + '\n';
        std::ofstream(tmp / "training_log.jsonl", std::ios::binary) << log;
    });
}

PipelineModel load_bundle(const fs::path& dir, const std::optional<fs::path>& table_override) {
    if (!fs::is_directory(dir)) throw FormatError("model bundle not found: " + dir.string());
    const auto manifest = read_json(dir / "manifest.json");
    try {
        if (manifest.value("format", "") != kBundleFormat) throw FormatError("not a model bundle: " + dir.string());
        if (manifest.at("version").get<int>() != kBundleVersion) throw FormatError("unsupported bundle version");
        if (manifest.at("feature_schema_version").get<int>() != features::kSchemaVersion)
            throw FormatError("bundle was built with a different feature schema");
        PipelineModel model;
        model.config = config_from_json(read_json(dir / "config.json"), dir);
        model.split = split_from_json(read_json(dir / "split.json"));
        model.featurizer = Featurizer::from_json(read_json(dir / "featurizer.json"));
        if (model.featurizer.mode() == EmbeddingMode::table) {
            const fs::path table = table_override ? *table_override : fs::path(manifest.at("embedding_table").get<std::string>());
            model.featurizer.attach_table(embeddings::load_embedding_table(table));
            model.config.embedding.table_path = table;
        }
        const auto& s1 = manifest.at("stage1");
        for (const auto& f : s1.at("learners"))
            model.stage1.learners.push_back(learners::learner_from_json(read_json(dir / f.get<std::string>())));
        model.stage1.weights.w = s1.at("weights").get<std::vector<double>>();
        model.stage1.termination = termination_from(s1.at("termination").get<std::string>());
        model.stage1.final_train_size = s1.at("final_train_size").get<std::size_t>();
        if (model.stage1.weights.w.size() != model.stage1.learners.size())
            throw FormatError("stage1 weights do not match its learners");
        const auto& s2 = manifest.at("stage2");
        if (!s2.is_array() || s2.size() != 3) throw FormatError("bundle needs three category models");
        for (std::size_t k = 0; k < 3; ++k) {
            const auto& m = s2[k];
            if (m.at("category").get<std::string>() != selftrain::to_string(selftrain::kCategories[k]))
                throw FormatError("category models out of order");
            model.stage2.models.push_back(selftrain::CategoryModel{
                selftrain::kCategories[k], learners::learner_from_json(read_json(dir / m.at("learner").get<std::string>())),
                m.at("theta").get<double>(), m.at("max_iterations").get<int>(), {},
                termination_from(m.at("termination").get<std::string>())});
        }
        const auto dim = manifest.at("feature_dim").get<std::size_t>();
        if (dim != model.featurizer.dim()) throw FormatError("featurizer width differs from manifest");
        for (const auto& l : model.stage1.learners)
            if (l.feature_dim() != dim) throw FormatError("stage1 learner width differs from manifest");
        for (const auto& m : model.stage2.models)
            if (m.learner.feature_dim() != dim) throw FormatError("stage2 learner width differs from manifest");
        return model;
    } catch (const json::exception& e) {
        throw FormatError("bundle manifest: " + std::string(e.what()));
    } catch (const ConfigError& e) {
        throw FormatError("bundle config: " + std::string(e.what()));
    }
}

// ---- prediction and evaluation

std::vector<selftrain::PredictionRecord> predict_documents(const PipelineModel& model, const std::vector<Document>& docs) {
    std::vector<selftrain::PredictionRecord> out;
    out.reserve(docs.size());
    for (const auto& d : docs) {
        const auto fv = model.featurizer.features(d);
        out.push_back(selftrain::predict(model.stage1, model.stage2, d.id, fv.values));
    }
    return out;
}

eval::EvaluationReport evaluate_records(const std::vector<selftrain::PredictionRecord>& records,
                                        const std::vector<LabelSet>& truth) {
    if (records.size() != truth.size()) throw ShapeError("predictions and truth differ in length");
    std::array<eval::ConfusionMatrix, 4> cms;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto p = records[i].labels();
        const auto& t = truth[i];
        cms[0].add(t.sale, p.sale);
        cms[1].add(t.drug, p.drug);
        cms[2].add(t.weapon, p.weapon);
        cms[3].add(t.credential, p.credential);
    }
    return eval::report_from_confusions(cms);
}

eval::EvaluationReport evaluate(const PipelineModel& model, const std::vector<Document>& docs) {
    std::vector<Document> labeled;
    std::vector<LabelSet> truth;
    for (const auto& d : docs) {
        if (!d.labeled()) continue;
        labeled.push_back(d);
        truth.push_back(*d.labels);
    }
    if (labeled.empty()) throw SchemaError("no labeled documents to evaluate");
    return evaluate_records(predict_documents(model, labeled), truth);
}

// ---- labeled-fraction sweep

namespace {

int primary_group(const LabelSet& l) {
    if (!l.sale) return 0;
    if (l.drug) return 1;
    if (l.weapon) return 2;
    if (l.credential) return 3;
    return 4;
}

}  // namespace

std::vector<std::string> subsample_labeled(const std::vector<Document>& corpus, const std::vector<std::string>& ids,
                                           double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("labeled fraction must lie in (0, 1]");
    if (fraction == 1.0) return ids;
    const auto by_id = index_corpus(corpus);
    const auto docs = lookup(by_id, ids);
    std::array<std::vector<std::size_t>, 5> groups;
    for (std::size_t i = 0; i < docs.size(); ++i) groups[primary_group(*docs[i]->labels)].push_back(i);
    Rng rng(mix_seed(seed, 0x5eed));
    std::vector<std::size_t> keep;
    for (auto& g : groups) {
        if (g.empty()) continue;
        rng.shuffle(std::span(g));
        const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(g.size()))));
        keep.insert(keep.end(), g.begin(), g.begin() + static_cast<std::ptrdiff_t>(std::min(n, g.size())));
    }
    std::sort(keep.begin(), keep.end());
    std::vector<std::string> out;
    for (auto i : keep) out.push_back(ids[i]);
    return out;
}

SweepReport labeled_fraction_sweep(const std::vector<Document>& corpus, const std::vector<double>& fractions,
                                   const std::vector<std::uint64_t>& seeds, const RunConfig& cfg) {
    if (fractions.empty() || seeds.empty()) throw ConfigError("sweep needs at least one fraction and one seed");
    for (double f : fractions)
        if (!(f > 0.0 && f <= 1.0)) throw ConfigError("labeled fraction must lie in (0, 1]");
    const auto base = split_labeled(corpus, cfg.ratios, cfg.split_seed);
    const auto by_id = index_corpus(corpus);
    std::vector<Document> test_docs;
    for (const auto* d : lookup(by_id, base.test)) test_docs.push_back(*d);
    if (test_docs.empty()) throw ConfigError("sweep needs a non-empty test split");

    SweepReport report;
    for (double fraction : fractions) {
        for (auto seed : seeds) {
            SweepCell cell{fraction, seed, std::nullopt, {}};
            auto split = base;
            split.train = subsample_labeled(corpus, base.train, fraction, seed);
            bool pos = false, neg = false;
            for (const auto* d : lookup(by_id, split.train)) (d->labels->sale ? pos : neg) = true;
            if (!(pos && neg)) {
                cell.skip_reason = "single-class train set";
            } else {
                auto run = cfg;
                run.sse.seed = seed;
                run.stage2.seed = seed;
                try {
                    const auto model = train_pipeline(corpus, split, run);
                    cell.macro = evaluate(model, test_docs).macro;
                } catch (const FitError& e) {
                    cell.skip_reason = e.what();
                }
            }
            report.cells.push_back(std::move(cell));
        }
        SweepSummary s{fraction, 0, {0, 0, 0, 0}, {0, 0, 0, 0}};
        std::vector<eval::MetricSet> done;
        for (const auto& c : report.cells)
            if (c.fraction == fraction && c.macro) done.push_back(*c.macro);
        s.completed = done.size();
        if (!done.empty()) {
            const double n = static_cast<double>(done.size());
            for (const auto& m : done) {
                s.mean.accuracy += m.accuracy / n;
                s.mean.f1 += m.f1 / n;
                s.mean.mcc += m.mcc / n;
                s.mean.tmcc += m.tmcc / n;
            }
            if (done.size() > 1) {
                for (const auto& m : done) {
                    s.stddev.accuracy += std::pow(m.accuracy - s.mean.accuracy, 2) / (n - 1);
                    s.stddev.f1 += std::pow(m.f1 - s.mean.f1, 2) / (n - 1);
                    s.stddev.mcc += std::pow(m.mcc - s.mean.mcc, 2) / (n - 1);
                    s.stddev.tmcc += std::pow(m.tmcc - s.mean.tmcc, 2) / (n - 1);
                }
                s.stddev.accuracy = std::sqrt(s.stddev.accuracy);
                s.stddev.f1 = std::sqrt(s.stddev.f1);
                s.stddev.mcc = std::sqrt(s.stddev.mcc);
                s.stddev.tmcc = std::sqrt(s.stddev.tmcc);
            }
        }
        report.summary.push_back(s);
    }
    return report;
}

std::string sweep_csv(const SweepReport& report) {
    std::ostringstream out;
    out << "fraction,seed,accuracy,f1,tmcc\n";
    for (const auto& c : report.cells) {
        out << json(c.fraction).dump() << ',' << c.seed << ',';
        if (c.macro)
            out << json(c.macro->accuracy).dump() << ',' << json(c.macro->f1).dump() << ',' << json(c.macro->tmcc).dump();
        else
            out << ",,";
        out << '\n';
    }
    return out.str();
}

json sweep_to_json(const SweepReport& report) {
    json cells = json::array(), summary = json::array();
    for (const auto& c : report.cells) {
        json j = {{"fraction", c.fraction}, {"seed", c.seed}};
        if (c.macro) j["macro"] = eval::metric_to_json(*c.macro);
        else j["skipped"] = c.skip_reason;
        cells.push_back(j);
    }
    for (const auto& s : report.summary)
        summary.push_back({{"fraction", s.fraction},
                           {"completed", s.completed},
                           {"mean", eval::metric_to_json(s.mean)},
                           {"std", eval::metric_to_json(s.stddev)}});
    return {{"cells", cells}, {"summary", summary}};
}

}  // namespace sse::pipeline
