// Command-line front end: synth, extract-features, fit-embeddings, train,
// predict, evaluate, sweep, rank.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "sse/corpus.hpp"
#include "sse/embeddings.hpp"
#include "sse/error.hpp"
#include "sse/eval.hpp"
#include "sse/features.hpp"
#include "sse/io.hpp"
#include "sse/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::shared_ptr<spdlog::logger> logger() {
    static auto log = [] {
        auto l = spdlog::stderr_logger_st("sse");
        l->set_pattern("%Y-%m-%dT%H:%M:%S.%e %^%l%$ %v");
        const char* env = std::getenv("SSE_LOG");
        const std::string level = env ? env : "info";
        if (level == "debug") l->set_level(spdlog::level::debug);
        else if (level == "warn") l->set_level(spdlog::level::warn);
        else l->set_level(spdlog::level::info);
        return l;
    }();
    return log;
}

fs::path lock_path(const fs::path& target) {
    auto p = target.lexically_normal();
    if (p.filename().empty()) p = p.parent_path();
    return p.parent_path() / ("." + p.filename().string() + ".lock");
}

std::string jsonl(const std::vector<json>& rows) {
    std::string out;
    for (const auto& r : rows) out += r.dump() + '\n';
    return out;
}

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw sse::ConfigError("not a number: '" + item + "'");
        }
    }
    return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
    std::vector<std::uint64_t> out;
    for (double d : parse_doubles(csv)) {
        if (d < 0 || d != std::floor(d)) throw sse::ConfigError("seeds must be non-negative integers");
        out.push_back(static_cast<std::uint64_t>(d));
    }
    return out;
}

// CSV: header of model names, then one row of scores per run.
std::pair<std::vector<std::string>, std::vector<std::vector<double>>> read_score_csv(const fs::path& path) {
    std::stringstream in(sse::io::read_file(path));
    std::string line;
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (names.empty()) {
            std::stringstream ss(line);
            for (std::string cell; std::getline(ss, cell, ',');) names.push_back(cell);
            continue;
        }
        try {
            rows.push_back(parse_doubles(line));
        } catch (const sse::ConfigError& e) {
            throw sse::FormatError(path.string() + " line " + std::to_string(lineno) + ": " + e.what());
        }
        if (rows.back().size() != names.size())
            throw sse::FormatError(path.string() + " line " + std::to_string(lineno) + ": expected " +
                                   std::to_string(names.size()) + " scores");
    }
    if (names.empty()) throw sse::FormatError(path.string() + ": empty score file");
    return {names, rows};
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage self-training ensemble for sale / category document classification"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
    std::string synth_out, synth_truth;
    sse::SyntheticSpec sspec;
    std::uint64_t synth_seed = 0;
    std::string sampling = "stratified";
    synth->add_option("--out", synth_out, "Corpus JSONL path")->required();
    synth->add_option("--labeled", sspec.labeled, "Labeled documents")->capture_default_str();
    synth->add_option("--unlabeled", sspec.unlabeled, "Unlabeled documents")->capture_default_str();
    synth->add_option("--noise", sspec.noise, "Sale-label flip rate on labeled documents")->capture_default_str();
    synth->add_option("--sale-rate", sspec.sale_rate, "Fraction of sale documents")->capture_default_str();
    synth->add_option("--signal-rate", sspec.signal_rate, "Per-line keyword planting rate")->capture_default_str();
    synth->add_option("--pattern-rate", sspec.pattern_rate, "Pattern item rate in sale documents")->capture_default_str();
    synth->add_option("--confuser-rate", sspec.confuser_rate, "Topic words in non-sale documents")->capture_default_str();
    synth->add_option("--sampling", sampling, "Labeled subset sampling")
        ->check(CLI::IsMember({"stratified", "uniform"}))
        ->capture_default_str();
    synth->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();
    synth->add_option("--truth", synth_truth, "Optional JSONL with true labels of unlabeled documents");

    // extract-features
    auto* extract = app.add_subcommand("extract-features", "Write manual feature vectors per document");
    std::string ex_corpus, ex_out;
    extract->add_option("--corpus", ex_corpus, "Corpus JSONL")->required();
    extract->add_option("--out", ex_out, "Output JSONL")->required();

    // fit-embeddings
    auto* fitemb = app.add_subcommand("fit-embeddings", "Fit TF-IDF on a corpus and write the vector file");
    std::string fe_corpus, fe_out, fe_model;
    std::size_t fe_max = 5000;
    fitemb->add_option("--corpus", fe_corpus, "Corpus JSONL")->required();
    fitemb->add_option("--out", fe_out, "Vector file (JSONL {id, vector})")->required();
    fitemb->add_option("--max-features", fe_max, "Vocabulary size")->capture_default_str();
    fitemb->add_option("--model-out", fe_model, "Optional TF-IDF model JSON");

    // train
    auto* train = app.add_subcommand("train", "Train a model bundle from a run config");
    std::string tr_config, tr_outdir;
    std::optional<std::uint64_t> tr_seed;
    train->add_option("--config", tr_config, "Run config JSON")->required();
    train->add_option("--output-dir", tr_outdir, "Override output_dir");
    train->add_option("--seed", tr_seed, "Override stage1 and stage2 seeds");

    // predict
    auto* predict = app.add_subcommand("predict", "Predict labels for a corpus");
    std::string pr_model, pr_corpus, pr_out, pr_table;
    predict->add_option("--model", pr_model, "Model bundle directory")->required();
    predict->add_option("--corpus", pr_corpus, "Corpus JSONL")->required();
    predict->add_option("--out", pr_out, "Predictions JSONL")->required();
    predict->add_option("--embeddings", pr_table, "Vector file (table-mode bundles)");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a bundle on labeled documents");
    std::string ev_model, ev_corpus, ev_out, ev_table, ev_split = "all";
    evaluate->add_option("--model", ev_model, "Model bundle directory")->required();
    evaluate->add_option("--corpus", ev_corpus, "Corpus JSONL")->required();
    evaluate->add_option("--out", ev_out, "Report JSON (stdout if omitted)");
    evaluate->add_option("--embeddings", ev_table, "Vector file (table-mode bundles)");
    evaluate->add_option("--split", ev_split, "Restrict to a split recorded in the bundle")
        ->check(CLI::IsMember({"all", "train", "validation", "test"}))
        ->capture_default_str();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Labeled-fraction sweep");
    std::string sw_config, sw_out, sw_summary, sw_fractions = "0.05,0.25,0.5,1.0", sw_seeds = "1,2,3,4,5";
    sweep->add_option("--config", sw_config, "Run config JSON")->required();
    sweep->add_option("--out", sw_out, "CSV fraction,seed,accuracy,f1,tmcc")->required();
    sweep->add_option("--summary", sw_summary, "Optional JSON with per-fraction mean and std");
    sweep->add_option("--fractions", sw_fractions, "Comma-separated fractions in (0, 1]")->capture_default_str();
    sweep->add_option("--seeds", sw_seeds, "Comma-separated seeds")->capture_default_str();

    // rank
    auto* rank = app.add_subcommand("rank", "Friedman ranking of models over runs");
    std::vector<std::string> rk_scores;
    std::string rk_out;
    rank->add_option("--scores", rk_scores, "CSV per metric: header of model names, one row per run")
        ->required()
        ->check(CLI::ExistingFile);
    rank->add_option("--out", rk_out, "Rank report JSON (stdout if omitted)");

    CLI11_PARSE(app, argc, argv);

    auto log = logger();
    try {
        Timer timer;
        if (*synth) {
            sspec.sampling = sampling == "uniform" ? sse::LabeledSampling::uniform : sse::LabeledSampling::stratified;
            const auto corpus = sse::generate_synthetic_corpus(sspec, synth_seed);
            std::vector<sse::Document> docs = corpus.labeled;
            docs.insert(docs.end(), corpus.unlabeled.begin(), corpus.unlabeled.end());
            sse::write_corpus(synth_out, docs);
            json manifest = {{"corpus", fs::path(synth_out).filename().string()},
                             {"seed", synth_seed},
                             {"labeled", sspec.labeled},
                             {"unlabeled", sspec.unlabeled},
                             {"noise", sspec.noise},
                             {"sale_rate", sspec.sale_rate},
                             {"signal_rate", sspec.signal_rate},
                             {"pattern_rate", sspec.pattern_rate},
                             {"confuser_rate", sspec.confuser_rate},
                             {"sampling", sampling},
                             {"flipped", corpus.flipped}};
            sse::io::write_file_atomic(synth_out + ".manifest.json", manifest.dump(2) + "\n");
            if (!synth_truth.empty()) {
                std::vector<json> rows;
                for (std::size_t i = 0; i < corpus.unlabeled.size(); ++i) {
                    const auto& l = corpus.unlabeled_truth[i];
                    rows.push_back({{"id", corpus.unlabeled[i].id},
                                    {"labels",
                                     {{"sale", l.sale}, {"drug", l.drug}, {"weapon", l.weapon}, {"credential", l.credential}}}});
                }
                sse::io::write_file_atomic(synth_truth, jsonl(rows));
            }
            log->info("wrote {} documents ({} labels flipped) to {}", docs.size(), corpus.flipped, synth_out);
        } else if (*extract) {
            const auto docs = sse::read_corpus(ex_corpus);
            sse::io::write_file_atomic(ex_out, sse::pipeline::manual_features_jsonl(docs));
            log->info("wrote manual features for {} documents to {}", docs.size(), ex_out);
        } else if (*fitemb) {
            if (fe_max == 0) throw sse::ConfigError("--max-features must be positive");
            const auto docs = sse::read_corpus(fe_corpus);
            std::vector<std::string> texts;
            for (const auto& d : docs) texts.push_back(d.raw_text);
            const auto model = sse::embeddings::tfidf_fit(texts, {fe_max});
            std::vector<std::pair<std::string, std::vector<double>>> rows;
            for (const auto& d : docs) rows.emplace_back(d.id, sse::embeddings::tfidf_embed(model, d.raw_text));
            sse::io::write_file_atomic(fe_out, sse::embeddings::serialize_vectors(rows));
            if (!fe_model.empty())
                sse::io::write_file_atomic(fe_model, sse::embeddings::tfidf_to_json(model).dump() + "\n");
            log->info("wrote {} vectors of dim {} to {}", rows.size(), model.dim(), fe_out);
        } else if (*train) {
            auto cfg = sse::pipeline::load_config(tr_config);
            if (!tr_outdir.empty()) cfg.output_dir = tr_outdir;
            if (cfg.output_dir.empty()) throw sse::ConfigError("no output directory given");
            if (tr_seed) cfg.sse.seed = cfg.stage2.seed = *tr_seed;
            sse::io::LockFile lock(lock_path(cfg.output_dir));
            const auto docs = sse::read_corpus(cfg.corpus);
            log->info("training on {} ({} documents), stage1 mode {}", cfg.corpus.string(), docs.size(),
                      sse::pipeline::to_string(cfg.stage1_mode));
            const auto model = sse::pipeline::train_pipeline(docs, cfg);
            for (const auto& h : model.stage1.history)
                log->debug("stage1 iteration {}: train {} added {} remaining {}", h.iteration, h.train_size,
                           h.additions.size(), h.pool_remaining);
            sse::pipeline::save_bundle(cfg.output_dir, model);
            log->info("stage1 stopped after {} iterations ({}), final train size {}", model.stage1.history.size(),
                      sse::selftrain::to_string(model.stage1.termination), model.stage1.final_train_size);
            log->info("wrote bundle {} in {:.1f}s", cfg.output_dir.string(), timer.seconds());
        } else if (*predict) {
            const auto model = sse::pipeline::load_bundle(
                pr_model, pr_table.empty() ? std::nullopt : std::optional<fs::path>(pr_table));
            const auto docs = sse::read_corpus(pr_corpus);
            std::vector<json> rows;
            for (const auto& r : sse::pipeline::predict_documents(model, docs))
                rows.push_back(sse::selftrain::prediction_to_json(r));
            sse::io::write_file_atomic(pr_out, jsonl(rows));
            log->info("wrote {} predictions to {}", rows.size(), pr_out);
        } else if (*evaluate) {
            const auto model = sse::pipeline::load_bundle(
                ev_model, ev_table.empty() ? std::nullopt : std::optional<fs::path>(ev_table));
            auto docs = sse::read_corpus(ev_corpus);
            if (ev_split != "all") {
                const auto& ids = ev_split == "train" ? model.split.train
                                  : ev_split == "validation" ? model.split.validation
                                                             : model.split.test;
                const std::unordered_set<std::string> keep(ids.begin(), ids.end());
                std::erase_if(docs, [&](const sse::Document& d) { return !keep.contains(d.id); });
            }
            const auto report = sse::pipeline::evaluate(model, docs);
            const auto text = sse::eval::report_to_json(report).dump(2) + "\n";
            if (ev_out.empty()) std::cout << text;
            else sse::io::write_file_atomic(ev_out, text);
            log->info("macro accuracy {:.5f} f1 {:.5f} tmcc {:.5f} on {} documents", report.macro.accuracy,
                      report.macro.f1, report.macro.tmcc, report.n_documents);
        } else if (*sweep) {
            const auto cfg = sse::pipeline::load_config(sw_config);
            const auto fractions = parse_doubles(sw_fractions);
            const auto seeds = parse_seeds(sw_seeds);
            sse::io::LockFile lock(lock_path(sw_out));
            const auto docs = sse::read_corpus(cfg.corpus);
            const auto report = sse::pipeline::labeled_fraction_sweep(docs, fractions, seeds, cfg);
            sse::io::write_file_atomic(sw_out, sse::pipeline::sweep_csv(report));
            if (!sw_summary.empty())
                sse::io::write_file_atomic(sw_summary, sse::pipeline::sweep_to_json(report).dump(2) + "\n");
            for (const auto& s : report.summary)
                log->info("fraction {}: {} runs, macro f1 {:.4f} +- {:.4f}", s.fraction, s.completed, s.mean.f1,
                          s.stddev.f1);
            for (const auto& c : report.cells)
                if (!c.macro) log->warn("skipped fraction {} seed {}: {}", c.fraction, c.seed, c.skip_reason);
            log->info("sweep done in {:.1f}s", timer.seconds());
        } else if (*rank) {
            json metrics = json::object();
            std::vector<std::string> models;
            std::vector<double> overall;
            for (const auto& file : rk_scores) {
                const auto [names, rows] = read_score_csv(file);
                if (models.empty()) {
                    models = names;
                    overall.assign(names.size(), 0.0);
                } else if (names != models) {
                    throw sse::FormatError(file + ": model columns differ from " + rk_scores.front());
                }
                const auto r = sse::eval::friedman_rank(rows);
                for (std::size_t j = 0; j < overall.size(); ++j)
                    overall[j] += r.mean_ranks[j] / static_cast<double>(rk_scores.size());
                metrics[fs::path(file).stem().string()] = sse::eval::rank_to_json(r, names);
            }
            const auto text = json{{"models", models}, {"metrics", metrics}, {"overall_mean_ranks", overall}}.dump(2) + "\n";
            if (rk_out.empty()) std::cout << text;
            else sse::io::write_file_atomic(rk_out, text);
        }
        return 0;
    } catch (const sse::ConfigError& e) {
        log->error("config error: {}", e.what());
        return 1;
    } catch (const sse::DataError& e) {
        log->error("data error: {}", e.what());
        return 2;
    } catch (const sse::FitError& e) {
        log->error("data error: {}", e.what());
        return 2;
    } catch (const std::exception& e) {
        log->error("internal error: {}", e.what());
        return 3;
    }
}
