// Acceptance run: one PASS/FAIL line per criterion on stdout, details on stderr.
// Usage: acceptance [--only N]...

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sse/error.hpp"
#include "sse/eval.hpp"
#include "sse/features.hpp"
#include "sse/io.hpp"
#include "sse/pipeline.hpp"
#include "sse/rng.hpp"
#include "sse/voting.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace sse;

namespace {

// Tolerances and limits, one per criterion.
constexpr int kVoteCases = 10000;
constexpr double kVoteSeconds = 5.0;
constexpr double kEntropyTol = 1e-9;
constexpr double kEntropyFixtureRounding = 5e-7;  // 0.468996 is quoted to 6 decimals
constexpr double kStatsTol = 1e-12;
constexpr int kWeightCases = 1000;
constexpr double kWeightSumTol = 1e-12;
constexpr int kMetricMaxEntry = 5;
constexpr double kMetricTol = 1e-12;
constexpr double kFriedmanDominanceStat = 6.0;
constexpr double kFriedmanDominanceP = 0.0498;
constexpr double kFriedmanPTol = 1e-3;
constexpr double kRankSumTol = 1e-9;
constexpr double kSelfTrainSeconds = 600.0;
constexpr double kBenefitSlack = 0.005;
constexpr int kBenefitMinWins = 3;
constexpr double kBenefitFraction = 0.10;
constexpr double kSweepTol = 0.02;
constexpr double kSweepSeconds = 1800.0;

const std::vector<std::uint64_t> kSeeds = {1, 2, 3, 4, 5};

// Synthetic protocol shared by the experiment criteria.
SyntheticSpec protocol_spec() {
    SyntheticSpec s;
    s.labeled = 300;
    s.unlabeled = 2000;
    s.noise = 0.05;
    return s;
}

pipeline::RunConfig protocol_config(std::uint64_t seed) {
    pipeline::RunConfig cfg;
    cfg.embedding.max_features = 64;
    cfg.split_seed = seed;
    cfg.sse.seed = seed;
    cfg.stage2.seed = seed;
    return cfg;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---- 1
Outcome voting_oracle() {
    const auto start = Clock::now();
    Rng rng(20240101);
    int mismatches = 0;
    for (int c = 0; c < kVoteCases; ++c) {
        const std::size_t n = 3;
        std::vector<learners::ProbabilityRow> rows(n);
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) {
            // a share of exact ties and saturated rows
            const double u = rng.uniform();
            const double p = u < 0.05 ? 0.5 : u < 0.1 ? std::round(rng.uniform()) : rng.uniform();
            rows[i] = {1.0 - p, p};
            w[i] = rng.uniform() + 1e-3;
        }
        double total = 0.0;
        for (double x : w) total += x;
        for (double& x : w) x /= total;
        if (c % 97 == 0) w.assign(n, 1.0 / 3.0);
        const auto v = voting::weighted_vote(rows, voting::EnsembleWeights{w});

        double s = 0.0, ns = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += w[i] * rows[i].positive;
        for (std::size_t i = 0; i < n; ++i) ns += w[i] * rows[i].negative;
        const bool sale = s > ns;
        double conf = 0.0;
        for (std::size_t i = 0; i < n; ++i) conf += sale ? rows[i].positive : rows[i].negative;
        conf /= static_cast<double>(n);
        const bool same = v.tpp_sale == s && v.tpp_no_sale == ns &&
                          (v.pseudo_label == voting::Vote::sale) == sale && v.confidence == conf &&
                          voting::confident(v, 0.9) == (conf >= 0.9);
        if (!same) ++mismatches;
    }
    const double secs = seconds_since(start);
    return {mismatches == 0 && secs < kVoteSeconds,
            fmt("%d cases, %d mismatches, %.3f s (limit %.0f s)", kVoteCases, mismatches, secs, kVoteSeconds)};
}

// ---- 2
Outcome entropy_fixtures() {
    const double h09 = -(0.9 * std::log2(0.9) + 0.1 * std::log2(0.1));
    const double a = voting::shannon_entropy(std::vector<double>{0.5, 0.5});
    const double b = voting::shannon_entropy(std::vector<double>{1.0, 0.0});
    const double c = voting::shannon_entropy(std::vector<double>{0.9, 0.1});
    std::vector<learners::ProbabilityRow> rows = {{0.5, 0.5}, {0.9, 0.1}};
    // row 0 predicted correctly, row 1 wrong
    const auto st = voting::entropy_stats(rows, Labels{0, 1}, Labels{0, 0});
    const bool ok = std::abs(a - 1.0) <= kEntropyTol && std::abs(b) <= kEntropyTol && std::abs(c - h09) <= kEntropyTol &&
                    std::abs(c - 0.468996) <= kEntropyFixtureRounding && std::abs(st.mec - 1.0) <= kStatsTol &&
                    std::abs(st.mew - h09) <= kStatsTol && st.n_correct == 1 && st.n_wrong == 1;
    return {ok, fmt("H(.5,.5)=%.12f H(1,0)=%.12f H(.9,.1)=%.12f MEC=%.12f MEW=%.12f", a, b, c, st.mec, st.mew)};
}

// ---- 3
Outcome weight_normalization() {
    Rng rng(77);
    int bad = 0;
    double worst = 0.0;
    for (int c = 0; c < kWeightCases; ++c) {
        std::vector<voting::EntropyStats> stats(3);
        for (auto& s : stats) {
            const double u = rng.uniform();
            s.mec = u < 0.1 ? voting::kEntropyFloor : rng.uniform();
            s.mew = u > 0.9 ? voting::kEntropyFloor : rng.uniform();
            s.n_correct = 1 + rng.below(50);
            s.n_wrong = 1 + rng.below(50);
        }
        const auto w = voting::ensemble_weights(stats);
        double sum = 0.0;
        for (double x : w.w) {
            if (x < 0.0) ++bad;
            sum += x;
        }
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    std::vector<voting::EntropyStats> ratio(3);
    ratio[0].mec = 0.25, ratio[0].mew = 0.5;
    ratio[1].mec = 0.5, ratio[1].mew = 0.5;
    ratio[2].mec = 0.4, ratio[2].mew = 0.4;
    const auto w = voting::ensemble_weights(ratio);
    const bool exact = w.w == std::vector<double>{0.5, 0.25, 0.25};
    return {bad == 0 && worst <= kWeightSumTol && exact,
            fmt("%d cases, worst |sum-1| %.3g, negatives %d, ratios (2,1,1) -> (%.17g, %.17g, %.17g)", kWeightCases,
                worst, bad, w.w[0], w.w[1], w.w[2])};
}

// ---- 4
Outcome metric_oracle() {
    int cases = 0, bad = 0;
    for (int tp = 0; tp <= kMetricMaxEntry; ++tp)
        for (int tn = 0; tn <= kMetricMaxEntry; ++tn)
            for (int fp = 0; fp <= kMetricMaxEntry; ++fp)
                for (int fn = 0; fn <= kMetricMaxEntry; ++fn) {
                    ++cases;
                    // brute force: materialize predictions and recount
                    std::vector<std::pair<bool, bool>> samples;
                    for (int i = 0; i < tp; ++i) samples.emplace_back(true, true);
                    for (int i = 0; i < tn; ++i) samples.emplace_back(false, false);
                    for (int i = 0; i < fp; ++i) samples.emplace_back(false, true);
                    for (int i = 0; i < fn; ++i) samples.emplace_back(true, false);
                    eval::ConfusionMatrix cm;
                    for (auto [t, p] : samples) cm.add(t, p);
                    if (samples.empty()) {
                        bool threw = false;
                        try {
                            eval::metrics(cm);
                        } catch (const DomainError&) {
                            threw = true;
                        }
                        bad += !threw;
                        continue;
                    }
                    double ctp = 0, ctn = 0, cfp = 0, cfn = 0;
                    for (auto [t, p] : samples) (t ? (p ? ctp : cfn) : (p ? cfp : ctn)) += 1;
                    const double acc = (ctp + ctn) / static_cast<double>(samples.size());
                    const double prec = ctp + cfp == 0 ? 0.0 : ctp / (ctp + cfp);
                    const double rec = ctp + cfn == 0 ? 0.0 : ctp / (ctp + cfn);
                    const double f1 = prec + rec == 0 ? 0.0 : 2 * prec * rec / (prec + rec);
                    const double den = std::sqrt((ctp + cfp) * (ctp + cfn) * (ctn + cfp) * (ctn + cfn));
                    const double mcc = den == 0 ? 0.0 : (ctp * ctn - cfp * cfn) / den;
                    const double tmcc = (mcc + 1) / 2;
                    const auto m = eval::metrics(cm);
                    const bool ok = std::abs(m.accuracy - acc) <= kMetricTol && std::abs(m.f1 - f1) <= kMetricTol &&
                                    std::abs(m.mcc - mcc) <= kMetricTol && std::abs(m.tmcc - tmcc) <= kMetricTol &&
                                    m.tmcc == (m.mcc + 1.0) / 2.0;
                    bad += !ok;
                }
    return {cases == 1296 && bad == 0, fmt("%d matrices, %d disagreements", cases, bad)};
}

// ---- 5
Outcome friedman_fixtures() {
    const auto tie = eval::friedman_rank(std::vector<std::vector<double>>(5, std::vector<double>(4, 0.7)));
    const auto dom = eval::friedman_rank({{0.9, 0.8, 0.7}, {0.95, 0.6, 0.5}, {0.7, 0.65, 0.1}});
    Rng rng(13);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<std::vector<double>> s(30, std::vector<double>(13));
        for (auto& row : s)
            for (auto& v : row) v = rep % 2 ? std::round(rng.uniform() * 4) / 4 : rng.uniform();
        const auto r = eval::friedman_rank(s);
        double sum = 0.0;
        for (double m : r.mean_ranks) sum += m;
        worst = std::max(worst, std::abs(sum - 91.0));
    }
    const bool tie_ok = tie.statistic == 0.0 && tie.p_value == 1.0;
    const bool dom_ok = std::abs(dom.statistic - kFriedmanDominanceStat) <= 1e-12 &&
                        std::abs(dom.p_value - kFriedmanDominanceP) <= kFriedmanPTol &&
                        dom.mean_ranks == std::vector<double>{1, 2, 3};
    return {tie_ok && dom_ok && worst <= kRankSumTol,
            fmt("tie stat %.3g p %.3g; dominance stat %.12g p %.6f; 30x13 worst |sum-91| %.3g", tie.statistic,
                tie.p_value, dom.statistic, dom.p_value, worst)};
}

// ---- 6
Outcome selftrain_contracts() {
    const auto start = Clock::now();
    std::vector<std::string> problems;
    std::string summary;
    for (auto seed : kSeeds) {
        const auto docs = testing::synthetic_docs(protocol_spec(), seed);
        const auto cfg = protocol_config(seed);
        const auto data = testing::stage1_data(docs, split_labeled(docs, cfg.ratios, seed), cfg.embedding.max_features);
        const auto m = selftrain::train_sse(data.train, data.validation, data.unlabeled, cfg.sse);
        std::size_t prev = data.unlabeled.x.rows(), added = 0;
        for (const auto& h : m.history) {
            if (h.pool_remaining > prev) problems.push_back(fmt("seed %d: pool grew", int(seed)));
            if (!h.additions.empty() && h.pool_remaining >= prev)
                problems.push_back(fmt("seed %d: additions without shrink", int(seed)));
            if (prev - h.pool_remaining != h.additions.size())
                problems.push_back(fmt("seed %d: pool delta != additions", int(seed)));
            for (const auto& a : h.additions)
                if (a.confidence < cfg.sse.theta) problems.push_back(fmt("seed %d: addition below theta", int(seed)));
            added += h.additions.size();
            prev = h.pool_remaining;
        }
        if (m.history.empty() || m.history.size() > static_cast<std::size_t>(cfg.sse.max_iterations))
            problems.push_back(fmt("seed %d: %zu iterations", int(seed), m.history.size()));
        if (m.final_train_size != data.train.x.rows() + added)
            problems.push_back(fmt("seed %d: final pool size mismatch", int(seed)));

        const selftrain::UnlabeledSet empty{Matrix(0, data.train.x.cols()), {}};
        const auto a = selftrain::train_sse(data.train, data.validation, empty, cfg.sse);
        const auto b = selftrain::train_supervised_ensemble(data.train, data.validation, cfg.sse);
        std::size_t diff = 0;
        for (const auto* x : {&data.test.x, &data.unlabeled.x})
            for (std::size_t r = 0; r < x->rows(); ++r) {
                const auto va = a.vote(x->row(r)), vb = b.vote(x->row(r));
                diff += !(va.pseudo_label == vb.pseudo_label && va.tpp_sale == vb.tpp_sale &&
                          va.confidence == vb.confidence);
            }
        if (a.history.size() != 1 || diff != 0)
            problems.push_back(fmt("seed %d: empty-pool run differs from supervised ensemble (%zu rows)", int(seed), diff));
        summary += fmt(" seed %d: %zu iters %s +%zu;", int(seed), m.history.size(),
                       selftrain::to_string(m.termination).c_str(), added);
    }
    const double secs = seconds_since(start);
    for (const auto& p : problems) std::cerr << "  " << p << '\n';
    return {problems.empty() && secs < kSelfTrainSeconds,
            fmt("%zu violations, %.0f s (limit %.0f s);", problems.size(), secs, kSelfTrainSeconds) + summary};
}

// ---- 7
Outcome semi_supervised_benefit() {
    double sum_sse = 0.0, sum_gbdt = 0.0;
    int wins = 0;
    std::string detail;
    for (auto seed : kSeeds) {
        const auto docs = testing::synthetic_docs(protocol_spec(), seed);
        auto cfg = protocol_config(seed);
        auto split = split_labeled(docs, cfg.ratios, seed);
        std::vector<Document> test;
        const std::set<std::string> test_ids(split.test.begin(), split.test.end());
        for (const auto& d : docs)
            if (test_ids.contains(d.id)) test.push_back(d);
        split.train = pipeline::subsample_labeled(docs, split.train, kBenefitFraction, seed);
        cfg.stage1_mode = pipeline::Stage1Mode::sse;
        const double f_sse = pipeline::evaluate(pipeline::train_pipeline(docs, split, cfg), test).macro.f1;
        cfg.stage1_mode = pipeline::Stage1Mode::gbdt;
        const double f_gbdt = pipeline::evaluate(pipeline::train_pipeline(docs, split, cfg), test).macro.f1;
        sum_sse += f_sse;
        sum_gbdt += f_gbdt;
        wins += f_sse >= f_gbdt;
        std::cerr << fmt("  seed %d: %zu labeled train docs, macro-F1 sse %.4f gbdt %.4f\n", int(seed),
                         split.train.size(), f_sse, f_gbdt);
    }
    const double n = static_cast<double>(kSeeds.size());
    const double mean_sse = sum_sse / n, mean_gbdt = sum_gbdt / n;
    return {mean_sse >= mean_gbdt - kBenefitSlack && wins >= kBenefitMinWins,
            fmt("mean macro-F1 sse %.4f vs gbdt %.4f (slack %.3f), sse >= gbdt in %d/5 seeds (need %d)", mean_sse,
                mean_gbdt, kBenefitSlack, wins, kBenefitMinWins)};
}

// ---- 8
Outcome sweep_shape() {
    const auto start = Clock::now();
    const auto docs = testing::synthetic_docs(protocol_spec(), 7);
    const auto cfg = protocol_config(7);
    const auto report = pipeline::labeled_fraction_sweep(docs, {0.05, 0.25, 0.5, 1.0}, kSeeds, cfg);
    const double secs = seconds_since(start);
    bool ok = true;
    std::string means;
    for (std::size_t i = 0; i < report.summary.size(); ++i) {
        const auto& s = report.summary[i];
        means += fmt(" %.2f:%.4f", s.fraction, s.mean.f1);
        if (s.completed != kSeeds.size()) ok = false;
        if (i > 0 && s.mean.f1 < report.summary[i - 1].mean.f1 - kSweepTol) ok = false;
    }
    for (const auto& c : report.cells)
        if (!c.macro) std::cerr << fmt("  skipped %.2f seed %d: %s\n", c.fraction, int(c.seed), c.skip_reason.c_str());
    std::cerr << pipeline::sweep_csv(report);
    return {ok && secs < kSweepSeconds,
            fmt("mean macro-F1 by fraction%s (tol %.2f), %.0f s (limit %.0f s)", means.c_str(), kSweepTol, secs,
                kSweepSeconds)};
}

// ---- 9
Outcome feature_golden() {
    const fs::path dir = SSE_FIXTURE_DIR;
    const auto docs = read_corpus(dir / "feature_docs.jsonl");
    const auto produced = pipeline::manual_features_jsonl(docs);
    const auto golden = io::read_file(dir / "features_golden.jsonl");
    int bad_sums = 0;
    for (const auto& d : docs) {
        const auto p = features::pattern_item_features(d.raw_text);
        double sum = 0.0;
        for (double w : p.weights) sum += w;
        if (!(sum == 0.0 || std::abs(sum - 1.0) <= 1e-12)) ++bad_sums;
    }
    return {produced == golden && bad_sums == 0,
            fmt("%zu documents, golden %s, weight sums off %d", docs.size(),
                produced == golden ? "byte-identical" : "DIFFERS", bad_sums)};
}

// ---- 10
std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = io::read_file(e.path());
    return files;
}

Outcome determinism() {
    const fs::path work = fs::temp_directory_path() / fmt("sse-acceptance-%d", int(::getpid()));
    fs::remove_all(work);
    fs::create_directories(work);
    const std::string cli = SSE_CLI_PATH;
    auto run = [&](const std::string& args) {
        const auto cmd = cli + " " + args + " 2>>" + (work / "cli.log").string();
        return std::system(cmd.c_str());
    };
    int rc = run("synth --out " + (work / "corpus.jsonl").string() + " --labeled 150 --unlabeled 600 --noise 0.05 --seed 11");
    std::ofstream(work / "run.json") << R"({"corpus": "corpus.jsonl", "output_dir": "bundle",
        "embedding": {"mode": "tfidf", "max_features": 48},
        "split": {"train": 0.6, "validation": 0.2, "test": 0.2, "seed": 11},
        "stage1": {"seed": 3}, "stage2": {"seed": 3}})";
    rc |= run("train --config " + (work / "run.json").string() + " --output-dir " + (work / "a").string());
    rc |= run("train --config " + (work / "run.json").string() + " --output-dir " + (work / "b").string());
    if (rc != 0) return {false, "cli run failed, see " + (work / "cli.log").string()};
    const auto a = snapshot(work / "a"), b = snapshot(work / "b");
    std::size_t differing = 0;
    for (const auto& [name, content] : a)
        if (!b.contains(name) || b.at(name) != content) ++differing;
    const bool ok = a.size() == b.size() && differing == 0 && a.contains("training_log.jsonl");
    const auto detail = fmt("%zu files per bundle, %zu differ", a.size(), differing);
    if (ok) fs::remove_all(work);
    return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--only" && i + 1 < argc) only.insert(std::atoi(argv[++i]));
        else {
            std::cerr << "usage: acceptance [--only N]...\n";
            return 2;
        }
    }
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"voting-math oracle", voting_oracle},
        {"entropy fixtures", entropy_fixtures},
        {"weight normalization", weight_normalization},
        {"metric oracle", metric_oracle},
        {"friedman fixtures", friedman_fixtures},
        {"self-training contracts", selftrain_contracts},
        {"semi-supervised benefit", semi_supervised_benefit},
        {"sweep shape", sweep_shape},
        {"feature golden files", feature_golden},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.contains(id)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << "criterion " << id << " " << criteria[i].first << ": " << (o.pass ? "PASS" : "FAIL") << " | "
                  << o.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
