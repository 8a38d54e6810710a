#include "sse/selftrain.hpp"

#include <algorithm>
#include <numeric>

#include "sse/error.hpp"
#include "sse/rng.hpp"

namespace sse::selftrain {

using nlohmann::json;
using voting::EntropyStats;

std::string to_string(Termination t) {
    switch (t) {
        case Termination::max_iterations: return "max_iterations";
        case Termination::pool_exhausted: return "pool_exhausted";
        case Termination::no_confident: return "no_confident";
    }
    return "max_iterations";
}

std::string to_string(Category c) {
    switch (c) {
        case Category::drug: return "drug";
        case Category::weapon: return "weapon";
        case Category::credential: return "credential";
    }
    return "drug";
}

bool category_flag(const LabelSet& l, Category c) {
    switch (c) {
        case Category::drug: return l.drug;
        case Category::weapon: return l.weapon;
        case Category::credential: return l.credential;
    }
    return false;
}

json iteration_to_json(const IterationLog& log) {
    json mec = json::array(), mew = json::array(), additions = json::array();
    for (const auto& s : log.stats) {
        mec.push_back(s.mec);
        mew.push_back(s.mew);
    }
    for (const auto& a : log.additions)
        additions.push_back({{"id", a.id}, {"label", a.label}, {"confidence", a.confidence}});
    json j = {{"stage", log.stage},
              {"iteration", log.iteration},
              {"mec", mec},
              {"mew", mew},
              {"train_size", log.train_size},
              {"added", log.additions.size()},
              {"additions", additions},
              {"pool_remaining", log.pool_remaining}};
    if (!log.weights.empty()) j["weights"] = log.weights;
    return j;
}

LearnerSpec seeded(const LearnerSpec& spec, std::uint64_t seed, std::size_t index) {
    LearnerSpec s = spec;
    s.seed = mix_seed(seed, index) ^ spec.seed;
    return s;
}

voting::VoteResult SseModel::vote(std::span<const double> x) const {
    std::vector<learners::ProbabilityRow> rows;
    rows.reserve(learners.size());
    for (const auto& l : learners) rows.push_back(learners::predict_proba(l, x));
    return voting::weighted_vote(rows, weights);
}

namespace {

struct Pool {
    Matrix x;
    Labels y;
};

std::vector<TrainedLearner> fit_all(const SseConfig& cfg, const Pool& pool, int iteration) {
    std::vector<TrainedLearner> out;
    for (std::size_t i = 0; i < cfg.learner_specs.size(); ++i) {
        try {
            out.push_back(learners::fit(seeded(cfg.learner_specs[i], cfg.seed, i), pool.x, pool.y));
        } catch (const FitError& e) {
            throw FitError("self-training iteration " + std::to_string(iteration) + ": " + e.what());
        }
    }
    return out;
}

EntropyStats validation_stats(const TrainedLearner& learner, const LabeledSet& validation) {
    const auto rows = learners::predict_proba(learner, validation.x);
    Labels pred(rows.size());
    std::transform(rows.begin(), rows.end(), pred.begin(), voting::predicted_label);
    return voting::entropy_stats(rows, validation.y, pred);
}

std::vector<EntropyStats> validation_stats(const std::vector<TrainedLearner>& learners, const LabeledSet& validation) {
    std::vector<EntropyStats> stats;
    for (const auto& l : learners) stats.push_back(validation_stats(l, validation));
    return stats;
}

void check_sets(const LabeledSet& train, const LabeledSet& validation, const UnlabeledSet& unlabeled) {
    if (train.x.rows() != train.y.size()) throw ShapeError("train rows and labels differ");
    if (validation.x.rows() != validation.y.size()) throw ShapeError("validation rows and labels differ");
    if (validation.x.rows() == 0) throw ShapeError("validation set is empty");
    if (validation.x.cols() != train.x.cols()) throw ShapeError("validation width differs from train");
    if (unlabeled.x.rows() > 0 && unlabeled.x.cols() != train.x.cols())
        throw ShapeError("unlabeled width differs from train");
    if (unlabeled.ids.size() != unlabeled.x.rows()) throw ShapeError("unlabeled rows and ids differ");
}

}  // namespace

SseModel train_supervised_ensemble(const LabeledSet& train, const LabeledSet& validation, const SseConfig& cfg) {
    check_sets(train, validation, {});
    SseModel m;
    m.learners = fit_all(cfg, {train.x, train.y}, 1);
    const auto stats = validation_stats(m.learners, validation);
    m.weights = voting::ensemble_weights(stats);
    m.final_train_size = train.x.rows();
    return m;
}

SseModel train_sse(const LabeledSet& train, const LabeledSet& validation, const UnlabeledSet& unlabeled,
                   const SseConfig& cfg) {
    check_sets(train, validation, unlabeled);
    if (!(cfg.theta > 0.0 && cfg.theta <= 1.0)) throw ConfigError("theta must lie in (0, 1]");
    if (cfg.max_iterations < 1) throw ConfigError("max_iterations must be positive");

    Pool pool{train.x, train.y};
    std::vector<std::size_t> remaining(unlabeled.x.rows());
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});

    SseModel model;
    bool fitted_on_pool = false;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        model.learners = fit_all(cfg, pool, it);
        fitted_on_pool = true;
        IterationLog log;
        log.stage = "sse";
        log.iteration = it;
        log.stats = validation_stats(model.learners, validation);
        model.weights = voting::ensemble_weights(log.stats);
        log.weights = model.weights.w;
        log.train_size = pool.x.rows();

        if (remaining.empty()) {
            model.termination = Termination::pool_exhausted;
            model.history.push_back(std::move(log));
            break;
        }

        std::vector<std::size_t> keep;
        for (auto r : remaining) {
            const auto v = model.vote(unlabeled.x.row(r));
            if (voting::confident(v, cfg.theta)) {
                const int label = v.pseudo_label == voting::Vote::sale ? 1 : 0;
                pool.x.append_row(unlabeled.x.row(r));
                pool.y.push_back(label);
                log.additions.push_back({unlabeled.ids[r], label, v.confidence});
            } else {
                keep.push_back(r);
            }
        }
        remaining = std::move(keep);
        log.pool_remaining = remaining.size();
        const bool added = !log.additions.empty();
        model.history.push_back(std::move(log));

        if (!added) {
            model.termination = Termination::no_confident;
            break;
        }
        fitted_on_pool = false;
        if (remaining.empty()) {
            model.termination = Termination::pool_exhausted;
            break;
        }
        if (it == cfg.max_iterations) model.termination = Termination::max_iterations;
    }
    if (!fitted_on_pool) {
        model.learners = fit_all(cfg, pool, static_cast<int>(model.history.size()) + 1);
        model.weights = voting::ensemble_weights(validation_stats(model.learners, validation));
    }
    model.final_train_size = pool.x.rows();
    return model;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stage2_split(const Labels& y, double validation_fraction,
                                                                         std::uint64_t seed) {
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
        throw ConfigError("stage-2 validation fraction must lie in [0, 1)");
    Rng rng(seed);
    std::vector<std::size_t> train, val;
    for (int cls : {0, 1}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == cls) members.push_back(i);
        rng.shuffle(std::span(members));
        const auto nv = static_cast<std::size_t>(validation_fraction * static_cast<double>(members.size()) + 1e-9);
        val.insert(val.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(nv));
        train.insert(train.end(), members.begin() + static_cast<std::ptrdiff_t>(nv), members.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(val.begin(), val.end());
    return {train, val};
}

std::array<bool, 3> stage2_admission(const std::array<double, 3>& probabilities, const Stage2Config& cfg) {
    std::array<bool, 3> out{};
    for (std::size_t k = 0; k < 3; ++k) out[k] = probabilities[k] >= cfg.categories[k].theta;
    return out;
}

CategoryModels train_stage2(const AnnotatedSet& labeled, const UnlabeledSet& sale_pool, const Stage2Config& cfg) {
    if (labeled.x.rows() != labeled.labels.size()) throw ShapeError("stage-2 rows and labels differ");
    if (sale_pool.x.rows() > 0 && sale_pool.x.cols() != labeled.x.cols())
        throw ShapeError("sale pool width differs from labeled rows");
    if (sale_pool.ids.size() != sale_pool.x.rows()) throw ShapeError("sale pool rows and ids differ");

    CategoryModels out;
    for (auto category : kCategories) {
        const auto k = static_cast<std::size_t>(category);
        const auto& cc = cfg.categories[k];
        if (!(cc.theta > 0.0 && cc.theta <= 1.0)) throw ConfigError("category theta must lie in (0, 1]");
        if (cc.max_iterations < 1) throw ConfigError("category max_iterations must be positive");

        Labels y(labeled.labels.size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = category_flag(labeled.labels[i], category) ? 1 : 0;
        const auto split_seed = cfg.seed + k;
        const auto [tr, va] = stage2_split(y, cfg.validation_fraction, split_seed);

        Pool pool{labeled.x.select_rows(tr), {}};
        for (auto i : tr) pool.y.push_back(y[i]);
        LabeledSet validation{labeled.x.select_rows(va), {}, {}};
        for (auto i : va) validation.y.push_back(y[i]);
        const auto spec = seeded(cc.learner, split_seed, 0);

        std::vector<std::size_t> remaining(sale_pool.x.rows());
        std::iota(remaining.begin(), remaining.end(), std::size_t{0});
        std::vector<IterationLog> history;
        Termination termination = Termination::max_iterations;
        std::optional<TrainedLearner> learner;
        bool fitted_on_pool = false;
        auto fit_pool = [&](int it) {
            try {
                learner.emplace(learners::fit(spec, pool.x, pool.y));
            } catch (const FitError& e) {
                throw FitError(to_string(category) + " self-training iteration " + std::to_string(it) + ": " +
                               e.what());
            }
        };

        for (int it = 1; it <= cc.max_iterations; ++it) {
            fit_pool(it);
            fitted_on_pool = true;
            IterationLog log;
            log.stage = to_string(category);
            log.iteration = it;
            if (validation.x.rows() > 0) log.stats.push_back(validation_stats(*learner, validation));
            log.train_size = pool.x.rows();
            if (remaining.empty()) {
                termination = Termination::pool_exhausted;
                history.push_back(std::move(log));
                break;
            }
            std::vector<std::size_t> keep;
            for (auto r : remaining) {
                const double p = learner->positive_probability(sale_pool.x.row(r));
                if (p >= cc.theta) {
                    pool.x.append_row(sale_pool.x.row(r));
                    pool.y.push_back(1);
                    log.additions.push_back({sale_pool.ids[r], 1, p});
                } else {
                    keep.push_back(r);
                }
            }
            remaining = std::move(keep);
            log.pool_remaining = remaining.size();
            const bool added = !log.additions.empty();
            history.push_back(std::move(log));
            if (!added) {
                termination = Termination::no_confident;
                break;
            }
            fitted_on_pool = false;
            if (remaining.empty()) {
                termination = Termination::pool_exhausted;
                break;
            }
        }
        if (!fitted_on_pool) fit_pool(static_cast<int>(history.size()) + 1);
        out.models.push_back(
            CategoryModel{category, std::move(*learner), cc.theta, cc.max_iterations, std::move(history), termination});
    }
    return out;
}

json prediction_to_json(const PredictionRecord& r) {
    return {{"id", r.id},
            {"sale", r.sale},
            {"sale_confidence", r.sale_confidence},
            {"tpp_sale", r.tpp_sale},
            {"drug", r.drug},
            {"weapon", r.weapon},
            {"credential", r.credential},
            {"p_drug", r.p_drug},
            {"p_weapon", r.p_weapon},
            {"p_credential", r.p_credential},
            {"stage2_evaluated", r.stage2_evaluated}};
}

PredictionRecord predict(const SseModel& stage1, const CategoryModels& stage2, const std::string& id,
                         std::span<const double> x) {
    PredictionRecord rec;
    rec.id = id;
    const auto v = stage1.vote(x);
    rec.sale = v.pseudo_label == voting::Vote::sale;
    rec.sale_confidence = v.confidence;
    rec.tpp_sale = v.tpp_sale;
    if (!rec.sale) return rec;
    rec.stage2_evaluated = true;
    rec.p_drug = stage2.at(Category::drug).learner.positive_probability(x);
    rec.p_weapon = stage2.at(Category::weapon).learner.positive_probability(x);
    rec.p_credential = stage2.at(Category::credential).learner.positive_probability(x);
    rec.drug = rec.p_drug >= kCategoryThreshold;
    rec.weapon = rec.p_weapon >= kCategoryThreshold;
    rec.credential = rec.p_credential >= kCategoryThreshold;
    return rec;
}

}  // namespace sse::selftrain
