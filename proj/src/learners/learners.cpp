#include "sse/learners.hpp"

#include <algorithm>
#include <cmath>

#include "sse/error.hpp"

namespace sse::learners {

using nlohmann::json;

std::string to_string(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::gbdt: return "gbdt";
        case LearnerKind::random_forest: return "random_forest";
        case LearnerKind::svm: return "svm";
    }
    return "gbdt";
}

namespace presets {

namespace {
LearnerSpec gbdt(double lr, int trees, int depth, double subsample, std::uint64_t seed) {
    GbdtParams p;
    p.learning_rate = lr;
    p.n_estimators = trees;
    p.max_depth = depth;
    p.subsample = subsample;
    p.l1 = 0.01;
    p.l2 = 0.01;
    return {p, seed};
}

// category learners see a pool that only ever gains positives; balancing keeps the prior from drifting
LearnerSpec category_gbdt(double lr, int trees, int depth, double subsample, std::uint64_t seed) {
    auto s = gbdt(lr, trees, depth, subsample, seed);
    s.balance_classes = true;
    return s;
}
}  // namespace

LearnerSpec stage1_gbdt(std::uint64_t seed) { return gbdt(0.1, 400, 5, 0.7, seed); }
LearnerSpec stage1_forest(std::uint64_t seed) { return {ForestParams{400, 5, MaxFeatures::sqrt, true}, seed}; }
LearnerSpec stage1_svm(std::uint64_t seed) { return {SvmParams{}, seed}; }
LearnerSpec drug_gbdt(std::uint64_t seed) { return category_gbdt(0.1, 300, 5, 0.6, seed); }
LearnerSpec weapon_gbdt(std::uint64_t seed) { return category_gbdt(0.05, 300, 5, 0.6, seed); }
LearnerSpec credential_gbdt(std::uint64_t seed) { return category_gbdt(0.1, 500, 7, 0.7, seed); }

}  // namespace presets

namespace {

template <typename T>
bool on_grid(T v, std::initializer_list<T> grid) {
    return std::any_of(grid.begin(), grid.end(), [&](T g) { return std::abs(static_cast<double>(v - g)) < 1e-12; });
}

}  // namespace

std::vector<std::string> out_of_range(const LearnerSpec& spec) {
    std::vector<std::string> notes;
    auto check = [&](bool ok, const std::string& what) {
        if (!ok) notes.push_back(what);
    };
    if (const auto* g = std::get_if<GbdtParams>(&spec.params)) {
        check(on_grid(g->learning_rate, {0.01, 0.05, 0.1, 0.2}), "gbdt learning_rate");
        check(on_grid(g->n_estimators, {100, 200, 300, 400, 500}), "gbdt n_estimators");
        check(on_grid(g->max_depth, {3, 5, 7, 10}), "gbdt max_depth");
        check(on_grid(g->subsample, {0.6, 0.7, 0.8}), "gbdt subsample");
        check(on_grid(g->l1, {0.01, 0.05, 0.1}), "gbdt l1");
        check(on_grid(g->l2, {0.01, 0.05, 0.1}), "gbdt l2");
    } else if (const auto* f = std::get_if<ForestParams>(&spec.params)) {
        check(on_grid(f->n_estimators, {100, 200, 300, 400, 500}), "random_forest n_estimators");
        check(on_grid(f->max_depth, {3, 5, 7, 10}), "random_forest max_depth");
    } else if (const auto* s = std::get_if<SvmParams>(&spec.params)) {
        check(on_grid(s->c, {0.001, 0.01, 0.1, 1.0, 10.0}), "svm c");
        check(on_grid(s->gamma, {0.001, 0.01, 0.1, 1.0, 10.0}), "svm gamma");
    }
    return notes;
}

double TrainedLearner::positive_probability(std::span<const double> x) const {
    if (x.size() != feature_dim_)
        throw ShapeError("expected " + std::to_string(feature_dim_) + " features, got " + std::to_string(x.size()));
    const double p = std::visit(
        [&](const auto& m) -> double {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, GbdtModel>) {
                const double z = m.margin(x);
                return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
            } else {
                return m.positive_probability(x);
            }
        },
        state_);
    return std::clamp(p, 0.0, 1.0);
}

TrainedLearner fit(const LearnerSpec& spec, const Matrix& x, const Labels& y) {
    if (x.rows() != y.size())
        throw ShapeError("fit: " + std::to_string(x.rows()) + " rows but " + std::to_string(y.size()) + " labels");
    if (y.size() < 2) throw FitError("fit: need at least two samples");
    const auto pos = std::count(y.begin(), y.end(), 1);
    if (pos + std::count(y.begin(), y.end(), 0) != static_cast<std::ptrdiff_t>(y.size()))
        throw FitError("fit: labels must be 0 or 1");
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(y.size()))
        throw FitError("fit: training labels contain a single class");

    const double n = static_cast<double>(y.size());
    const double wpos = spec.balance_classes ? n / (2.0 * static_cast<double>(pos)) : 1.0;
    const double wneg = spec.balance_classes ? n / (2.0 * (n - static_cast<double>(pos))) : 1.0;
    std::vector<double> weights(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) weights[i] = y[i] ? wpos : wneg;

    TrainedLearner::State state = std::visit(
        [&](const auto& p) -> TrainedLearner::State {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, GbdtParams>) return fit_gbdt(x, y, weights, p, spec.seed);
            else if constexpr (std::is_same_v<P, ForestParams>) return fit_forest(x, y, weights, p, spec.seed);
            else {
                const double cw[2] = {wneg, wpos};
                return fit_svm(x, y, cw, p, spec.seed);
            }
        },
        spec.params);
    return TrainedLearner(spec, x.cols(), std::move(state));
}

ProbabilityRow predict_proba(const TrainedLearner& model, std::span<const double> x) {
    return ProbabilityRow::from_positive(model.positive_probability(x));
}

std::vector<ProbabilityRow> predict_proba(const TrainedLearner& model, const Matrix& x) {
    if (x.cols() != model.feature_dim() && x.rows() > 0)
        throw ShapeError("predict: expected " + std::to_string(model.feature_dim()) + " features, got " +
                         std::to_string(x.cols()));
    std::vector<ProbabilityRow> out;
    out.reserve(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(predict_proba(model, x.row(i)));
    return out;
}

json spec_to_json(const LearnerSpec& spec) {
    json j;
    j["kind"] = to_string(spec.kind());
    j["seed"] = spec.seed;
    j["balance_classes"] = spec.balance_classes;
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, GbdtParams>) {
                j["learning_rate"] = p.learning_rate;
                j["n_estimators"] = p.n_estimators;
                j["max_depth"] = p.max_depth;
                j["subsample"] = p.subsample;
                j["l1"] = p.l1;
                j["l2"] = p.l2;
                j["min_child_weight"] = p.min_child_weight;
            } else if constexpr (std::is_same_v<P, ForestParams>) {
                j["n_estimators"] = p.n_estimators;
                j["max_depth"] = p.max_depth;
                j["max_features"] = p.max_features == MaxFeatures::sqrt ? "sqrt" : "all";
                j["bootstrap"] = p.bootstrap;
                j["criterion"] = "gini";
            } else {
                j["c"] = p.c;
                j["gamma"] = p.gamma;
                j["kernel"] = "rbf";
                j["tolerance"] = p.tolerance;
                j["max_iterations"] = p.max_iterations;
                j["calibration_folds"] = p.calibration_folds;
                j["scaling"] = to_string(p.scaling);
            }
        },
        spec.params);
    return j;
}

namespace {

LearnerSpec default_for(const std::string& kind) {
    if (kind == "gbdt") return presets::stage1_gbdt();
    if (kind == "random_forest") return presets::stage1_forest();
    if (kind == "svm") return presets::stage1_svm();
    throw ConfigError("unknown learner kind '" + kind + "'");
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

LearnerSpec spec_from_json(const json& j, const LearnerSpec& base) {
    try {
        LearnerSpec spec = base;
        if (auto it = j.find("kind"); it != j.end()) {
            const auto kind = it->get<std::string>();
            if (kind != to_string(base.kind())) spec = default_for(kind);
            spec.seed = base.seed;
        }
        read_opt(j, "seed", spec.seed);
        read_opt(j, "balance_classes", spec.balance_classes);
        std::visit(
            [&](auto& p) {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, GbdtParams>) {
                    read_opt(j, "learning_rate", p.learning_rate);
                    read_opt(j, "n_estimators", p.n_estimators);
                    read_opt(j, "max_depth", p.max_depth);
                    read_opt(j, "subsample", p.subsample);
                    read_opt(j, "l1", p.l1);
                    read_opt(j, "l2", p.l2);
                    read_opt(j, "min_child_weight", p.min_child_weight);
                } else if constexpr (std::is_same_v<P, ForestParams>) {
                    read_opt(j, "n_estimators", p.n_estimators);
                    read_opt(j, "max_depth", p.max_depth);
                    if (auto mf = j.find("max_features"); mf != j.end()) {
                        const auto v = mf->get<std::string>();
                        if (v == "sqrt" || v == "auto") p.max_features = MaxFeatures::sqrt;
                        else if (v == "all") p.max_features = MaxFeatures::all;
                        else throw ConfigError("unknown max_features '" + v + "'");
                    }
                    read_opt(j, "bootstrap", p.bootstrap);
                    if (auto c = j.find("criterion"); c != j.end() && c->get<std::string>() != "gini")
                        throw ConfigError("only the gini split criterion is supported");
                } else {
                    read_opt(j, "c", p.c);
                    read_opt(j, "gamma", p.gamma);
                    read_opt(j, "tolerance", p.tolerance);
                    read_opt(j, "max_iterations", p.max_iterations);
                    read_opt(j, "calibration_folds", p.calibration_folds);
                    if (auto sc = j.find("scaling"); sc != j.end()) p.scaling = svm_scaling_from_string(sc->get<std::string>());
                    if (auto k = j.find("kernel"); k != j.end() && k->get<std::string>() != "rbf")
                        throw ConfigError("only the rbf kernel is supported");
                }
            },
            spec.params);
        return spec;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid learner spec: ") + e.what());
    }
}

LearnerSpec spec_from_json(const json& j) {
    if (!j.contains("kind")) throw ConfigError("learner spec needs a 'kind'");
    return spec_from_json(j, default_for(j.at("kind").get<std::string>()));
}

json learner_to_json(const TrainedLearner& model) {
    json state = std::visit(
        [](const auto& m) -> json {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, GbdtModel>) return gbdt_to_json(m);
            else if constexpr (std::is_same_v<M, ForestModel>) return forest_to_json(m);
            else return svm_to_json(m);
        },
        model.state());
    return {{"format", "sse-learner"},
            {"version", 1},
            {"spec", spec_to_json(model.spec())},
            {"feature_dim", model.feature_dim()},
            {"state", std::move(state)}};
}

TrainedLearner learner_from_json(const json& j) {
    try {
        if (j.value("format", "") != "sse-learner") throw FormatError("not a learner blob");
        auto spec = spec_from_json(j.at("spec"));
        const auto dim = j.at("feature_dim").get<std::size_t>();
        const auto& s = j.at("state");
        TrainedLearner::State state;
        switch (spec.kind()) {
            case LearnerKind::gbdt: state = gbdt_from_json(s); break;
            case LearnerKind::random_forest: state = forest_from_json(s); break;
            case LearnerKind::svm: state = svm_from_json(s); break;
        }
        return TrainedLearner(std::move(spec), dim, std::move(state));
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid learner blob: ") + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(std::string("invalid learner blob: ") + e.what());
    }
}

}  // namespace sse::learners
