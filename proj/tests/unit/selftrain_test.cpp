#include <doctest.h>

#include <algorithm>
#include <set>

#include "helpers.hpp"
#include "sse/error.hpp"
#include "sse/selftrain.hpp"

using namespace sse;
using namespace sse::selftrain;
using namespace sse::unit;

namespace {

SseConfig small_config() {
    SseConfig cfg;
    cfg.learner_specs = {small_gbdt(), small_forest(), small_svm()};
    cfg.seed = 3;
    return cfg;
}

LabeledSet labeled(const Blobs& b) { return {b.x, b.y, {}}; }

UnlabeledSet unlabeled(const Blobs& b) {
    UnlabeledSet u{b.x, {}};
    for (std::size_t i = 0; i < b.y.size(); ++i) u.ids.push_back("u" + std::to_string(i));
    return u;
}

SseModel constant_stage1(double p, std::size_t dim) {
    SseModel m;
    for (int i = 0; i < 3; ++i) m.learners.push_back(constant_learner(p, dim));
    m.weights = voting::EnsembleWeights::uniform(3);
    return m;
}

CategoryModels constant_stage2(std::array<double, 3> p, std::size_t dim) {
    CategoryModels out;
    for (auto c : kCategories) {
        out.models.push_back({.category = c, .learner = constant_learner(p[static_cast<std::size_t>(c)], dim),
                              .history = {}});
    }
    return out;
}

}  // namespace

TEST_CASE("theta of one stops after the first iteration") {
    auto cfg = small_config();
    cfg.theta = 1.0;
    const auto m = train_sse(labeled(blobs(40, 3, 0.3, 1)), labeled(blobs(20, 3, 0.3, 2)),
                             unlabeled(blobs(30, 3, 0.3, 3)), cfg);
    CHECK(m.history.size() == 1);
    CHECK(m.termination == Termination::no_confident);
    CHECK(m.history[0].additions.empty());
    CHECK(m.final_train_size == 40);
}

TEST_CASE("an empty pool gives the supervised ensemble") {
    const auto cfg = small_config();
    const auto train = labeled(blobs(40, 3, 0.8, 4));
    const auto val = labeled(blobs(20, 3, 0.8, 5));
    const auto m = train_sse(train, val, UnlabeledSet{Matrix(0, 3), {}}, cfg);
    const auto s = train_supervised_ensemble(train, val, cfg);
    CHECK(m.history.size() == 1);
    CHECK(m.termination == Termination::pool_exhausted);
    CHECK(m.learners == s.learners);
    CHECK(m.weights == s.weights);
}

TEST_CASE("self-training is reproducible and only moves confident rows") {
    auto cfg = small_config();
    cfg.theta = 0.8;
    cfg.max_iterations = 4;
    const auto train = labeled(blobs(30, 3, 1.0, 6));
    const auto val = labeled(blobs(20, 3, 1.0, 7));
    const auto pool = unlabeled(blobs(60, 3, 1.0, 8));
    const auto a = train_sse(train, val, pool, cfg);
    const auto b = train_sse(train, val, pool, cfg);
    REQUIRE(a.history.size() == b.history.size());
    std::set<std::string> seen;
    std::size_t added = 0;
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(iteration_to_json(a.history[i]) == iteration_to_json(b.history[i]));
        CHECK(a.history[i].weights.size() == 3);
        for (const auto& add : a.history[i].additions) {
            CHECK(add.confidence >= cfg.theta);
            CHECK(seen.insert(add.id).second);
            ++added;
        }
        CHECK(a.history[i].pool_remaining == 60 - added);
    }
    CHECK(added > 0);
    CHECK(a.final_train_size == 30 + added);
    CHECK(a.learners == b.learners);
}

TEST_CASE("config validation") {
    auto cfg = small_config();
    cfg.theta = 0.0;
    const auto b = labeled(blobs(20, 2, 1.0, 1));
    CHECK_THROWS_AS(train_sse(b, b, UnlabeledSet{Matrix(0, 2), {}}, cfg), ConfigError);
    cfg = small_config();
    const LabeledSet single{b.x, Labels(20, 1), {}};
    CHECK_THROWS_AS(train_sse(single, b, UnlabeledSet{Matrix(0, 2), {}}, cfg), FitError);
}

TEST_CASE("stage-2 admission thresholds") {
    const Stage2Config cfg;
    CHECK(stage2_admission({0.95, 0.2, 0.93}, cfg) == std::array<bool, 3>{true, false, true});
    CHECK(stage2_admission({0.9, 0.85, 0.89}, cfg) == std::array<bool, 3>{true, true, false});
}

TEST_CASE("stage-2 split is stratified") {
    Labels y;
    for (int i = 0; i < 50; ++i) y.push_back(i < 10 ? 1 : 0);
    const auto [tr, va] = stage2_split(y, 0.2, 9);
    CHECK(tr.size() == 40);
    CHECK(va.size() == 10);
    CHECK(std::count_if(va.begin(), va.end(), [&](std::size_t i) { return y[i] == 1; }) == 2);
    std::set<std::size_t> all(tr.begin(), tr.end());
    all.insert(va.begin(), va.end());
    CHECK(all.size() == 50);
    CHECK(stage2_split(y, 0.2, 9) == std::make_pair(tr, va));
}

TEST_CASE("an empty sale pool gives the supervised category learners") {
    const auto b = blobs(60, 3, 1.0, 13);
    AnnotatedSet set{b.x, {}, {}};
    for (std::size_t i = 0; i < b.y.size(); ++i) {
        const bool pos = b.y[i] == 1;
        set.labels.push_back({true, pos, i % 3 == 0, !pos});
    }
    Stage2Config cfg;
    for (auto& c : cfg.categories) c.learner = small_gbdt(c.learner.seed);
    cfg.seed = 4;
    const auto models = train_stage2(set, UnlabeledSet{Matrix(0, 3), {}}, cfg);
    for (auto c : kCategories) {
        const auto k = static_cast<std::size_t>(c);
        Labels y;
        for (const auto& l : set.labels) y.push_back(category_flag(l, c) ? 1 : 0);
        const auto [tr, va] = stage2_split(y, cfg.validation_fraction, cfg.seed + k);
        Labels ytr;
        for (auto i : tr) ytr.push_back(y[i]);
        const auto expected = learners::fit(seeded(cfg.categories[k].learner, cfg.seed + k, 0), b.x.select_rows(tr), ytr);
        CHECK(models.at(c).learner == expected);
        CHECK(models.at(c).history.size() == 1);
        CHECK(models.at(c).termination == Termination::pool_exhausted);
    }
}

TEST_CASE("prediction gates stage two on the sale vote") {
    const std::vector<double> x(4, 0.0);
    const auto stage2 = constant_stage2({0.8, 0.3, 0.6}, 4);

    const auto no = predict(constant_stage1(0.2, 4), stage2, "n", x);
    CHECK_FALSE(no.sale);
    CHECK_FALSE(no.stage2_evaluated);
    CHECK_FALSE((no.drug || no.weapon || no.credential));
    CHECK(no.p_drug == 0.0);

    const auto yes = predict(constant_stage1(0.9, 4), stage2, "y", x);
    CHECK(yes.sale);
    CHECK(yes.stage2_evaluated);
    CHECK(yes.drug);
    CHECK_FALSE(yes.weapon);
    CHECK(yes.credential);
    CHECK(yes.p_drug == doctest::Approx(0.8));
    CHECK(yes.sale_confidence == doctest::Approx(0.9));
    CHECK(prediction_to_json(yes).at("id") == "y");
}
