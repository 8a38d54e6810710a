#include <doctest.h>

#include <cmath>
#include <vector>

#include "sse/error.hpp"
#include "sse/voting.hpp"

using namespace sse;
using namespace sse::voting;
using learners::ProbabilityRow;
using doctest::Approx;

namespace {

const double kH91 = -0.9 * std::log2(0.9) - 0.1 * std::log2(0.1);

EntropyStats stats(double mec, double mew) { return {mec, mew, 1, 1}; }

}  // namespace

TEST_CASE("entropy values") {
    CHECK(shannon_entropy(std::vector<double>{0.5, 0.5}) == 1.0);
    CHECK(shannon_entropy(std::vector<double>{1.0, 0.0}) == 0.0);
    CHECK(shannon_entropy(std::vector<double>{0.9, 0.1}) == Approx(0.468996).epsilon(1e-6));
    CHECK(std::abs(shannon_entropy(ProbabilityRow{0.9, 0.1}) - kH91) < 1e-12);
    CHECK(shannon_entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}) == Approx(2.0));
    CHECK_THROWS_AS(shannon_entropy(std::vector<double>{0.6, 0.6}), DomainError);
    CHECK_THROWS_AS(shannon_entropy(std::vector<double>{1.1, -0.1}), DomainError);
}

TEST_CASE("entropy statistics") {
    const std::vector<ProbabilityRow> confident{{1.0, 0.0}, {1.0, 0.0}};
    const auto a = entropy_stats(confident, {0, 0}, {0, 0});
    CHECK(a.mec == 0.0);
    CHECK(a.mew == kEntropyFloor);
    CHECK(a.n_wrong == 0);

    const std::vector<ProbabilityRow> mixed{{0.5, 0.5}, {0.9, 0.1}};
    const auto b = entropy_stats(mixed, {0, 1}, {0, 0});
    CHECK(b.mec == 1.0);
    CHECK(std::abs(b.mew - kH91) < 1e-12);

    const std::vector<ProbabilityRow> unsure{{0.5, 0.5}, {0.5, 0.5}};
    const auto c = entropy_stats(unsure, {1, 1}, {0, 0});
    CHECK(c.mew == 1.0);
    CHECK(c.mec == kEntropyFloor);
    CHECK_THROWS_AS(entropy_stats(unsure, {1}, {0, 0}), ShapeError);
}

TEST_CASE("predicted label breaks ties to negative") {
    CHECK(predicted_label({0.4, 0.6}) == 1);
    CHECK(predicted_label({0.5, 0.5}) == 0);
}

TEST_CASE("ensemble weights") {
    const std::vector<EntropyStats> equal(3, stats(0.2, 0.6));
    for (double w : ensemble_weights(equal).w) CHECK(w == Approx(1.0 / 3.0));
    const std::vector<EntropyStats> ratio{stats(0.25, 0.5), stats(0.5, 0.5), stats(0.4, 0.4)};
    const auto w = ensemble_weights(ratio).w;
    CHECK(w[0] == Approx(0.5));
    CHECK(w[1] == Approx(0.25));
    CHECK(w[2] == Approx(0.25));
    const std::vector<EntropyStats> floored{stats(0.0, 0.3), stats(kEntropyFloor, kEntropyFloor), stats(0.7, 0.1)};
    const auto f = ensemble_weights(floored).w;
    CHECK(std::abs(f[0] + f[1] + f[2] - 1.0) < 1e-12);
    CHECK(f[0] > f[1]);
}

TEST_CASE("weighted vote") {
    const std::vector<ProbabilityRow> rows{ProbabilityRow::from_positive(0.9), ProbabilityRow::from_positive(0.6),
                                           ProbabilityRow::from_positive(0.8)};
    const auto v = weighted_vote(rows, {{0.5, 0.25, 0.25}});
    CHECK(v.tpp_sale == Approx(0.8));
    CHECK(v.tpp_no_sale == Approx(0.2));
    CHECK(v.pseudo_label == Vote::sale);
    CHECK(v.confidence == Approx(0.766667).epsilon(1e-6));
    CHECK(confident(v, 0.76));
    CHECK_FALSE(confident(v, 0.77));

    const std::vector<ProbabilityRow> tie(3, ProbabilityRow{0.5, 0.5});
    CHECK(weighted_vote(tie, EnsembleWeights::uniform(3)).pseudo_label == Vote::no_sale);

    const ProbabilityRow r{0.3, 0.7};
    const std::vector<ProbabilityRow> same(3, r);
    const auto u = weighted_vote(same, EnsembleWeights::uniform(3));
    CHECK(u.tpp_sale == Approx(0.7));
    CHECK(u.tpp_no_sale == Approx(0.3));
    CHECK_THROWS_AS(weighted_vote(same, EnsembleWeights::uniform(2)), ShapeError);
}

TEST_CASE("vote is invariant to learner order") {
    const std::vector<ProbabilityRow> rows{ProbabilityRow::from_positive(0.2), ProbabilityRow::from_positive(0.7),
                                           ProbabilityRow::from_positive(0.55)};
    const std::vector<ProbabilityRow> perm{rows[2], rows[0], rows[1]};
    const auto a = weighted_vote(rows, {{0.2, 0.5, 0.3}});
    const auto b = weighted_vote(perm, {{0.3, 0.2, 0.5}});
    CHECK(a.pseudo_label == b.pseudo_label);
    CHECK(a.tpp_sale == Approx(b.tpp_sale));
    CHECK(a.confidence == Approx(b.confidence));
}
