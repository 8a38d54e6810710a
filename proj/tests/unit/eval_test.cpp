#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numeric>

#include "sse/error.hpp"
#include "sse/eval.hpp"

using namespace sse;
using namespace sse::eval;
using doctest::Approx;

TEST_CASE("metrics on small matrices") {
    const auto a = metrics({1, 1, 1, 1});
    CHECK(a.accuracy == 0.5);
    CHECK(a.mcc == 0.0);
    CHECK(a.tmcc == 0.5);

    const auto b = metrics({5, 0, 0, 0});
    CHECK(b.accuracy == 1.0);
    CHECK(b.f1 == 1.0);
    CHECK(b.mcc == 0.0);
    CHECK(b.tmcc == 0.5);

    const auto c = metrics({3, 4, 1, 2});
    CHECK(std::abs(c.mcc - 10.0 / std::sqrt(600.0)) < 1e-12);
    CHECK(c.tmcc == Approx(0.704124).epsilon(1e-6));
    CHECK(c.f1 == Approx(2.0 / 3.0));
    CHECK(c.accuracy == Approx(0.7));

    const auto d = metrics({0, 5, 0, 0});
    CHECK(d.f1 == 0.0);
    CHECK(d.accuracy == 1.0);
    CHECK_THROWS_AS(metrics({}), DomainError);
}

TEST_CASE("confusion counting") {
    ConfusionMatrix cm;
    cm.add(true, true);
    cm.add(true, false);
    cm.add(false, true);
    cm.add(false, false);
    cm.add(false, false);
    CHECK(cm == ConfusionMatrix{1, 2, 1, 1});
    CHECK(cm.total() == 5);
}

TEST_CASE("macro averaging") {
    const MetricSet m{0.8, 0.7, 0.6, 0.8};
    const auto same = macro_metrics({m, m, m, m});
    CHECK(same.accuracy == Approx(0.8));
    CHECK(same.f1 == Approx(0.7));
    CHECK(same.tmcc == Approx(0.8));
    CHECK(macro_metrics({MetricSet{1}, MetricSet{1}, MetricSet{0}, MetricSet{0}}).accuracy == 0.5);
}

TEST_CASE("report JSON round trip") {
    const auto r = report_from_confusions({ConfusionMatrix{3, 4, 1, 2}, {1, 1, 1, 1}, {5, 0, 0, 0}, {0, 9, 1, 0}});
    CHECK(r.n_documents == 10);
    const auto back = report_from_json(report_to_json(r));
    CHECK(back.macro.f1 == r.macro.f1);
    CHECK(back.per_label[0].mcc == r.per_label[0].mcc);
    CHECK(back.confusion == r.confusion);
}

TEST_CASE("ranks with ties") {
    CHECK(rank_row({0.9, 0.5, 0.7}) == std::vector<double>{1, 3, 2});
    CHECK(rank_row({0.5, 0.9, 0.5, 0.1}) == std::vector<double>{2.5, 1, 2.5, 4});
}

TEST_CASE("Friedman cases") {
    const auto tie = friedman_rank({{1, 1, 1}, {2, 2, 2}, {0, 0, 0}});
    CHECK(tie.mean_ranks == std::vector<double>{2, 2, 2});
    CHECK(tie.statistic == 0.0);
    CHECK(tie.p_value == 1.0);

    const auto win = friedman_rank({{0.9, 0.5, 0.1}, {0.8, 0.6, 0.3}, {0.7, 0.4, 0.2}});
    CHECK(win.mean_ranks == std::vector<double>{1, 2, 3});
    CHECK(win.statistic == Approx(6.0));
    CHECK(win.p_value == Approx(0.0498).epsilon(1e-3));

    std::vector<std::vector<double>> big(30, std::vector<double>(13));
    for (std::size_t r = 0; r < 30; ++r)
        for (std::size_t m = 0; m < 13; ++m) big[r][m] = static_cast<double>((r * 7 + m * 5) % 11);
    const auto br = friedman_rank(big);
    CHECK(std::accumulate(br.mean_ranks.begin(), br.mean_ranks.end(), 0.0) == Approx(91.0).epsilon(1e-12));

    CHECK_THROWS_AS(friedman_rank({{1, 2}}), ShapeError);
    CHECK_THROWS_AS(friedman_rank({{1}, {2}}), ShapeError);
    CHECK_THROWS_AS(friedman_rank({{1, 2}, {1, 2, 3}}), ShapeError);
}

TEST_CASE("ranks ignore monotone transforms") {
    const std::vector<std::vector<double>> s{{0.9, 0.2, 0.5, 0.4}, {0.3, 0.1, 0.8, 0.7}, {0.6, 0.6, 0.2, 0.9}};
    auto t = s;
    for (auto& row : t)
        for (auto& v : row) v = std::exp(3.0 * v) - 2.0;
    const auto a = friedman_rank(s), b = friedman_rank(t);
    CHECK(a.mean_ranks == b.mean_ranks);
    CHECK(a.statistic == b.statistic);
}

TEST_CASE("incomplete gamma against Boost") {
    for (double a : {0.5, 1.0, 1.5, 2.5, 6.0, 12.0})
        for (double x : {0.01, 0.3, 1.0, 2.0, 3.0, 7.5, 20.0, 60.0}) {
            CAPTURE(a);
            CAPTURE(x);
            CHECK(gamma_q(a, x) == Approx(boost::math::gamma_q(a, x)).epsilon(1e-10));
        }
    CHECK(chi_square_survival(6.0, 2.0) == Approx(std::exp(-3.0)).epsilon(1e-12));
    CHECK(chi_square_survival(0.0, 4.0) == 1.0);
}
