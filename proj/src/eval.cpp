#include "sse/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sse/error.hpp"

namespace sse::eval {

using nlohmann::json;

void ConfusionMatrix::add(bool truth, bool predicted) {
    if (truth && predicted) ++tp;
    else if (!truth && !predicted) ++tn;
    else if (predicted) ++fp;
    else ++fn;
}

MetricSet metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw DomainError("metrics of an empty confusion matrix");
    const double tp = static_cast<double>(cm.tp), tn = static_cast<double>(cm.tn);
    const double fp = static_cast<double>(cm.fp), fn = static_cast<double>(cm.fn);
    MetricSet m;
    m.accuracy = (tp + tn) / (tp + tn + fp + fn);
    const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    m.f1 = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    m.mcc = den > 0 ? (tp * tn - fp * fn) / std::sqrt(den) : 0.0;
    m.mcc = std::clamp(m.mcc, -1.0, 1.0);
    m.tmcc = (m.mcc + 1.0) / 2.0;
    return m;
}

MetricSet macro_metrics(const std::array<MetricSet, 4>& per_label) {
    MetricSet m{0.0, 0.0, 0.0, 0.0};
    for (const auto& s : per_label) {
        m.accuracy += s.accuracy;
        m.f1 += s.f1;
        m.mcc += s.mcc;
        m.tmcc += s.tmcc;
    }
    m.accuracy /= 4.0;
    m.f1 /= 4.0;
    m.mcc /= 4.0;
    m.tmcc /= 4.0;
    return m;
}

EvaluationReport report_from_confusions(const std::array<ConfusionMatrix, 4>& confusion) {
    EvaluationReport r;
    r.confusion = confusion;
    for (std::size_t k = 0; k < 4; ++k) r.per_label[k] = metrics(confusion[k]);
    r.macro = macro_metrics(r.per_label);
    r.n_documents = confusion[0].total();
    return r;
}

json metric_to_json(const MetricSet& m) {
    return {{"accuracy", m.accuracy}, {"f1", m.f1}, {"mcc", m.mcc}, {"tmcc", m.tmcc}};
}

json report_to_json(const EvaluationReport& r) {
    json labels = json::object();
    for (std::size_t k = 0; k < 4; ++k) {
        const auto& c = r.confusion[k];
        labels[kLabelNames[k]] = {{"confusion", {{"tp", c.tp}, {"tn", c.tn}, {"fp", c.fp}, {"fn", c.fn}}},
                                  {"metrics", metric_to_json(r.per_label[k])}};
    }
    return {{"n_documents", r.n_documents}, {"labels", labels}, {"macro", metric_to_json(r.macro)}};
}

EvaluationReport report_from_json(const json& j) {
    std::array<ConfusionMatrix, 4> cms;
    try {
        for (std::size_t k = 0; k < 4; ++k) {
            const auto& c = j.at("labels").at(kLabelNames[k]).at("confusion");
            cms[k] = {c.at("tp").get<std::uint64_t>(), c.at("tn").get<std::uint64_t>(),
                      c.at("fp").get<std::uint64_t>(), c.at("fn").get<std::uint64_t>()};
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string("evaluation report: ") + e.what());
    }
    return report_from_confusions(cms);
}

std::vector<double> rank_row(const std::vector<double>& scores) {
    const std::size_t k = scores.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
    std::vector<double> ranks(k);
    for (std::size_t i = 0; i < k;) {
        std::size_t j = i;
        while (j + 1 < k && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

RankReport friedman_rank(const std::vector<std::vector<double>>& scores) {
    if (scores.size() < 2) throw ShapeError("friedman ranking needs at least 2 runs");
    const std::size_t k = scores.front().size();
    if (k < 2) throw ShapeError("friedman ranking needs at least 2 models");
    for (const auto& row : scores) {
        if (row.size() != k) throw ShapeError("ragged score matrix");
        for (double v : row)
            if (std::isnan(v)) throw DomainError("NaN score");
    }
    RankReport r;
    r.n_runs = scores.size();
    r.n_models = k;
    r.mean_ranks.assign(k, 0.0);
    for (const auto& row : scores) {
        const auto ranks = rank_row(row);
        for (std::size_t j = 0; j < k; ++j) r.mean_ranks[j] += ranks[j];
    }
    const double n = static_cast<double>(r.n_runs), kd = static_cast<double>(k);
    double sum_sq = 0.0;
    for (auto& m : r.mean_ranks) {
        m /= n;
        sum_sq += m * m;
    }
    r.statistic = 12.0 * n / (kd * (kd + 1.0)) * sum_sq - 3.0 * n * (kd + 1.0);
    // rounding can leave a tiny negative value on a full tie
    if (std::abs(r.statistic) < 1e-9) r.statistic = 0.0;
    r.p_value = chi_square_survival(r.statistic, kd - 1.0);
    return r;
}

json rank_to_json(const RankReport& r, const std::vector<std::string>& model_names) {
    json j = {{"n_runs", r.n_runs},
              {"n_models", r.n_models},
              {"mean_ranks", r.mean_ranks},
              {"statistic", r.statistic},
              {"p_value", r.p_value}};
    if (!model_names.empty()) j["models"] = model_names;
    return j;
}

namespace {

constexpr int kMaxTerms = 1000;
constexpr double kEps = 1e-16;

// P(a,x) by series, valid for x < a+1
double gamma_p_series(double a, double x) {
    double term = 1.0 / a, sum = term;
    for (int n = 1; n < kMaxTerms; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a,x) by Lentz continued fraction, valid for x >= a+1
double gamma_q_fraction(double a, double x) {
    constexpr double tiny = std::numeric_limits<double>::min() / kEps;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < kMaxTerms; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0 || std::isnan(x)) throw DomainError("gamma_q argument out of range");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return std::clamp(1.0 - gamma_p_series(a, x), 0.0, 1.0);
    return std::clamp(gamma_q_fraction(a, x), 0.0, 1.0);
}

double chi_square_survival(double statistic, double dof) {
    if (statistic <= 0.0) return 1.0;
    return gamma_q(dof / 2.0, statistic / 2.0);
}

}  // namespace sse::eval
