#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace sse::eval {

struct ConfusionMatrix {
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;

    std::uint64_t total() const { return tp + tn + fp + fn; }
    void add(bool truth, bool predicted);
    bool operator==(const ConfusionMatrix&) const = default;
};

struct MetricSet {
    double accuracy = 0.0;
    double f1 = 0.0;
    double mcc = 0.0;
    double tmcc = 0.5;
};

// Throws DomainError on an empty matrix.
MetricSet metrics(const ConfusionMatrix& cm);
MetricSet macro_metrics(const std::array<MetricSet, 4>& per_label);

inline constexpr std::array<const char*, 4> kLabelNames{"sale", "drug", "weapon", "credential"};

struct EvaluationReport {
    std::array<ConfusionMatrix, 4> confusion;
    std::array<MetricSet, 4> per_label;
    MetricSet macro;
    std::size_t n_documents = 0;
};

EvaluationReport report_from_confusions(const std::array<ConfusionMatrix, 4>& confusion);
nlohmann::json metric_to_json(const MetricSet& m);
nlohmann::json report_to_json(const EvaluationReport& r);
EvaluationReport report_from_json(const nlohmann::json& j);

struct RankReport {
    std::vector<double> mean_ranks;
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n_runs = 0;
    std::size_t n_models = 0;
};

// Ranks within one run; 1 = highest score, ties share the average rank.
std::vector<double> rank_row(const std::vector<double>& scores);
// scores[run][model]. Throws ShapeError for fewer than 2 runs or models, or ragged rows.
RankReport friedman_rank(const std::vector<std::vector<double>>& scores);
nlohmann::json rank_to_json(const RankReport& r, const std::vector<std::string>& model_names = {});

// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);
double chi_square_survival(double statistic, double dof);

}  // namespace sse::eval
