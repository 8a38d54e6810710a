#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sse/matrix.hpp"

namespace sse::learners {

enum class SvmScaling { none, standard, minmax };

std::string to_string(SvmScaling s);
SvmScaling svm_scaling_from_string(const std::string& s);

struct SvmParams {
    double c = 0.01;
    double gamma = 0.1;
    double tolerance = 1e-3;
    int max_iterations = 10000;
    int calibration_folds = 3;
    /// Feature scaling fitted on the training rows before the kernel.
    SvmScaling scaling = SvmScaling::minmax;

    friend bool operator==(const SvmParams&, const SvmParams&) = default;
};

/// Dual solution of a C-SVC with RBF kernel.
struct SvmDual {
    std::vector<double> alpha;  ///< one per training row, in [0, C_i]
    double rho = 0.0;           ///< decision = sum_i alpha_i y_i K(x_i, x) - rho
    int iterations = 0;
    bool converged = false;
};

/// SMO with second-order working-set selection. `cost` holds the per-row box bound.
SvmDual solve_svm_dual(const Matrix& x, const Labels& y, std::span<const double> cost, double gamma, double tolerance,
                       int max_iterations);

struct PlattSigmoid {
    double a = 0.0;
    double b = 0.0;

    /// P(positive | decision value f) = 1 / (1 + exp(a f + b)).
    double probability(double f) const;
    friend bool operator==(const PlattSigmoid&, const PlattSigmoid&) = default;
};

/// Newton fit of the sigmoid to (decision value, label) pairs with the
/// regularized targets (N+ + 1)/(N+ + 2) and 1/(N- + 2).
PlattSigmoid fit_platt(std::span<const double> decision, const Labels& y);

struct SvmModel {
    std::vector<double> mean;      ///< offset subtracted before scaling (mean or minimum)
    std::vector<double> scale;
    Matrix support;                ///< scaled support vectors
    std::vector<double> coef;      ///< alpha_i * y_i
    double rho = 0.0;
    double gamma = 0.1;
    PlattSigmoid platt;  ///< maps expansion(x) to P(positive)

    /// sum_i coef_i K(s_i, x), the decision value before the offset.
    double expansion(std::span<const double> x) const;
    double decision(std::span<const double> x) const;
    /// The sigmoid is fitted on out-of-fold expansions, so rho does not enter here.
    double positive_probability(std::span<const double> x) const { return platt.probability(expansion(x)); }
    friend bool operator==(const SvmModel&, const SvmModel&) = default;
};

SvmModel fit_svm(const Matrix& x, const Labels& y, std::span<const double> class_weight, const SvmParams& params,
                 std::uint64_t seed);

nlohmann::json svm_to_json(const SvmModel& m);
SvmModel svm_from_json(const nlohmann::json& j);

}  // namespace sse::learners
