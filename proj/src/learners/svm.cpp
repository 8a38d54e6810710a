#include "sse/learners/svm.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "sse/error.hpp"
#include "sse/rng.hpp"

namespace sse::learners {

std::string to_string(SvmScaling s) {
    switch (s) {
        case SvmScaling::none: return "none";
        case SvmScaling::standard: return "standard";
        case SvmScaling::minmax: return "minmax";
    }
    return "minmax";
}

SvmScaling svm_scaling_from_string(const std::string& s) {
    if (s == "none") return SvmScaling::none;
    if (s == "standard") return SvmScaling::standard;
    if (s == "minmax") return SvmScaling::minmax;
    throw ConfigError("unknown svm scaling '" + s + "'");
}


using nlohmann::json;

namespace {

constexpr double kTau = 1e-12;
constexpr std::size_t kCacheBytes = std::size_t{192} << 20;

/// RBF kernel rows over a subset of scaled rows, computed on demand.
/// At least the two most recently fetched rows stay resident.
class KernelRows {
public:
    KernelRows(const Matrix& xs, std::vector<std::size_t> index, double gamma)
        : xs_(xs), index_(std::move(index)), gamma_(gamma), sqnorm_(index_.size()) {
        for (std::size_t i = 0; i < index_.size(); ++i) {
            double s = 0.0;
            for (double v : xs_.row(index_[i])) s += v * v;
            sqnorm_[i] = s;
        }
        capacity_ = std::max<std::size_t>(2, kCacheBytes / (sizeof(double) * std::max<std::size_t>(1, index_.size())));
    }

    std::size_t size() const { return index_.size(); }

    std::span<const double> row(std::size_t i) {
        if (auto it = cache_.find(i); it != cache_.end()) return it->second;
        if (cache_.size() >= capacity_) {
            cache_.erase(order_.front());
            order_.pop_front();
        }
        std::vector<double> r(index_.size());
        const auto xi = xs_.row(index_[i]);
        for (std::size_t k = 0; k < index_.size(); ++k) {
            const auto xk = xs_.row(index_[k]);
            double dot = 0.0;
            for (std::size_t f = 0; f < xi.size(); ++f) dot += xi[f] * xk[f];
            r[k] = std::exp(-gamma_ * std::max(0.0, sqnorm_[i] + sqnorm_[k] - 2.0 * dot));
        }
        r[i] = 1.0;
        order_.push_back(i);
        return cache_.emplace(i, std::move(r)).first->second;
    }

private:
    const Matrix& xs_;
    std::vector<std::size_t> index_;
    double gamma_;
    std::vector<double> sqnorm_;
    std::size_t capacity_;
    std::unordered_map<std::size_t, std::vector<double>> cache_;
    std::deque<std::size_t> order_;
};

/// Solves the C-SVC dual on the rows selected by `kernel`; labels in {+1,-1}.
SvmDual solve(KernelRows& kernel, const std::vector<int>& y, std::span<const double> cost, double tolerance,
              int max_iterations) {
    const std::size_t l = y.size();
    SvmDual out;
    out.alpha.assign(l, 0.0);
    auto& alpha = out.alpha;
    std::vector<double> grad(l, -1.0);
    auto upper = [&](std::size_t t) { return alpha[t] >= cost[t]; };
    auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

    for (; out.iterations < max_iterations; ++out.iterations) {
        double gmax = -std::numeric_limits<double>::infinity();
        double gmax2 = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t ii = -1, jj = -1;
        for (std::size_t t = 0; t < l; ++t) {
            if (y[t] == 1) {
                if (!upper(t) && -grad[t] >= gmax) gmax = -grad[t], ii = static_cast<std::ptrdiff_t>(t);
            } else {
                if (!lower(t) && grad[t] >= gmax) gmax = grad[t], ii = static_cast<std::ptrdiff_t>(t);
            }
        }
        if (ii < 0) {
            out.converged = true;
            break;
        }
        const auto i = static_cast<std::size_t>(ii);
        const auto ki = kernel.row(i);
        double obj_min = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < l; ++j) {
            // Q_ij = y_i y_j K_ij; quad_coef = K_ii + K_jj - 2 y_i y_j Q_ij = 2 - 2 K_ij for RBF
            if (y[j] == 1) {
                if (lower(j)) continue;
                const double diff = gmax + grad[j];
                gmax2 = std::max(gmax2, grad[j]);
                if (diff > 0) {
                    double quad = 2.0 - 2.0 * ki[j];
                    if (quad <= 0) quad = kTau;
                    const double obj = -(diff * diff) / quad;
                    if (obj <= obj_min) obj_min = obj, jj = static_cast<std::ptrdiff_t>(j);
                }
            } else {
                if (upper(j)) continue;
                const double diff = gmax - grad[j];
                gmax2 = std::max(gmax2, -grad[j]);
                if (diff > 0) {
                    double quad = 2.0 - 2.0 * ki[j];
                    if (quad <= 0) quad = kTau;
                    const double obj = -(diff * diff) / quad;
                    if (obj <= obj_min) obj_min = obj, jj = static_cast<std::ptrdiff_t>(j);
                }
            }
        }
        if (gmax + gmax2 < tolerance || jj < 0) {
            out.converged = true;
            break;
        }
        const auto j = static_cast<std::size_t>(jj);
        const auto kj = kernel.row(j);
        const auto ki2 = kernel.row(i);
        const double qij = y[i] * y[j] * ki2[j];
        const double ci = cost[i], cj = cost[j];
        const double old_i = alpha[i], old_j = alpha[j];

        if (y[i] != y[j]) {
            double quad = 2.0 + 2.0 * qij;
            if (quad <= 0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) alpha[j] = 0, alpha[i] = diff;
            } else {
                if (alpha[i] < 0) alpha[i] = 0, alpha[j] = -diff;
            }
            if (diff > ci - cj) {
                if (alpha[i] > ci) alpha[i] = ci, alpha[j] = ci - diff;
            } else {
                if (alpha[j] > cj) alpha[j] = cj, alpha[i] = cj + diff;
            }
        } else {
            double quad = 2.0 - 2.0 * qij;
            if (quad <= 0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > ci) {
                if (alpha[i] > ci) alpha[i] = ci, alpha[j] = sum - ci;
            } else {
                if (alpha[j] < 0) alpha[j] = 0, alpha[i] = sum;
            }
            if (sum > cj) {
                if (alpha[j] > cj) alpha[j] = cj, alpha[i] = sum - cj;
            } else {
                if (alpha[i] < 0) alpha[i] = 0, alpha[j] = sum;
            }
        }
        const double dai = alpha[i] - old_i, daj = alpha[j] - old_j;
        for (std::size_t k = 0; k < l; ++k) grad[k] += y[k] * (y[i] * ki2[k] * dai + y[j] * kj[k] * daj);
    }

    double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
    std::size_t free = 0;
    for (std::size_t t = 0; t < l; ++t) {
        const double yg = y[t] * grad[t];
        if (upper(t)) {
            if (y[t] == -1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (lower(t)) {
            if (y[t] == 1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++free;
            sum_free += yg;
        }
    }
    out.rho = free > 0 ? sum_free / static_cast<double>(free) : (ub + lb) / 2.0;
    return out;
}

std::vector<int> signed_labels(const Labels& y) {
    std::vector<int> s(y.size());
    std::transform(y.begin(), y.end(), s.begin(), [](int v) { return v ? 1 : -1; });
    return s;
}

double sigmoid_loss(std::span<const double> dec, std::span<const double> target, double a, double b) {
    double f = 0.0;
    for (std::size_t i = 0; i < dec.size(); ++i) {
        const double z = dec[i] * a + b;
        f += z >= 0 ? target[i] * z + std::log1p(std::exp(-z)) : (target[i] - 1) * z + std::log1p(std::exp(z));
    }
    return f;
}

}  // namespace

SvmDual solve_svm_dual(const Matrix& x, const Labels& y, std::span<const double> cost, double gamma, double tolerance,
                       int max_iterations) {
    if (x.rows() != y.size() || cost.size() != y.size()) throw ShapeError("svm solve: rows, labels and costs differ");
    std::vector<std::size_t> idx(x.rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    KernelRows k(x, std::move(idx), gamma);
    return solve(k, signed_labels(y), cost, tolerance, max_iterations);
}

double PlattSigmoid::probability(double f) const {
    const double z = f * a + b;
    return z >= 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
}

PlattSigmoid fit_platt(std::span<const double> dec, const Labels& y) {
    if (dec.size() != y.size()) throw ShapeError("platt fit: decision values and labels differ");
    const double prior1 = static_cast<double>(std::count(y.begin(), y.end(), 1));
    const double prior0 = static_cast<double>(y.size()) - prior1;
    const double hi = (prior1 + 1.0) / (prior1 + 2.0), lo = 1.0 / (prior0 + 2.0);
    std::vector<double> t(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) t[i] = y[i] ? hi : lo;

    constexpr int kMaxIter = 100;
    constexpr double kMinStep = 1e-10, kSigma = 1e-12, kEps = 1e-5;
    PlattSigmoid s{0.0, std::log((prior0 + 1.0) / (prior1 + 1.0))};
    double fval = sigmoid_loss(dec, t, s.a, s.b);
    for (int iter = 0; iter < kMaxIter; ++iter) {
        double h11 = kSigma, h22 = kSigma, h21 = 0, g1 = 0, g2 = 0;
        for (std::size_t i = 0; i < dec.size(); ++i) {
            const double z = dec[i] * s.a + s.b;
            double p, q;
            if (z >= 0) {
                p = std::exp(-z) / (1.0 + std::exp(-z));
                q = 1.0 / (1.0 + std::exp(-z));
            } else {
                p = 1.0 / (1.0 + std::exp(z));
                q = std::exp(z) / (1.0 + std::exp(z));
            }
            const double d2 = p * q;
            h11 += dec[i] * dec[i] * d2;
            h22 += d2;
            h21 += dec[i] * d2;
            const double d1 = t[i] - p;
            g1 += dec[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < kEps && std::abs(g2) < kEps) break;
        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;
        double step = 1.0;
        while (step >= kMinStep) {
            const double na = s.a + step * da, nb = s.b + step * db;
            const double nf = sigmoid_loss(dec, t, na, nb);
            if (nf < fval + 0.0001 * step * gd) {
                s = {na, nb};
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if (step < kMinStep) break;
    }
    return s;
}

double SvmModel::expansion(std::span<const double> x) const {
    if (x.size() != mean.size()) throw ShapeError("svm: feature dimension mismatch");
    std::vector<double> z(x.size());
    for (std::size_t f = 0; f < x.size(); ++f) z[f] = (x[f] - mean[f]) / scale[f];
    double sum = 0.0;
    for (std::size_t i = 0; i < support.rows(); ++i) {
        const auto s = support.row(i);
        double d2 = 0.0;
        for (std::size_t f = 0; f < z.size(); ++f) d2 += (s[f] - z[f]) * (s[f] - z[f]);
        sum += coef[i] * std::exp(-gamma * d2);
    }
    return sum;
}

double SvmModel::decision(std::span<const double> x) const { return expansion(x) - rho; }

SvmModel fit_svm(const Matrix& x, const Labels& y, std::span<const double> class_weight, const SvmParams& params,
                 std::uint64_t seed) {
    if (x.rows() != y.size()) throw ShapeError("svm fit: rows and labels differ");
    if (class_weight.size() != 2) throw ShapeError("svm fit: expected two class weights");
    if (!(params.c > 0.0) || !(params.gamma > 0.0) || !(params.tolerance > 0.0) || params.max_iterations < 1 ||
        params.calibration_folds < 2)
        throw ConfigError("invalid svm hyperparameters");
    const std::size_t n = x.rows(), d = x.cols();

    SvmModel model;
    model.gamma = params.gamma;
    model.mean.assign(d, 0.0);
    model.scale.assign(d, 1.0);
    if (params.scaling == SvmScaling::standard) {
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t f = 0; f < d; ++f) model.mean[f] += x(r, f);
        for (auto& m : model.mean) m /= static_cast<double>(n);
        std::vector<double> var(d, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t f = 0; f < d; ++f) var[f] += (x(r, f) - model.mean[f]) * (x(r, f) - model.mean[f]);
        for (std::size_t f = 0; f < d; ++f) {
            const double sd = std::sqrt(var[f] / static_cast<double>(n));
            model.scale[f] = sd > 1e-12 ? sd : 1.0;
        }
    } else if (params.scaling == SvmScaling::minmax && n > 0) {
        std::vector<double> hi(d);
        for (std::size_t f = 0; f < d; ++f) model.mean[f] = hi[f] = x(0, f);
        for (std::size_t r = 1; r < n; ++r)
            for (std::size_t f = 0; f < d; ++f) {
                model.mean[f] = std::min(model.mean[f], x(r, f));
                hi[f] = std::max(hi[f], x(r, f));
            }
        for (std::size_t f = 0; f < d; ++f) {
            const double range = hi[f] - model.mean[f];
            model.scale[f] = range > 1e-12 ? range : 1.0;
        }
    }
    Matrix xs(n, d);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t f = 0; f < d; ++f) xs(r, f) = (x(r, f) - model.mean[f]) / model.scale[f];

    const auto ys = signed_labels(y);
    std::vector<double> cost(n);
    for (std::size_t i = 0; i < n; ++i) cost[i] = params.c * class_weight[y[i] ? 1 : 0];

    // Out-of-fold kernel expansions for the sigmoid fit.
    const auto folds = static_cast<std::size_t>(params.calibration_folds);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span(perm));
    std::vector<double> oof(n, 0.0);
    for (std::size_t k = 0; k < folds; ++k) {
        const std::size_t begin = k * n / folds, end = (k + 1) * n / folds;
        std::vector<std::size_t> train;
        for (std::size_t i = 0; i < n; ++i)
            if (i < begin || i >= end) train.push_back(perm[i]);
        std::vector<int> ty;
        std::vector<double> tc;
        for (auto r : train) ty.push_back(ys[r]), tc.push_back(cost[r]);
        const auto pos = std::count(ty.begin(), ty.end(), 1);
        if (pos == 0 || pos == static_cast<std::ptrdiff_t>(ty.size())) {
            const double v = train.empty() ? 0.0 : (pos > 0 ? 1.0 : -1.0);
            for (std::size_t i = begin; i < end; ++i) oof[perm[i]] = v;
            continue;
        }
        KernelRows kernel(xs, train, params.gamma);
        const auto dual = solve(kernel, ty, tc, params.tolerance, params.max_iterations);
        for (std::size_t i = begin; i < end; ++i) {
            const auto zi = xs.row(perm[i]);
            double s = 0.0;
            for (std::size_t t = 0; t < train.size(); ++t) {
                if (dual.alpha[t] <= 0.0) continue;
                const auto zt = xs.row(train[t]);
                double d2 = 0.0;
                for (std::size_t f = 0; f < d; ++f) d2 += (zt[f] - zi[f]) * (zt[f] - zi[f]);
                s += dual.alpha[t] * ty[t] * std::exp(-params.gamma * d2);
            }
            // rho left out: it is poorly determined when most alphas sit at the bound, and the sigmoid has its own offset
            oof[perm[i]] = s;
        }
    }
    model.platt = fit_platt(oof, y);

    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    KernelRows kernel(xs, std::move(all), params.gamma);
    const auto dual = solve(kernel, ys, cost, params.tolerance, params.max_iterations);
    model.rho = dual.rho;
    for (std::size_t i = 0; i < n; ++i) {
        if (dual.alpha[i] <= 0.0) continue;
        model.support.append_row(xs.row(i));
        model.coef.push_back(dual.alpha[i] * ys[i]);
    }
    if (model.support.cols() == 0) model.support = Matrix(0, d);
    return model;
}

json svm_to_json(const SvmModel& m) {
    std::vector<std::vector<double>> sv;
    for (std::size_t i = 0; i < m.support.rows(); ++i) sv.emplace_back(m.support.row(i).begin(), m.support.row(i).end());
    return {{"mean", m.mean},   {"scale", m.scale}, {"support", sv},         {"coef", m.coef},
            {"rho", m.rho},     {"gamma", m.gamma}, {"platt_a", m.platt.a}, {"platt_b", m.platt.b}};
}

SvmModel svm_from_json(const json& j) {
    SvmModel m;
    m.mean = j.at("mean").get<std::vector<double>>();
    m.scale = j.at("scale").get<std::vector<double>>();
    m.support = Matrix(0, m.mean.size());
    for (const auto& row : j.at("support")) m.support.append_row(row.get<std::vector<double>>());
    m.coef = j.at("coef").get<std::vector<double>>();
    m.rho = j.at("rho").get<double>();
    m.gamma = j.at("gamma").get<double>();
    m.platt = {j.at("platt_a").get<double>(), j.at("platt_b").get<double>()};
    if (m.coef.size() != m.support.rows() || m.scale.size() != m.mean.size())
        throw FormatError("svm model arrays are inconsistent");
    return m;
}

}  // namespace sse::learners
