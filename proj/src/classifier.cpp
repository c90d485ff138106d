#include "edr/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edr/errors.hpp"

namespace edr {

namespace {

struct Standardization {
    Vector means;
    Vector scales;
};

Standardization fit_standardization(const Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    Standardization s;
    s.means = column_means(x);
    s.scales.assign(d, 1.0);
    for (std::size_t j = 0; j < d; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = x(i, j) - s.means[j];
            acc += r * r;
        }
        const double scale = std::sqrt(acc / static_cast<double>(n));
        // Constant columns carry no information; leave them unscaled instead
        // of dividing by rounding residue.
        if (scale > 1e-12 * std::max(1.0, std::abs(s.means[j]))) s.scales[j] = scale;
    }
    return s;
}

Matrix standardize(const Matrix& x, const Vector& means, const Vector& scales) {
    Matrix z(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto xi = x.row(i);
        auto zi = z.row(i);
        for (std::size_t j = 0; j < x.cols(); ++j) zi[j] = (xi[j] - means[j]) / scales[j];
    }
    return z;
}

// Softmax probabilities for one row of logits, in place.
void softmax_row(std::span<double> logits) {
    double m = logits[0];
    for (double v : logits) m = std::max(m, v);
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - m);
        sum += v;
    }
    for (double& v : logits) v /= sum;
}

Matrix raw_logits(const Matrix& z, const Matrix& w, const Vector& b) {
    const std::size_t n = z.rows();
    const std::size_t d = z.cols();
    const std::size_t k = b.size();
    Matrix logits(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        auto zi = z.row(i);
        auto li = logits.row(i);
        for (std::size_t c = 0; c < k; ++c) li[c] = b[c];
        for (std::size_t j = 0; j < d; ++j) {
            const double zij = zi[j];
            if (zij == 0.0) continue;
            auto wj = w.row(j);
            for (std::size_t c = 0; c < k; ++c) li[c] += zij * wj[c];
        }
    }
    return logits;
}

}  // namespace

double logreg_loss_and_gradient(const Matrix& z, const std::vector<int>& y, const Matrix& w,
                                const Vector& b, double l2, Matrix* grad_w, Vector* grad_b) {
    const std::size_t n = z.rows();
    const std::size_t d = z.cols();
    const std::size_t k = b.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    if (grad_w) *grad_w = Matrix(d, k);
    if (grad_b) grad_b->assign(k, 0.0);

    double loss = 0.0;
    Vector p(k);
    for (std::size_t i = 0; i < n; ++i) {
        auto zi = z.row(i);
        for (std::size_t c = 0; c < k; ++c) p[c] = b[c];
        for (std::size_t j = 0; j < d; ++j) {
            const double zij = zi[j];
            if (zij == 0.0) continue;
            auto wj = w.row(j);
            for (std::size_t c = 0; c < k; ++c) p[c] += zij * wj[c];
        }
        double m = p[0];
        for (double v : p) m = std::max(m, v);
        double sum = 0.0;
        for (double& v : p) {
            v = std::exp(v - m);
            sum += v;
        }
        loss -= std::log(p[y[i]] / sum);
        if (grad_w || grad_b) {
            for (std::size_t c = 0; c < k; ++c) p[c] /= sum;
            p[y[i]] -= 1.0;
            if (grad_b)
                for (std::size_t c = 0; c < k; ++c) (*grad_b)[c] += p[c];
            if (grad_w) {
                for (std::size_t j = 0; j < d; ++j) {
                    const double zij = zi[j];
                    if (zij == 0.0) continue;
                    auto gj = grad_w->row(j);
                    for (std::size_t c = 0; c < k; ++c) gj[c] += zij * p[c];
                }
            }
        }
    }
    loss *= inv_n;
    if (grad_b)
        for (double& v : *grad_b) v *= inv_n;
    if (grad_w) {
        for (std::size_t j = 0; j < d; ++j) {
            auto gj = grad_w->row(j);
            auto wj = w.row(j);
            for (std::size_t c = 0; c < k; ++c) gj[c] = gj[c] * inv_n + l2 * wj[c];
        }
    }
    double reg = 0.0;
    for (double v : w.data()) reg += v * v;
    return loss + 0.5 * l2 * reg;
}

LogisticModel logreg_fit(const Matrix& x, const std::vector<int>& y, const LogregConfig& config,
                         std::vector<double>* loss_trace) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (y.size() != n) throw ShapeError("logreg_fit: label count does not match row count");
    if (!all_finite(x)) throw InvalidInput("logreg_fit: non-finite feature values");
    if (config.l2 < 0.0)
        throw InvalidParameter("l2 must be non-negative, got " + std::to_string(config.l2));

    int k = 0;
    for (int label : y) {
        if (label < 0) throw InvalidInput("labels must be non-negative");
        k = std::max(k, label + 1);
    }
    if (k < 2) throw InvalidParameter("need at least 2 classes");
    std::vector<std::size_t> counts(k, 0);
    for (int label : y) ++counts[label];
    for (int c = 0; c < k; ++c)
        if (counts[c] == 0)
            throw InsufficientClassData("class " + std::to_string(c) + " has no samples", c);
    if (n < static_cast<std::size_t>(k))
        throw InsufficientData("need at least one sample per class (" + std::to_string(n) +
                               " < " + std::to_string(k) + ")");

    const Standardization stats = fit_standardization(x);
    const Matrix z = standardize(x, stats.means, stats.scales);

    Matrix w(d, k);
    Vector b(k, 0.0);
    Matrix grad_w;
    Vector grad_b;
    double loss = logreg_loss_and_gradient(z, y, w, b, config.l2, &grad_w, &grad_b);
    if (!std::isfinite(loss)) throw NumericalFailure("initial loss is not finite", 0);
    if (loss_trace) loss_trace->push_back(loss);

    double step = 1.0;
    bool converged = false;
    int iter = 0;
    Matrix w_next(d, k);
    Vector b_next(k);
    while (iter < config.max_iter) {
        double grad_inf = 0.0;
        for (double v : grad_w.data()) grad_inf = std::max(grad_inf, std::abs(v));
        for (double v : grad_b) grad_inf = std::max(grad_inf, std::abs(v));
        if (grad_inf <= config.tol) {
            converged = true;
            break;
        }

        // Halve the step until the loss stops increasing.
        bool accepted = false;
        while (step > 1e-18) {
            for (std::size_t idx = 0; idx < w.data().size(); ++idx)
                w_next.data()[idx] = w.data()[idx] - step * grad_w.data()[idx];
            for (std::size_t c = 0; c < b.size(); ++c) b_next[c] = b[c] - step * grad_b[c];
            const double candidate =
                logreg_loss_and_gradient(z, y, w_next, b_next, config.l2, nullptr, nullptr);
            if (!std::isfinite(candidate))
                throw NumericalFailure("loss diverged during optimization", iter);
            if (candidate <= loss) {
                w = w_next;
                b = b_next;
                loss = candidate;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no descent step representable, gradient is noise

        loss = logreg_loss_and_gradient(z, y, w, b, config.l2, &grad_w, &grad_b);
        if (loss_trace) loss_trace->push_back(loss);
        ++iter;
        step *= 1.25;
    }

    LogisticModel model;
    model.weights = std::move(w);
    model.bias = std::move(b);
    model.feature_means = stats.means;
    model.feature_scales = stats.scales;
    model.l2 = config.l2;
    model.converged = converged;
    model.n_iter = iter;
    return model;
}

Matrix logreg_predict_proba(const LogisticModel& model, const Matrix& x) {
    if (x.cols() != model.weights.rows())
        throw ShapeError("predict: expected " + std::to_string(model.weights.rows()) +
                         " features, got " + std::to_string(x.cols()));
    const Matrix z = standardize(x, model.feature_means, model.feature_scales);
    Matrix proba = raw_logits(z, model.weights, model.bias);
    for (std::size_t i = 0; i < proba.rows(); ++i) softmax_row(proba.row(i));
    return proba;
}

std::vector<int> logreg_predict(const LogisticModel& model, const Matrix& x) {
    const Matrix proba = logreg_predict_proba(model, x);
    std::vector<int> labels(proba.rows());
    for (std::size_t i = 0; i < proba.rows(); ++i) {
        auto pi = proba.row(i);
        std::size_t arg = 0;
        for (std::size_t c = 1; c < pi.size(); ++c)
            if (pi[c] > pi[arg]) arg = c;
        labels[i] = static_cast<int>(arg);
    }
    return labels;
}

double accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size())
        throw ShapeError("accuracy: " + std::to_string(y_true.size()) + " labels vs " +
                         std::to_string(y_pred.size()) + " predictions");
    if (y_true.empty()) throw ShapeError("accuracy: empty label vectors");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i)
        if (y_true[i] == y_pred[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(y_true.size());
}

}  // namespace edr
