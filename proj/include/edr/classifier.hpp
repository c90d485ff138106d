#ifndef EDR_CLASSIFIER_HPP
#define EDR_CLASSIFIER_HPP

#include <cstdint>
#include <vector>

#include "edr/matrix.hpp"

namespace edr {

/// Multinomial logistic regression fitted on standardized features. The
/// standardization statistics travel with the model so prediction can be
/// applied to raw inputs.
struct LogisticModel {
    Matrix weights;  // d x K
    Vector bias;     // K
    Vector feature_means;
    Vector feature_scales;  // all > 0; constant columns get scale 1
    double l2 = 0.0;
    bool converged = false;
    int n_iter = 0;
};

struct LogregConfig {
    double l2 = 1.0;
    int max_iter = 500;
    double tol = 1e-6;        // infinity norm of the full gradient
    std::uint64_t seed = 42;  // recorded for report provenance; the optimizer
                              // itself starts from zero and draws nothing
};

/// Mean cross-entropy plus (l2/2)*||W||_F^2 on already-standardized features,
/// with the gradient written to grad_w / grad_b when non-null. Exposed
/// separately so the optimizer and the finite-difference checks share one
/// definition.
double logreg_loss_and_gradient(const Matrix& z, const std::vector<int>& y, const Matrix& w,
                                const Vector& b, double l2, Matrix* grad_w, Vector* grad_b);

/// Gradient descent with step halving; the loss is non-increasing by
/// construction. Stops when the gradient infinity norm drops below tol or
/// max_iter is reached. Pass loss_trace to record the loss after every
/// accepted step.
LogisticModel logreg_fit(const Matrix& x, const std::vector<int>& y, const LogregConfig& config,
                         std::vector<double>* loss_trace = nullptr);

std::vector<int> logreg_predict(const LogisticModel& model, const Matrix& x);

/// Row-stochastic class probabilities.
Matrix logreg_predict_proba(const LogisticModel& model, const Matrix& x);

/// Fraction of exact matches; ties in the underlying argmax go to the lowest
/// class index.
double accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred);

}  // namespace edr

#endif  // EDR_CLASSIFIER_HPP
