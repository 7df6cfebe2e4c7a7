#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "blo/problem.hpp"

namespace blo {

/// Smoothed non-convex ℓ_q regularizer (‖w‖₂ + ‖ε‖₂)^{q/2} with 0 < q < 1.
struct LqConfig {
  double q = 0.5;
  Vector eps;
};

double lq_penalty(const Vector& w, const LqConfig& cfg);
/// Zero at w = 0, where the w-gradient has a 0/0 form.
Vector lq_penalty_gradient(const Vector& w, const LqConfig& cfg);

struct HypercleanOptions {
  std::size_t n_train = 60;
  std::size_t n_val = 60;
  std::size_t n_features = 4;
  std::size_t n_classes = 3;
  double corrupt_fraction = 0.3;
  std::uint64_t seed = 42;
  /// 0 selects a linear softmax classifier (convex lower level); > 0 a
  /// tanh hidden layer of this width (non-convex lower level).
  std::size_t n_hidden = 0;
  /// Weight of an optional ℓ_q penalty on the classifier parameters.
  double lq_weight = 0.0;
  double lq_q = 0.5;
  double class_separation = 3.0;

  friend bool operator==(const HypercleanOptions&, const HypercleanOptions&) = default;
};

struct LabeledSet {
  std::vector<std::vector<double>> features;
  std::vector<std::size_t> labels;
  friend bool operator==(const LabeledSet&, const LabeledSet&) = default;
};

struct HypercleanData {
  LabeledSet train;
  LabeledSet validation;
  /// Indices of training samples whose label was flipped.
  std::vector<std::size_t> corrupted;
  friend bool operator==(const HypercleanData&, const HypercleanData&) = default;
};

/// Gaussian blobs around scaled simplex vertices, with a fraction of the
/// training labels replaced by a different random class.
HypercleanData make_hyperclean_data(const HypercleanOptions& options);

/// Data hyper-cleaning: x holds one logit weight per training sample,
///   F(x, y) = mean_val ℓ(y; u, v),   f(x, y) = mean_train σ(x_i) ℓ(y; u_i, v_i)
/// with ℓ the cross-entropy of the classifier parametrised by y.
class HypercleanProblem final : public BilevelProblem {
 public:
  explicit HypercleanProblem(const HypercleanOptions& options);

  std::string name() const override { return "hyperclean"; }
  const HypercleanData& data() const noexcept { return data_; }
  const HypercleanOptions& options() const noexcept { return options_; }

  double upper(const Vector& x, const Vector& y) const override;
  double lower(const Vector& x, const Vector& y) const override;
  Vector grad_x_upper(const Vector& x, const Vector& y) const override;
  Vector grad_y_upper(const Vector& x, const Vector& y) const override;
  Vector grad_y_lower(const Vector& x, const Vector& y) const override;
  std::optional<Vector> grad_x_lower(const Vector& x, const Vector& y) const override;

  bool has_hvp_xy() const override { return true; }
  Vector hvp_xy_lower(const Vector& x, const Vector& y, const Vector& v) const override;

  /// Unweighted mean cross-entropy over the training set.
  double train_loss(const Vector& y) const;
  double validation_loss(const Vector& y) const { return upper(Vector(upper_dim()), y); }

  /// Small deterministic parameter vector for starting the lower level.
  Vector initial_parameters(std::uint64_t seed) const;

  static std::size_t parameter_count(const HypercleanOptions& options);

 private:
  /// Loss of one sample; adds weight * ∇ℓ into `grad` when non-null.
  double sample_loss(const Vector& y, const std::vector<double>& u, std::size_t label, double weight,
                     Vector* grad) const;

  HypercleanOptions options_;
  HypercleanData data_;
  LqConfig lq_;
};

ProblemPtr synthetic_hyperclean(const HypercleanOptions& options);

}  // namespace blo
