#include "blo/hyperclean.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "blo/errors.hpp"
#include "blo/kernels.hpp"
#include "blo/rng.hpp"

namespace blo {
namespace {

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

void validate(const HypercleanOptions& o) {
  if (o.n_train == 0 || o.n_val == 0 || o.n_features == 0) {
    throw InvalidArgument("hyperclean: dimensions must be positive");
  }
  if (o.n_classes < 2) throw InvalidArgument("hyperclean: need at least two classes");
  if (o.n_features < o.n_classes) {
    throw InvalidArgument("hyperclean: n_features must be >= n_classes for simplex class means");
  }
  if (!(o.corrupt_fraction >= 0.0 && o.corrupt_fraction < 1.0)) {
    throw InvalidArgument("hyperclean: corrupt_fraction must lie in [0, 1)");
  }
  if (o.lq_weight < 0.0) throw InvalidArgument("hyperclean: lq_weight must be nonnegative");
}

LabeledSet draw_set(Rng& rng, std::size_t count, const HypercleanOptions& o) {
  LabeledSet set;
  set.features.reserve(count);
  set.labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t label = rng.index(o.n_classes);
    std::vector<double> u(o.n_features);
    for (std::size_t j = 0; j < o.n_features; ++j) {
      u[j] = (j == label ? o.class_separation : 0.0) + rng.normal();
    }
    set.features.push_back(std::move(u));
    set.labels.push_back(label);
  }
  return set;
}

}  // namespace

HypercleanData make_hyperclean_data(const HypercleanOptions& o) {
  validate(o);
  Rng rng(o.seed);
  HypercleanData data;
  data.train = draw_set(rng, o.n_train, o);
  data.validation = draw_set(rng, o.n_val, o);

  const auto n_corrupt =
      static_cast<std::size_t>(std::llround(o.corrupt_fraction * static_cast<double>(o.n_train)));
  std::vector<std::size_t> order(o.n_train);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < n_corrupt; ++i) {
    const std::size_t j = i + rng.index(o.n_train - i);
    std::swap(order[i], order[j]);
    const std::size_t idx = order[i];
    const std::size_t shift = 1 + rng.index(o.n_classes - 1);
    data.train.labels[idx] = (data.train.labels[idx] + shift) % o.n_classes;
    data.corrupted.push_back(idx);
  }
  std::sort(data.corrupted.begin(), data.corrupted.end());
  return data;
}

std::size_t HypercleanProblem::parameter_count(const HypercleanOptions& o) {
  const std::size_t d = o.n_features;
  const std::size_t c = o.n_classes;
  const std::size_t h = o.n_hidden;
  return h == 0 ? c * (d + 1) : h * (d + 1) + c * (h + 1);
}

HypercleanProblem::HypercleanProblem(const HypercleanOptions& options)
    : BilevelProblem(BoxSet::uniform(options.n_train, -kLargeBox, kLargeBox),
                     BoxSet::uniform(parameter_count(options), -kLargeBox, kLargeBox)),
      options_(options),
      data_(make_hyperclean_data(options)) {
  const std::size_t m = parameter_count(options);
  lq_.q = options.lq_q;
  lq_.eps = Vector(m, 1.0 / std::sqrt(static_cast<double>(m)));
}

double HypercleanProblem::sample_loss(const Vector& y, const std::vector<double>& u,
                                      std::size_t label, double weight, Vector* grad) const {
  const auto& k = kernels::active();
  const std::size_t d = options_.n_features;
  const std::size_t c = options_.n_classes;
  const std::size_t h = options_.n_hidden;

  // Input to the output layer: u itself, or the tanh hidden activations.
  std::vector<double> hidden;
  const double* z = u.data();
  std::size_t zdim = d;
  std::size_t out_offset = 0;
  if (h > 0) {
    hidden.resize(h);
    for (std::size_t j = 0; j < h; ++j) {
      hidden[j] = std::tanh(k.dot(y.data() + j * d, u.data(), d) + y[h * d + j]);
    }
    z = hidden.data();
    zdim = h;
    out_offset = h * (d + 1);
  }
  const double* W = y.data() + out_offset;
  const double* b = W + c * zdim;

  std::vector<double> logits(c);
  for (std::size_t r = 0; r < c; ++r) logits[r] = k.dot(W + r * zdim, z, zdim) + b[r];
  const double mx = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double l : logits) denom += std::exp(l - mx);
  const double loss = std::log(denom) + mx - logits[label];

  if (grad != nullptr && weight != 0.0) {
    std::vector<double> dlogit(c);
    for (std::size_t r = 0; r < c; ++r) {
      dlogit[r] = weight * (std::exp(logits[r] - mx) / denom - (r == label ? 1.0 : 0.0));
    }
    double* gW = grad->data() + out_offset;
    double* gb = gW + c * zdim;
    for (std::size_t r = 0; r < c; ++r) {
      k.axpy(dlogit[r], z, gW + r * zdim, zdim);
      gb[r] += dlogit[r];
    }
    if (h > 0) {
      for (std::size_t j = 0; j < h; ++j) {
        double dh = 0.0;
        for (std::size_t r = 0; r < c; ++r) dh += W[r * zdim + j] * dlogit[r];
        const double da = dh * (1.0 - hidden[j] * hidden[j]);
        k.axpy(da, u.data(), grad->data() + j * d, d);
        (*grad)[h * d + j] += da;
      }
    }
  }
  return loss;
}

double HypercleanProblem::upper(const Vector&, const Vector& y) const {
  const auto& val = data_.validation;
  double s = 0.0;
  for (std::size_t i = 0; i < val.labels.size(); ++i) {
    s += sample_loss(y, val.features[i], val.labels[i], 0.0, nullptr);
  }
  return s / static_cast<double>(val.labels.size());
}

double HypercleanProblem::lower(const Vector& x, const Vector& y) const {
  const auto& tr = data_.train;
  double s = 0.0;
  for (std::size_t i = 0; i < tr.labels.size(); ++i) {
    s += sigmoid(x[i]) * sample_loss(y, tr.features[i], tr.labels[i], 0.0, nullptr);
  }
  s /= static_cast<double>(tr.labels.size());
  if (options_.lq_weight > 0.0) s += options_.lq_weight * lq_penalty(y, lq_);
  return s;
}

double HypercleanProblem::train_loss(const Vector& y) const {
  const auto& tr = data_.train;
  double s = 0.0;
  for (std::size_t i = 0; i < tr.labels.size(); ++i) {
    s += sample_loss(y, tr.features[i], tr.labels[i], 0.0, nullptr);
  }
  return s / static_cast<double>(tr.labels.size());
}

Vector HypercleanProblem::grad_x_upper(const Vector&, const Vector&) const {
  return Vector(upper_dim());
}

Vector HypercleanProblem::grad_y_upper(const Vector&, const Vector& y) const {
  const auto& val = data_.validation;
  Vector g(lower_dim());
  const double w = 1.0 / static_cast<double>(val.labels.size());
  for (std::size_t i = 0; i < val.labels.size(); ++i) {
    sample_loss(y, val.features[i], val.labels[i], w, &g);
  }
  return g;
}

Vector HypercleanProblem::grad_y_lower(const Vector& x, const Vector& y) const {
  const auto& tr = data_.train;
  Vector g(lower_dim());
  const double inv_n = 1.0 / static_cast<double>(tr.labels.size());
  for (std::size_t i = 0; i < tr.labels.size(); ++i) {
    sample_loss(y, tr.features[i], tr.labels[i], sigmoid(x[i]) * inv_n, &g);
  }
  if (options_.lq_weight > 0.0) axpy(options_.lq_weight, lq_penalty_gradient(y, lq_), g);
  return g;
}

std::optional<Vector> HypercleanProblem::grad_x_lower(const Vector& x, const Vector& y) const {
  const auto& tr = data_.train;
  Vector g(upper_dim());
  const double inv_n = 1.0 / static_cast<double>(tr.labels.size());
  for (std::size_t i = 0; i < tr.labels.size(); ++i) {
    const double s = sigmoid(x[i]);
    g[i] = s * (1.0 - s) * inv_n * sample_loss(y, tr.features[i], tr.labels[i], 0.0, nullptr);
  }
  return g;
}

Vector HypercleanProblem::hvp_xy_lower(const Vector& x, const Vector& y, const Vector& v) const {
  const auto& tr = data_.train;
  Vector out(upper_dim());
  Vector gi(lower_dim());
  const double inv_n = 1.0 / static_cast<double>(tr.labels.size());
  for (std::size_t i = 0; i < tr.labels.size(); ++i) {
    std::fill(gi.begin(), gi.end(), 0.0);
    sample_loss(y, tr.features[i], tr.labels[i], 1.0, &gi);
    const double s = sigmoid(x[i]);
    out[i] = s * (1.0 - s) * inv_n * dot(gi, v);
  }
  return out;
}

Vector HypercleanProblem::initial_parameters(std::uint64_t seed) const {
  Rng rng(seed);
  Vector y(lower_dim());
  for (double& v : y) v = 0.1 * rng.normal();
  return y;
}

ProblemPtr synthetic_hyperclean(const HypercleanOptions& options) {
  return std::make_shared<HypercleanProblem>(options);
}

}  // namespace blo
