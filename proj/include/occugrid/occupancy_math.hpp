#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "occugrid/geometry.hpp"
#include "occugrid/occupancy_grid.hpp"

namespace occugrid {

// Grid-shaped real tensor with C trailing channels; shape bookkeeping only,
// the math below is flat.
struct FeatureTensor {
  Space space = Space::FRUSTUM;
  std::array<int, 3> dims{};
  int channels = 1;
  std::vector<double> values;  // dims[0]*dims[1]*dims[2]*channels

  std::size_t cell_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }

  static FeatureTensor zeros(Space space, std::array<int, 3> dims, int channels) {
    FeatureTensor t;
    t.space = space;
    t.dims = dims;
    t.channels = channels;
    t.values.assign(t.cell_count() * channels, 0.0);
    return t;
  }
};

// Per-cell occupancy probabilities in [0, 1].
struct OccupancyField {
  Space space = Space::FRUSTUM;
  std::array<int, 3> dims{};
  std::vector<double> values;

  std::size_t cell_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
};

struct MaskGrid {
  std::array<int, 3> dims{};
  std::vector<bool> values;  // true exactly where label > -1
};

inline MaskGrid valid_mask(const OccupancyLabelGrid& labels) {
  MaskGrid m;
  m.dims = labels.dims;
  m.values.resize(labels.values.size());
  for (std::size_t i = 0; i < labels.values.size(); ++i)
    m.values[i] = labels.values[i] > kUnknown;
  return m;
}

struct LossConfig {
  double alpha = 0.25;  // focal balance
  double gamma = 2.0;   // focusing exponent
  double lambda = 1.0;  // occupancy loss weight

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("loss: alpha outside (0,1)");
    if (!(gamma >= 0.0)) throw ArgumentError("loss: gamma must be >= 0");
  }
};

inline double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

inline OccupancyField sigmoid_field(const OccupancyField& logits) {
  OccupancyField out = logits;
  for (double& v : out.values) v = stable_sigmoid(v);
  return out;
}

// out[..., c] = occ[...] * features[..., c]
inline FeatureTensor gate_features(const FeatureTensor& features,
                                   const OccupancyField& occ) {
  if (features.dims != occ.dims || features.space != occ.space)
    throw ArgumentError("gate_features: grid shape mismatch");
  FeatureTensor out = features;
  const int C = features.channels;
  for (std::size_t cell = 0; cell < occ.values.size(); ++cell)
    for (int c = 0; c < C; ++c) out.values[cell * C + c] *= occ.values[cell];
  return out;
}

struct GateGradients {
  FeatureTensor d_features;
  OccupancyField d_occ;
};

// Backward pass of the Hadamard gate given the upstream gradient.
inline GateGradients gate_features_backward(const FeatureTensor& features,
                                            const OccupancyField& occ,
                                            const FeatureTensor& grad_out) {
  if (features.dims != occ.dims || grad_out.dims != features.dims ||
      grad_out.channels != features.channels)
    throw ArgumentError("gate_features_backward: shape mismatch");
  GateGradients g;
  g.d_features = features;
  g.d_occ = occ;
  const int C = features.channels;
  for (std::size_t cell = 0; cell < occ.values.size(); ++cell) {
    double acc = 0.0;
    for (int c = 0; c < C; ++c) {
      g.d_features.values[cell * C + c] = occ.values[cell] * grad_out.values[cell * C + c];
      acc += features.values[cell * C + c] * grad_out.values[cell * C + c];
    }
    g.d_occ.values[cell] = acc;
  }
  return g;
}

struct FocalLossResult {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d pred, same length as pred
  bool all_unknown = false;
};

constexpr double kProbClamp = 1e-7;

// Masked focal loss, mean-reduced over known cells. Unknown cells contribute
// exactly zero loss and zero gradient.
inline FocalLossResult focal_loss_masked(const OccupancyField& pred,
                                         const OccupancyLabelGrid& labels,
                                         const LossConfig& cfg) {
  cfg.validate();
  if (pred.dims != labels.dims)
    throw ArgumentError("focal_loss_masked: shape mismatch");

  FocalLossResult res;
  res.grad.assign(pred.values.size(), 0.0);
  std::size_t known = 0;
  for (std::int8_t l : labels.values)
    if (l > kUnknown) ++known;
  if (known == 0) {
    res.all_unknown = true;
    return res;
  }

  double sum = 0.0;
  const double a = cfg.alpha, g = cfg.gamma;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    std::int8_t l = labels.values[i];
    if (l <= kUnknown) continue;
    double p = std::clamp(pred.values[i], kProbClamp, 1.0 - kProbClamp);
    bool clamped = pred.values[i] < kProbClamp || pred.values[i] > 1.0 - kProbClamp;
    double cell_loss, cell_grad;
    if (l == kOccupied) {
      double q = 1.0 - p;
      double w = std::pow(q, g);
      cell_loss = a * w * (-std::log(p));
      double dw = (g > 0.0) ? g * std::pow(q, g - 1.0) : 0.0;
      cell_grad = a * (dw * std::log(p) - w / p);
    } else {
      double w = std::pow(p, g);
      cell_loss = (1.0 - a) * w * (-std::log(1.0 - p));
      double dw = (g > 0.0) ? g * std::pow(p, g - 1.0) : 0.0;
      cell_grad = (1.0 - a) * (-dw * std::log(1.0 - p) + w / (1.0 - p));
    }
    sum += cell_loss;
    res.grad[i] = clamped ? 0.0 : cell_grad / static_cast<double>(known);
  }
  res.loss = sum / static_cast<double>(known);
  return res;
}

inline double occupancy_loss_total(double loss_fru, double loss_3d) {
  return loss_fru + loss_3d;
}

inline double total_loss(double l_org, double l_occupancy, const LossConfig& cfg) {
  return l_org + cfg.lambda * l_occupancy;
}

// Central finite differences against an analytic gradient; returns the max
// relative error over coordinates.
inline double finite_difference_check(
    const std::function<double(const std::vector<double>&)>& f,
    const std::function<std::vector<double>(const std::vector<double>&)>& grad,
    const std::vector<double>& point, double step) {
  std::vector<double> analytic = grad(point);
  double max_rel = 0.0;
  std::vector<double> x = point;
  for (std::size_t i = 0; i < point.size(); ++i) {
    x[i] = point[i] + step;
    double fp = f(x);
    x[i] = point[i] - step;
    double fm = f(x);
    x[i] = point[i];
    double numeric = (fp - fm) / (2.0 * step);
    double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-12});
    max_rel = std::max(max_rel, std::abs(numeric - analytic[i]) / denom);
  }
  return max_rel;
}

}  // namespace occugrid
