#pragma once

#include "echobeat/geometry.hpp"
#include "echobeat/heatmap.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace echobeat {

struct JitterConfig {
  double sigma = 2.0;  // px, isotropic
  std::uint64_t seed = 0;

  void validate() const;
};

/// Displaces each point by N(0, sigma^2) per axis (seeded), then sets the
/// nearest pixel (round half away from zero, clamped into the image) of its
/// channel to 1. All other pixels are 0.
LabelImage rasterize(const PointQuad& points, Extent extent, const JitterConfig& jitter);

/// Pixel a continuous coordinate rasterizes to; returns {row, col}.
std::pair<std::size_t, std::size_t> nearest_pixel(Point2 p, Extent extent);

enum class CentroidWeighting { Linear, Exponential };

struct LossConfig {
  double alpha = 0.001;
  double lambda_aux = 0.001;
  CentroidWeighting centroid = CentroidWeighting::Linear;

  void validate() const;
};

/// Weighted MSE: (1/n) sum [alpha (1-y)(y-p)^2 + (1-alpha) y (y-p)^2].
/// Throws ShapeMismatch when sizes differ.
double weighted_mse(std::span<const float> pred, std::span<const float> label, double alpha);
double weighted_mse(std::span<const double> pred, std::span<const double> label, double alpha);

/// d loss / d pred_i = (2/n) [alpha (1-y_i) + (1-alpha) y_i] (pred_i - y_i).
std::vector<double> weighted_mse_grad(std::span<const float> pred, std::span<const float> label,
                                      double alpha);
std::vector<double> weighted_mse_grad(std::span<const double> pred,
                                      std::span<const double> label, double alpha);

/// Activation-weighted mean pixel position of one channel after clamping at
/// zero. Exponential weighting uses exp(a - max a) over the clamped values.
/// Throws EmptyChannel when the clamped activations sum to zero.
Point2 soft_centroid(std::span<const float> channel, Extent extent,
                     CentroidWeighting weighting = CentroidWeighting::Linear);

struct AugmentedLoss {
  double weighted_mse = 0.0;
  double location_term = 0.0;     // sum of squared centroid offsets, px^2
  double measurement_term = 0.0;  // sum of squared length errors, cm^2
  double total = 0.0;
};

/// weighted_mse + lambda_aux * (location_term + measurement_term).
AugmentedLoss augmented_loss(FrameView pred, FrameView label, const PointQuad& true_points,
                             const Calibration& cal, const LossConfig& cfg);

}  // namespace echobeat
