#include "echobeat/labels.hpp"

#include "echobeat/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace echobeat {

namespace {

template <typename T>
void check_same_size(std::span<const T> pred, std::span<const T> label) {
  if (pred.size() != label.size()) {
    throw Error(ErrorCode::ShapeMismatch, "prediction and label sizes differ",
                {{"pred", std::to_string(pred.size())}, {"label", std::to_string(label.size())}});
  }
  if (pred.empty()) throw Error(ErrorCode::ShapeMismatch, "loss over an empty tensor");
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "alpha must lie in [0, 1]",
                {{"alpha", std::to_string(alpha)}});
  }
}

template <typename T>
double weighted_mse_impl(std::span<const T> pred, std::span<const T> label, double alpha) {
  check_same_size(pred, label);
  check_alpha(alpha);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double y = label[i];
    const double r = y - static_cast<double>(pred[i]);
    sum += (alpha * (1.0 - y) + (1.0 - alpha) * y) * r * r;
  }
  return sum / static_cast<double>(pred.size());
}

template <typename T>
std::vector<double> weighted_mse_grad_impl(std::span<const T> pred, std::span<const T> label,
                                           double alpha) {
  check_same_size(pred, label);
  check_alpha(alpha);
  const double scale = 2.0 / static_cast<double>(pred.size());
  std::vector<double> grad(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double y = label[i];
    grad[i] = scale * (alpha * (1.0 - y) + (1.0 - alpha) * y) * (static_cast<double>(pred[i]) - y);
  }
  return grad;
}

std::size_t clamp_round(double v, std::size_t upper) {
  const double r = std::round(v);  // half away from zero
  if (!(r > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(r), upper);
}

}  // namespace

void JitterConfig::validate() const {
  if (!(std::isfinite(sigma) && sigma >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "jitter sigma must be finite and >= 0",
                {{"sigma", std::to_string(sigma)}});
  }
}

void LossConfig::validate() const {
  check_alpha(alpha);
  if (!(std::isfinite(lambda_aux) && lambda_aux >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "lambda_aux must be finite and >= 0",
                {{"lambda_aux", std::to_string(lambda_aux)}});
  }
}

std::pair<std::size_t, std::size_t> nearest_pixel(Point2 p, Extent extent) {
  return {clamp_round(p.y, extent.height - 1), clamp_round(p.x, extent.width - 1)};
}

LabelImage rasterize(const PointQuad& points, Extent extent, const JitterConfig& jitter) {
  jitter.validate();
  if (extent.height == 0 || extent.width == 0) {
    throw Error(ErrorCode::InvalidExtent, "label extent must be positive");
  }
  std::mt19937_64 rng(jitter.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  LabelImage label(extent);
  for (Channel c : kChannels) {
    Point2 p = points[index(c)];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorCode::InvalidConfig, "label point is not finite",
                  {{"channel", std::string(channel_name(c))}});
    }
    if (jitter.sigma > 0.0) {
      p.x += jitter.sigma * noise(rng);
      p.y += jitter.sigma * noise(rng);
    }
    const auto [row, col] = nearest_pixel(p, extent);
    label.at(c, row, col) = 1.0f;
  }
  return label;
}

double weighted_mse(std::span<const float> pred, std::span<const float> label, double alpha) {
  return weighted_mse_impl(pred, label, alpha);
}

double weighted_mse(std::span<const double> pred, std::span<const double> label, double alpha) {
  return weighted_mse_impl(pred, label, alpha);
}

std::vector<double> weighted_mse_grad(std::span<const float> pred, std::span<const float> label,
                                      double alpha) {
  return weighted_mse_grad_impl(pred, label, alpha);
}

std::vector<double> weighted_mse_grad(std::span<const double> pred,
                                      std::span<const double> label, double alpha) {
  return weighted_mse_grad_impl(pred, label, alpha);
}

Point2 soft_centroid(std::span<const float> channel, Extent extent, CentroidWeighting weighting) {
  if (channel.size() != extent.pixels()) {
    throw Error(ErrorCode::ShapeMismatch, "channel size does not match extent");
  }
  double peak = 0.0;
  if (weighting == CentroidWeighting::Exponential) {
    for (float v : channel) peak = std::max(peak, static_cast<double>(v));
  }
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t row = 0; row < extent.height; ++row) {
    for (std::size_t col = 0; col < extent.width; ++col) {
      const double a = std::max(0.0, static_cast<double>(channel[row * extent.width + col]));
      const double w = weighting == CentroidWeighting::Linear ? a : std::exp(a - peak);
      sw += w;
      sx += w * static_cast<double>(col);
      sy += w * static_cast<double>(row);
    }
  }
  if (!(sw > 0.0)) throw Error(ErrorCode::EmptyChannel, "channel has no positive activation");
  return Point2{sx / sw, sy / sw};
}

AugmentedLoss augmented_loss(FrameView pred, FrameView label, const PointQuad& true_points,
                             const Calibration& cal, const LossConfig& cfg) {
  cfg.validate();
  if (pred.extent() != label.extent()) {
    throw Error(ErrorCode::ShapeMismatch, "prediction and label extents differ");
  }
  AugmentedLoss out;
  out.weighted_mse = weighted_mse(pred.values(), label.values(), cfg.alpha);

  PointQuad centroids;
  for (Channel c : kChannels) {
    try {
      centroids[index(c)] = soft_centroid(pred.channel(c), pred.extent(), cfg.centroid);
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), {{"channel", std::string(channel_name(c))}});
    }
    const Point2 d{centroids[index(c)].x - true_points[index(c)].x,
                   centroids[index(c)].y - true_points[index(c)].y};
    out.location_term += d.x * d.x + d.y * d.y;
  }

  const MeasurementTriple got = measure(centroids, cal);
  const MeasurementTriple want = measure(true_points, cal);
  out.measurement_term = (got.ivs - want.ivs) * (got.ivs - want.ivs) +
                         (got.lvid - want.lvid) * (got.lvid - want.lvid) +
                         (got.lvpw - want.lvpw) * (got.lvpw - want.lvpw);

  out.total = out.weighted_mse + cfg.lambda_aux * (out.location_term + out.measurement_term);
  return out;
}

}  // namespace echobeat
