#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace echobeat {

/// Model predictions paired with reference values, one pair per study.
struct PairedSample {
  std::vector<std::string> ids;  // may be empty; otherwise one per pair
  std::vector<double> pred;
  std::vector<double> ref;

  std::size_t size() const noexcept { return pred.size(); }
  /// Throws LengthMismatch for unequal lengths or fewer than two pairs.
  void validate() const;
};

double mae(const PairedSample& s);
/// Mean of pred - ref.
double bias(const PairedSample& s);

enum class RSquaredMode { PearsonSq, Cod };

/// PEARSON_SQ: squared correlation; COD: 1 - SS_res / SS_tot.
/// Throws DegenerateVariance when the quantity is undefined.
double r_squared(const PairedSample& s, RSquaredMode mode);

enum class Statistic { Mae, R2, Bias };
std::string_view to_string(Statistic s);

struct BootstrapConfig {
  std::size_t n_resamples = 10'000;
  double level = 0.95;
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  void validate() const;
};

struct Interval {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
  std::size_t n_resamples = 0;
  std::size_t n_skipped = 0;
};

/// Linear interpolation between order statistics of an ascending sample.
double percentile(const std::vector<double>& sorted, double q);

/// Percentile bootstrap over pairs. Resample r draws from its own RNG stream
/// derived from (seed, r), so results do not depend on `jobs`. Resamples on
/// which the statistic is undefined are skipped; more than 1% skipped throws
/// BootstrapDegenerate.
Interval bootstrap_ci(const PairedSample& s, Statistic statistic, const BootstrapConfig& cfg);

struct ScoredLabels {
  std::vector<std::string> ids;
  std::vector<double> scores;
  std::vector<int> labels;  // 0 or 1

  /// Throws LengthMismatch, InvalidConfig (label not 0/1) or SingleClass.
  void validate() const;
};

struct RocPoint {
  double threshold = std::numeric_limits<double>::infinity();
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  double auc = 0.0;
  std::vector<RocPoint> points;  // starts at (0, 0) with threshold +inf
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

/// Mann-Whitney AUC (ties count one half) and the curve at every distinct threshold.
RocCurve roc_auc(const ScoredLabels& d);

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct PrCurve {
  double average_precision = 0.0;
  std::vector<PrPoint> points;  // descending threshold
};

/// AP = sum_k (R_k - R_{k-1}) P_k over distinct thresholds.
PrCurve precision_recall(const ScoredLabels& d);

struct TestRetest {
  double mae = 0.0;
  double bias = 0.0;
  double sd_of_diff = 0.0;
};

/// Repeat-measurement variability of `second - first`, using pred as the
/// second reading and ref as the first.
TestRetest test_retest(const PairedSample& pairs);

}  // namespace echobeat
