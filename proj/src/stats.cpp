#include "echobeat/stats.hpp"

#include "echobeat/error.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

namespace echobeat {

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double mae_raw(const std::vector<double>& pred, const std::vector<double>& ref) {
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - ref[i]);
  return sum / static_cast<double>(pred.size());
}

double bias_raw(const std::vector<double>& pred, const std::vector<double>& ref) {
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += pred[i] - ref[i];
  return sum / static_cast<double>(pred.size());
}

double pearson_sq_raw(const std::vector<double>& pred, const std::vector<double>& ref) {
  const double mp = mean_of(pred);
  const double mr = mean_of(ref);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double dp = pred[i] - mp;
    const double dr = ref[i] - mr;
    sxy += dp * dr;
    sxx += dp * dp;
    syy += dr * dr;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw Error(ErrorCode::DegenerateVariance, "correlation undefined for a constant series");
  }
  return std::min(1.0, (sxy * sxy) / (sxx * syy));
}

double cod_raw(const std::vector<double>& pred, const std::vector<double>& ref) {
  const double mr = mean_of(ref);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ss_res += (ref[i] - pred[i]) * (ref[i] - pred[i]);
    ss_tot += (ref[i] - mr) * (ref[i] - mr);
  }
  if (!(ss_tot > 0.0)) {
    if (ss_res == 0.0) return 1.0;
    throw Error(ErrorCode::DegenerateVariance, "coefficient of determination undefined for constant reference");
  }
  return 1.0 - ss_res / ss_tot;
}

double statistic_raw(Statistic stat, const std::vector<double>& pred, const std::vector<double>& ref) {
  switch (stat) {
    case Statistic::Mae: return mae_raw(pred, ref);
    case Statistic::Bias: return bias_raw(pred, ref);
    case Statistic::R2: return pearson_sq_raw(pred, ref);
  }
  return 0.0;
}

struct ThresholdGroup {
  double score;
  std::size_t pos;
  std::size_t neg;
};

// Distinct scores in descending order with their class counts.
std::vector<ThresholdGroup> group_by_score(const ScoredLabels& d) {
  std::vector<std::size_t> order(d.scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return d.scores[a] > d.scores[b]; });
  std::vector<ThresholdGroup> groups;
  for (std::size_t i : order) {
    if (groups.empty() || d.scores[i] != groups.back().score) groups.push_back({d.scores[i], 0, 0});
    (d.labels[i] == 1 ? groups.back().pos : groups.back().neg) += 1;
  }
  return groups;
}

}  // namespace

void PairedSample::validate() const {
  if (pred.size() != ref.size() || (!ids.empty() && ids.size() != pred.size())) {
    throw Error(ErrorCode::LengthMismatch, "pred, ref and ids must have equal lengths",
                {{"pred", std::to_string(pred.size())}, {"ref", std::to_string(ref.size())},
                 {"ids", std::to_string(ids.size())}});
  }
  if (pred.size() < 2) {
    throw Error(ErrorCode::LengthMismatch, "a paired sample needs at least two pairs",
                {{"n", std::to_string(pred.size())}});
  }
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!std::isfinite(pred[i]) || !std::isfinite(ref[i])) {
      throw Error(ErrorCode::InvalidConfig, "paired sample contains a non-finite value",
                  {{"position", std::to_string(i)}});
    }
  }
}

double mae(const PairedSample& s) {
  s.validate();
  return mae_raw(s.pred, s.ref);
}

double bias(const PairedSample& s) {
  s.validate();
  return bias_raw(s.pred, s.ref);
}

double r_squared(const PairedSample& s, RSquaredMode mode) {
  s.validate();
  return mode == RSquaredMode::PearsonSq ? pearson_sq_raw(s.pred, s.ref) : cod_raw(s.pred, s.ref);
}

std::string_view to_string(Statistic s) {
  switch (s) {
    case Statistic::Mae: return "mae";
    case Statistic::R2: return "r2";
    case Statistic::Bias: return "bias";
  }
  return "unknown";
}

void BootstrapConfig::validate() const {
  if (n_resamples < 1) throw Error(ErrorCode::InvalidConfig, "n_resamples must be >= 1");
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "bootstrap level must lie in (0, 1)",
                {{"level", std::to_string(level)}});
  }
}

double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::LengthMismatch, "percentile of an empty sample");
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

Interval bootstrap_ci(const PairedSample& s, Statistic statistic, const BootstrapConfig& cfg) {
  s.validate();
  cfg.validate();
  Interval out;
  out.n = s.size();
  out.n_resamples = cfg.n_resamples;
  out.point = statistic_raw(statistic, s.pred, s.ref);

  const std::size_t n = s.size();
  std::vector<double> values(cfg.n_resamples, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::exception_ptr> failures;
  std::mutex failures_mutex;

  auto work = [&](std::size_t begin, std::size_t end) {
    try {
      std::vector<double> pred(n), ref(n);
      for (std::size_t r = begin; r < end; ++r) {
        std::mt19937_64 rng(derive_seed(cfg.seed, r));
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t j = pick(rng);
          pred[i] = s.pred[j];
          ref[i] = s.ref[j];
        }
        try {
          values[r] = statistic_raw(statistic, pred, ref);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::DegenerateVariance) throw;
        }
      }
    } catch (...) {
      std::lock_guard lock(failures_mutex);
      failures.push_back(std::current_exception());
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(cfg.jobs, 1, cfg.n_resamples);
  if (workers == 1) {
    work(0, cfg.n_resamples);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (cfg.n_resamples + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(cfg.n_resamples, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }
  if (!failures.empty()) std::rethrow_exception(failures.front());

  std::vector<double> valid;
  valid.reserve(values.size());
  for (double v : values) {
    if (std::isnan(v)) {
      ++out.n_skipped;
    } else {
      valid.push_back(v);
    }
  }
  if (out.n_skipped * 100 > cfg.n_resamples || valid.empty()) {
    throw Error(ErrorCode::BootstrapDegenerate, "too many bootstrap resamples were degenerate",
                {{"skipped", std::to_string(out.n_skipped)},
                 {"n_resamples", std::to_string(cfg.n_resamples)}});
  }
  std::sort(valid.begin(), valid.end());
  const double tail = (1.0 - cfg.level) / 2.0;
  out.lo = percentile(valid, tail);
  out.hi = percentile(valid, 1.0 - tail);
  return out;
}

void ScoredLabels::validate() const {
  if (scores.size() != labels.size() || (!ids.empty() && ids.size() != scores.size())) {
    throw Error(ErrorCode::LengthMismatch, "scores, labels and ids must have equal lengths",
                {{"scores", std::to_string(scores.size())},
                 {"labels", std::to_string(labels.size())}});
  }
  std::size_t pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw Error(ErrorCode::InvalidConfig, "labels must be 0 or 1",
                  {{"position", std::to_string(i)}, {"label", std::to_string(labels[i])}});
    }
    if (!std::isfinite(scores[i])) {
      throw Error(ErrorCode::InvalidConfig, "score is not finite", {{"position", std::to_string(i)}});
    }
    pos += static_cast<std::size_t>(labels[i]);
  }
  if (pos == 0 || pos == labels.size()) {
    throw Error(ErrorCode::SingleClass, "both classes must be present",
                {{"positives", std::to_string(pos)}, {"n", std::to_string(labels.size())}});
  }
}

RocCurve roc_auc(const ScoredLabels& d) {
  d.validate();
  RocCurve out;
  const auto groups = group_by_score(d);
  for (const auto& g : groups) {
    out.n_pos += g.pos;
    out.n_neg += g.neg;
  }

  // Mann-Whitney U from the descending groups: each positive beats every
  // negative in lower groups and ties half of those in its own group.
  double u = 0.0;
  std::size_t neg_below = out.n_neg;
  std::size_t tp = 0, fp = 0;
  out.points.push_back(RocPoint{});
  for (const auto& g : groups) {
    neg_below -= g.neg;
    u += static_cast<double>(g.pos) * (static_cast<double>(neg_below) + 0.5 * static_cast<double>(g.neg));
    tp += g.pos;
    fp += g.neg;
    out.points.push_back(RocPoint{g.score, static_cast<double>(fp) / static_cast<double>(out.n_neg),
                                  static_cast<double>(tp) / static_cast<double>(out.n_pos)});
  }
  out.auc = u / (static_cast<double>(out.n_pos) * static_cast<double>(out.n_neg));
  return out;
}

PrCurve precision_recall(const ScoredLabels& d) {
  d.validate();
  PrCurve out;
  const auto groups = group_by_score(d);
  std::size_t n_pos = 0;
  for (const auto& g : groups) n_pos += g.pos;

  std::size_t tp = 0, fp = 0;
  double prev_recall = 0.0;
  for (const auto& g : groups) {
    tp += g.pos;
    fp += g.neg;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    out.average_precision += (recall - prev_recall) * precision;
    prev_recall = recall;
    out.points.push_back(PrPoint{g.score, precision, recall});
  }
  return out;
}

TestRetest test_retest(const PairedSample& pairs) {
  pairs.validate();
  TestRetest out;
  const std::size_t n = pairs.size();
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = pairs.pred[i] - pairs.ref[i];
  out.bias = mean_of(diff);
  double ss = 0.0;
  for (double d : diff) {
    out.mae += std::abs(d);
    ss += (d - out.bias) * (d - out.bias);
  }
  out.mae /= static_cast<double>(n);
  out.sd_of_diff = std::sqrt(ss / static_cast<double>(n - 1));
  return out;
}

}  // namespace echobeat
