#pragma once

#include "c4out/copula_gen.hpp"
#include "c4out/detectors.hpp"
#include "c4out/io.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace c4out {

enum class DetectorSelection { c4, rx, both };

DetectorSelection parse_detector_selection(const std::string& s);
std::string to_string(DetectorSelection d);

struct BetaGrid
{
  double start = 1.0;
  double stop = 5.0;
  double step = 0.25;

  std::vector<double> values() const;
  /// Parses "start:stop:step" or a single value.
  static BetaGrid parse(const std::string& s);
};

struct ExperimentConfig
{
  Index t = 1000;
  Index tau = 100;
  Index n = 30;
  int nu_c = 6;
  double nu_u = 6.0;
  Index r = 3;
  BetaGrid beta_grid;
  std::vector<std::uint64_t> seeds{1};
  DetectorSelection detectors = DetectorSelection::both;
  unsigned threads = 1;

  void validate() const;
  static ExperimentConfig from_json(const json& j);
  json to_json() const;
};

/// RX sweep: thresholds at the score quantiles k/(K+1), k = 1..K, where K is
/// the beta grid size. The sweep parameter recorded is the quantile level.
std::vector<SweepPoint> rx_quantile_sweep(const DataMatrix& X, std::size_t count);

std::vector<SweepPoint> c4_beta_sweep(const DataMatrix& X, std::span<const double> betas, Index r);

struct SeedReport
{
  std::uint64_t seed = 0;
  std::map<std::string, RocCurve> curves; // keyed "c4" / "rx"
};

struct AggregatePoint
{
  double param = 0;
  double mean_fpr = 0;
  double mean_tpr = 0;
  double median_fpr = 0;
  double median_tpr = 0;
};

struct DetectorAggregate
{
  double mean_auc = 0;
  double median_auc = 0;
  std::vector<AggregatePoint> points; // in sweep-parameter order
};

struct ExperimentReport
{
  ExperimentConfig config;
  std::vector<SeedReport> per_seed; // sorted by seed
  std::map<std::string, DetectorAggregate> aggregate;

  json to_json() const;
};

/// Generates one dataset per seed, sweeps the selected detectors and
/// aggregates the ROC curves. Seeds run on up to config.threads workers; the
/// report does not depend on the thread count or the seed order.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Timestamped positive prices; one column per asset.
struct PriceSeries
{
  std::vector<std::string> timestamps;
  std::vector<std::string> assets;
  Eigen::MatrixXd prices;
};

/// CSV with header `<time>,<asset>...`; rows strictly increasing in time.
/// Timestamps compare numerically when both parse as numbers, lexically otherwise.
PriceSeries ingest_prices(std::istream& is);

/// Row j is log(price_{j+1}) - log(price_j) per asset.
DataMatrix log_increments(const PriceSeries& prices);

} // namespace c4out
