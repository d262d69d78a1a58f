#include "c4out/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <istream>
#include <mutex>
#include <thread>

namespace c4out {

DetectorSelection parse_detector_selection(const std::string& s)
{
  if (s == "c4")
    return DetectorSelection::c4;
  if (s == "rx")
    return DetectorSelection::rx;
  if (s == "both")
    return DetectorSelection::both;
  throw UsageError("unknown detector '" + s + "' (expected c4, rx or both)");
}

std::string to_string(DetectorSelection d)
{
  switch (d) {
    case DetectorSelection::c4: return "c4";
    case DetectorSelection::rx: return "rx";
    case DetectorSelection::both: return "both";
  }
  return "both";
}

std::vector<double> BetaGrid::values() const
{
  if (!(step > 0.0) || !(stop >= start) || !std::isfinite(start) || !std::isfinite(stop))
    throw DomainError("beta grid must be ascending with a positive step");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k)
    out[k] = start + static_cast<double>(k) * step;
  return out;
}

BetaGrid BetaGrid::parse(const std::string& s)
{
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    const auto colon = s.find(':', pos);
    parts.push_back(s.substr(pos, colon == std::string::npos ? std::string::npos : colon - pos));
    if (colon == std::string::npos)
      break;
    pos = colon + 1;
  }
  BetaGrid g;
  if (parts.size() == 1) {
    g.start = g.stop = parse_double(parts[0], "beta grid");
    g.step = 1.0;
  } else if (parts.size() == 3) {
    g.start = parse_double(parts[0], "beta grid start");
    g.stop = parse_double(parts[1], "beta grid stop");
    g.step = parse_double(parts[2], "beta grid step");
  } else {
    throw UsageError("beta grid must be 'start:stop:step' or a single value, got '" + s + "'");
  }
  g.values();
  return g;
}

void ExperimentConfig::validate() const
{
  if (n < 2)
    throw DomainError("experiment needs n >= 2");
  if (!(tau > 0 && 2 * tau < t))
    throw DomainError("tau must satisfy 0 < tau < t/2");
  if (r < 1 || r > n)
    throw DomainError("r must lie in [1, n]");
  if (nu_c < 3 || !(nu_u > 4.0))
    throw DomainError("need nu_c >= 3 and nu_u > 4");
  if (seeds.empty())
    throw DomainError("seed list is empty");
  if (beta_grid.values().empty())
    throw DomainError("beta grid is empty");
  for (double b : beta_grid.values())
    if (!(b > 0.0))
      throw DomainError("beta values must be positive");
}

ExperimentConfig ExperimentConfig::from_json(const json& j)
{
  ExperimentConfig c;
  try {
    if (j.contains("t")) c.t = j.at("t").get<Index>();
    if (j.contains("tau")) c.tau = j.at("tau").get<Index>();
    if (j.contains("n")) c.n = j.at("n").get<Index>();
    if (j.contains("nu_c")) c.nu_c = j.at("nu_c").get<int>();
    if (j.contains("nu_u")) c.nu_u = j.at("nu_u").get<double>();
    if (j.contains("r")) c.r = j.at("r").get<Index>();
    if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
    if (j.contains("detector")) c.detectors = parse_detector_selection(j.at("detector").get<std::string>());
    if (j.contains("beta_grid")) {
      const json& g = j.at("beta_grid");
      if (g.is_string()) {
        c.beta_grid = BetaGrid::parse(g.get<std::string>());
      } else {
        c.beta_grid.start = g.at("start").get<double>();
        c.beta_grid.stop = g.at("stop").get<double>();
        c.beta_grid.step = g.at("step").get<double>();
      }
    }
    if (j.contains("seeds")) {
      const json& s = j.at("seeds");
      c.seeds.clear();
      if (s.is_array()) {
        for (const json& v : s)
          c.seeds.push_back(v.get<std::uint64_t>());
      } else {
        const auto count = s.get<std::uint64_t>();
        for (std::uint64_t k = 1; k <= count; ++k)
          c.seeds.push_back(k);
      }
    }
  } catch (const json::exception& ex) {
    throw DomainError(std::string("malformed experiment config: ") + ex.what());
  }
  return c;
}

json ExperimentConfig::to_json() const
{
  return json{{"t", t},
              {"tau", tau},
              {"n", n},
              {"nu_c", nu_c},
              {"nu_u", nu_u},
              {"r", r},
              {"beta_grid", {{"start", beta_grid.start}, {"stop", beta_grid.stop}, {"step", beta_grid.step}}},
              {"seeds", seeds},
              {"detector", to_string(detectors)}};
}

std::vector<SweepPoint> rx_quantile_sweep(const DataMatrix& X, std::size_t count)
{
  const Eigen::VectorXd md = rx_scores(X);
  std::vector<double> sorted(md.data(), md.data() + md.size());
  std::sort(sorted.begin(), sorted.end());
  const double last = static_cast<double>(sorted.size() - 1);

  std::vector<SweepPoint> sweep;
  for (std::size_t k = 1; k <= count; ++k) {
    const double level = static_cast<double>(k) / static_cast<double>(count + 1);
    const double pos = level * last;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double threshold = sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    SweepPoint sp{level, {}};
    for (Index j = 0; j < md.size(); ++j)
      if (md(j) > threshold)
        sp.flagged.push_back(j);
    sweep.push_back(std::move(sp));
  }
  return sweep;
}

std::vector<SweepPoint> c4_beta_sweep(const DataMatrix& X, std::span<const double> betas, Index r)
{
  std::vector<SweepPoint> sweep;
  for (double beta : betas)
    sweep.push_back({beta, hosvd_c4_detect(X, beta, r).flagged});
  return sweep;
}

namespace {

double median_of(std::vector<double> v)
{
  return median(std::move(v));
}

double mean_of(const std::vector<double>& v)
{
  double s = 0;
  for (double x : v)
    s += x;
  return s / static_cast<double>(v.size());
}

SeedReport run_seed(const ExperimentConfig& c, std::uint64_t seed)
{
  ExperimentParams p{c.t, c.tau, c.n, c.nu_c, c.nu_u, seed};
  const ExperimentDataset ds = make_experiment(p);
  const std::vector<double> betas = c.beta_grid.values();

  SeedReport rep;
  rep.seed = seed;
  if (c.detectors != DetectorSelection::rx)
    rep.curves["c4"] = roc_curve(c4_beta_sweep(ds.data, betas, c.r), ds.labels);
  if (c.detectors != DetectorSelection::c4)
    rep.curves["rx"] = roc_curve(rx_quantile_sweep(ds.data, betas.size()), ds.labels);
  return rep;
}

DetectorAggregate aggregate(const std::vector<SeedReport>& seeds, const std::string& name)
{
  DetectorAggregate agg;
  std::vector<double> aucs;
  std::map<double, std::pair<std::vector<double>, std::vector<double>>> by_param;
  for (const SeedReport& s : seeds) {
    const RocCurve& c = s.curves.at(name);
    aucs.push_back(c.auc);
    for (const RocPoint& p : c.points) {
      by_param[p.param].first.push_back(p.fpr);
      by_param[p.param].second.push_back(p.tpr);
    }
  }
  agg.mean_auc = mean_of(aucs);
  agg.median_auc = median_of(aucs);
  for (const auto& [param, rates] : by_param)
    agg.points.push_back({param, mean_of(rates.first), mean_of(rates.second), median_of(rates.first),
                          median_of(rates.second)});
  return agg;
}

json curve_json(const RocCurve& c)
{
  json pts = json::array();
  for (const RocPoint& p : c.points)
    pts.push_back({{"param", p.param}, {"fpr", p.fpr}, {"tpr", p.tpr}});
  return json{{"auc", c.auc}, {"points", std::move(pts)}};
}

} // namespace

json ExperimentReport::to_json() const
{
  json seeds = json::array();
  for (const SeedReport& s : per_seed) {
    json det = json::object();
    for (const auto& [name, curve] : s.curves)
      det[name] = curve_json(curve);
    seeds.push_back({{"seed", s.seed}, {"detectors", std::move(det)}});
  }
  json agg = json::object();
  for (const auto& [name, a] : aggregate) {
    json pts = json::array();
    for (const AggregatePoint& p : a.points)
      pts.push_back({{"param", p.param},
                     {"mean_fpr", p.mean_fpr},
                     {"mean_tpr", p.mean_tpr},
                     {"median_fpr", p.median_fpr},
                     {"median_tpr", p.median_tpr}});
    agg[name] = {{"mean_auc", a.mean_auc}, {"median_auc", a.median_auc}, {"points", std::move(pts)}};
  }
  return json{{"config", config.to_json()}, {"per_seed", std::move(seeds)}, {"aggregate", std::move(agg)}};
}

ExperimentReport run_experiment(const ExperimentConfig& config)
{
  config.validate();
  std::vector<std::uint64_t> seeds = config.seeds;
  std::sort(seeds.begin(), seeds.end());

  std::vector<SeedReport> results(seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        results[i] = run_seed(config, seeds[i]);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(seeds.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back(worker);
  }
  if (failure)
    std::rethrow_exception(failure);

  ExperimentReport report;
  report.config = config;
  report.config.seeds = seeds;
  report.per_seed = std::move(results);
  if (config.detectors != DetectorSelection::rx)
    report.aggregate["c4"] = aggregate(report.per_seed, "c4");
  if (config.detectors != DetectorSelection::c4)
    report.aggregate["rx"] = aggregate(report.per_seed, "rx");
  return report;
}

namespace {

bool timestamp_less(const std::string& a, const std::string& b)
{
  double x = 0;
  double y = 0;
  try {
    x = parse_double(a, "");
    y = parse_double(b, "");
  } catch (const DomainError&) {
    return a < b;
  }
  return x < y;
}

} // namespace

PriceSeries ingest_prices(std::istream& is)
{
  PriceSeries ps;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    const auto f = split_csv_line(line);
    if (ps.assets.empty()) {
      if (f.size() < 2)
        throw IngestionError("price header needs a time column and at least one asset");
      ps.assets.assign(f.begin() + 1, f.end());
      continue;
    }
    const std::string where = "row " + std::to_string(lineno);
    if (f.size() != ps.assets.size() + 1)
      throw IngestionError(where + ": expected " + std::to_string(ps.assets.size() + 1) + " fields, got " +
                           std::to_string(f.size()));
    if (!ps.timestamps.empty() && !timestamp_less(ps.timestamps.back(), f[0]))
      throw IngestionError(where + ": timestamp '" + f[0] + "' is not after '" + ps.timestamps.back() + "'");
    std::vector<double> row;
    for (std::size_t i = 1; i < f.size(); ++i) {
      const std::string cell = where + ", column " + std::to_string(i + 1) + " (" + ps.assets[i - 1] + ")";
      if (f[i].empty())
        throw IngestionError(cell + ": missing price");
      double v = 0;
      try {
        v = parse_double(f[i], cell);
      } catch (const DomainError& ex) {
        throw IngestionError(ex.what());
      }
      if (!(v > 0.0) || !std::isfinite(v))
        throw IngestionError(cell + ": price must be positive, got " + f[i]);
      row.push_back(v);
    }
    ps.timestamps.push_back(f[0]);
    rows.push_back(std::move(row));
  }
  if (ps.assets.empty())
    throw IngestionError("price file is empty");
  ps.prices.resize(static_cast<Index>(rows.size()), static_cast<Index>(ps.assets.size()));
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t i = 0; i < rows[j].size(); ++i)
      ps.prices(static_cast<Index>(j), static_cast<Index>(i)) = rows[j][i];
  return ps;
}

DataMatrix log_increments(const PriceSeries& prices)
{
  const Index rows = prices.prices.rows();
  if (rows < 2)
    throw IngestionError("need at least two price rows for log increments");
  const Eigen::MatrixXd logs = prices.prices.array().log().matrix();
  return logs.bottomRows(rows - 1) - logs.topRows(rows - 1);
}

} // namespace c4out
