#include "c4out/cli.hpp"

#include "c4out/experiment.hpp"
#include "c4out/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace c4out {

namespace {

std::ifstream open_input(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw DomainError("cannot open '" + path + "'");
  return in;
}

DataMatrix load_data(const std::string& path)
{
  auto in = open_input(path);
  return read_data_csv(in);
}

// Writes the payload to `path`, or to `out` when path is empty.
void emit(const std::string& payload, const std::string& path, std::ostream& out)
{
  if (path.empty()) {
    out << payload;
    return;
  }
  std::ofstream f(path);
  if (!f)
    throw DomainError("cannot write '" + path + "'");
  f << payload;
}

std::string json_payload(const json& j)
{
  return dump_json(j) + "\n";
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Cumulant-based detection of cross-correlated extreme events", "c4out"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 1;
  std::string out_path;
  unsigned threads = 1;
  app.add_option("--seed", seed, "Random seed (base seed for experiment)");
  app.add_option("--out", out_path, "Output file (gen: output prefix)");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  // gen
  ExperimentParams gen_params;
  auto* gen = app.add_subcommand("gen", "Generate a labelled artificial crisis dataset");
  gen->add_option("--t", gen_params.t, "Rows")->capture_default_str();
  gen->add_option("--n", gen_params.n, "Marginals")->capture_default_str();
  gen->add_option("--tau", gen_params.tau, "Outlier rows")->capture_default_str();
  gen->add_option("--nu-c", gen_params.nu_c, "Copula degrees of freedom")->capture_default_str();
  gen->add_option("--nu-u", gen_params.nu_u, "Marginal degrees of freedom")->capture_default_str();

  // detect
  auto* detect = app.add_subcommand("detect", "Run a detector on a data CSV");
  detect->require_subcommand(1);
  std::string detect_data;
  C4DetectOptions c4opt;
  auto* det_c4 = detect->add_subcommand("c4", "Fourth-cumulant iterative detector");
  det_c4->add_option("data", detect_data, "Data CSV")->required();
  det_c4->add_option("--beta", c4opt.beta, "Sensitivity")->capture_default_str();
  det_c4->add_option("--r", c4opt.r, "Number of directions")->capture_default_str();
  auto* det_rx = detect->add_subcommand("rx", "RX (Mahalanobis) detector");
  det_rx->add_option("data", detect_data, "Data CSV")->required();
  double rx_percentile = 0;
  double rx_threshold = 0;
  auto* opt_pct = det_rx->add_option("--percentile", rx_percentile, "Chi-squared percentile in (0,1)");
  auto* opt_thr = det_rx->add_option("--threshold", rx_threshold, "Raw threshold on the squared distance");
  opt_pct->excludes(opt_thr);

  // roc
  auto* roc = app.add_subcommand("roc", "ROC curve of a detector sweep on labelled data");
  std::string roc_data;
  std::string roc_labels;
  std::string roc_detector = "c4";
  std::string roc_grid = "1:5:0.25";
  Index roc_r = 3;
  roc->add_option("--data", roc_data, "Data CSV")->required();
  roc->add_option("--labels", roc_labels, "Labels CSV")->required();
  roc->add_option("--detector", roc_detector, "c4 or rx")->capture_default_str();
  roc->add_option("--beta-grid", roc_grid, "start:stop:step")->capture_default_str();
  roc->add_option("--r", roc_r, "Number of directions")->capture_default_str();

  // experiment
  auto* exp = app.add_subcommand("experiment", "Seeded multi-replication ROC experiment");
  ExperimentConfig cfg;
  std::string cfg_path;
  std::string exp_grid;
  std::string exp_detector;
  std::uint64_t seed_count = 0;
  exp->add_option("--config", cfg_path, "JSON experiment config");
  auto* o_t = exp->add_option("--t", cfg.t, "Rows");
  auto* o_tau = exp->add_option("--tau", cfg.tau, "Outlier rows");
  auto* o_n = exp->add_option("--n", cfg.n, "Marginals");
  auto* o_nuc = exp->add_option("--nu-c", cfg.nu_c, "Copula degrees of freedom");
  auto* o_nuu = exp->add_option("--nu-u", cfg.nu_u, "Marginal degrees of freedom");
  auto* o_r = exp->add_option("--r", cfg.r, "Number of directions");
  auto* o_grid = exp->add_option("--beta-grid", exp_grid, "start:stop:step");
  auto* o_seeds = exp->add_option("--seeds", seed_count, "Number of seeds, starting at --seed");
  auto* o_det = exp->add_option("--detector", exp_detector, "c4, rx or both");

  // cumulants
  auto* cum = app.add_subcommand("cumulants", "Cumulant tensor of a data CSV as JSON");
  std::string cum_data;
  int cum_order = 4;
  cum->add_option("data", cum_data, "Data CSV")->required();
  cum->add_option("--order", cum_order, "2, 3 or 4")->capture_default_str();

  // mi
  auto* mi = app.add_subcommand("mi", "Mutual information of a t copula");
  double mi_nu = 0;
  int mi_n = 0;
  std::string mi_sigma;
  mi->add_option("--nu", mi_nu, "Copula degrees of freedom (inf for Gaussian)")->required();
  auto* o_min = mi->add_option("--n", mi_n, "Marginal count");
  mi->add_option("--sigma", mi_sigma, "Correlation matrix CSV");

  // ingest
  auto* ing = app.add_subcommand("ingest", "Prices CSV to log-increment CSV");
  std::string ing_path;
  ing->add_option("prices", ing_path, "Prices CSV")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "ERROR(usage): " << e.what() << '\n';
    return 1;
  }

  try {
    if (gen->parsed()) {
      gen_params.seed = seed;
      const ExperimentDataset ds = make_experiment(gen_params);
      const std::string prefix = out_path.empty() ? "experiment" : out_path;
      std::ostringstream data, labels;
      write_data_csv(data, ds.data);
      write_labels_csv(labels, ds.labels);
      emit(data.str(), prefix + ".data.csv", out);
      emit(labels.str(), prefix + ".labels.csv", out);
      emit(json_payload(meta_to_json(ds.meta)), prefix + ".meta.json", out);
      err << "wrote " << prefix << ".data.csv, " << prefix << ".labels.csv, " << prefix << ".meta.json\n";
    } else if (det_c4->parsed()) {
      const DataMatrix X = load_data(detect_data);
      emit(json_payload(detection_to_json(hosvd_c4_detect(X, c4opt))), out_path, out);
    } else if (det_rx->parsed()) {
      if (!opt_pct->count() && !opt_thr->count())
        throw UsageError("detect rx needs --percentile or --threshold");
      const DataMatrix X = load_data(detect_data);
      const double threshold = opt_pct->count() ? chi2_quantile(rx_percentile, static_cast<int>(X.cols())) : rx_threshold;
      DetectionResult d;
      d.flagged = rx_detect(X, threshold);
      d.beta = threshold;
      d.r = 0;
      json j = detection_to_json(d);
      j["detector"] = "rx";
      j["threshold"] = threshold;
      emit(json_payload(j), out_path, out);
    } else if (roc->parsed()) {
      const DataMatrix X = load_data(roc_data);
      auto lin = open_input(roc_labels);
      const std::vector<int> labels = read_labels_csv(lin);
      if (static_cast<Index>(labels.size()) != X.rows())
        throw DomainError("labels length " + std::to_string(labels.size()) + " does not match " +
                          std::to_string(X.rows()) + " data rows");
      const std::vector<double> betas = BetaGrid::parse(roc_grid).values();
      std::vector<SweepPoint> sweep;
      if (parse_detector_selection(roc_detector) == DetectorSelection::c4)
        sweep = c4_beta_sweep(X, betas, roc_r);
      else if (parse_detector_selection(roc_detector) == DetectorSelection::rx)
        sweep = rx_quantile_sweep(X, betas.size());
      else
        throw UsageError("roc takes a single detector (c4 or rx)");
      std::ostringstream os;
      write_roc_csv(os, roc_curve(sweep, labels));
      emit(os.str(), out_path, out);
    } else if (exp->parsed()) {
      ExperimentConfig c;
      if (!cfg_path.empty()) {
        auto in = open_input(cfg_path);
        json j;
        try {
          in >> j;
        } catch (const json::exception& ex) {
          throw DomainError(std::string("cannot parse config: ") + ex.what());
        }
        c = ExperimentConfig::from_json(j);
      }
      if (o_t->count()) c.t = cfg.t;
      if (o_tau->count()) c.tau = cfg.tau;
      if (o_n->count()) c.n = cfg.n;
      if (o_nuc->count()) c.nu_c = cfg.nu_c;
      if (o_nuu->count()) c.nu_u = cfg.nu_u;
      if (o_r->count()) c.r = cfg.r;
      if (o_grid->count()) c.beta_grid = BetaGrid::parse(exp_grid);
      if (o_det->count()) c.detectors = parse_detector_selection(exp_detector);
      if (o_seeds->count()) {
        c.seeds.clear();
        for (std::uint64_t k = 0; k < seed_count; ++k)
          c.seeds.push_back(seed + k);
      }
      c.threads = threads;
      err << "running " << c.seeds.size() << " seed(s) on " << c.threads << " thread(s)\n";
      emit(json_payload(run_experiment(c).to_json()), out_path, out);
    } else if (cum->parsed()) {
      const DataMatrix X = load_data(cum_data);
      if (cum_order < 2 || cum_order > 4)
        throw InvalidOrderError(cum_order);
      const SymmetricTensor<double> T = cum_order == 4 ? fourth_cumulant(X) : central_moment(X, cum_order);
      emit(json_payload(tensor_to_json(T)), out_path, out);
    } else if (mi->parsed()) {
      Eigen::MatrixXd sigma;
      if (!mi_sigma.empty()) {
        auto in = open_input(mi_sigma);
        sigma = read_data_csv(in);
        if (o_min->count() && mi_n != sigma.rows())
          throw DomainError("--n does not match the dimension of --sigma");
      } else {
        if (!o_min->count())
          throw UsageError("mi needs --n or --sigma");
        if (mi_n < 1)
          throw DomainError("--n must be >= 1");
        sigma = Eigen::MatrixXd::Identity(mi_n, mi_n);
      }
      emit(json_payload(mi_to_json(mutual_information(sigma, mi_nu))), out_path, out);
    } else if (ing->parsed()) {
      auto in = open_input(ing_path);
      const PriceSeries ps = ingest_prices(in);
      const DataMatrix inc = log_increments(ps);
      std::ostringstream os;
      for (std::size_t i = 0; i < ps.assets.size(); ++i)
        os << (i ? "," : "") << ps.assets[i];
      os << '\n';
      for (Index j = 0; j < inc.rows(); ++j) {
        for (Index i = 0; i < inc.cols(); ++i)
          os << (i ? "," : "") << format_double(inc(j, i));
        os << '\n';
      }
      emit(os.str(), out_path, out);
    }
  } catch (const Error& e) {
    err << "ERROR(" << category_name(e.category()) << "): " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    err << "ERROR(numeric): " << e.what() << '\n';
    return 3;
  }
  return 0;
}

} // namespace c4out
