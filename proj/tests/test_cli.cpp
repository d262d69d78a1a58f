#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "c4out/cli.hpp"
#include "c4out/io.hpp"

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

using namespace c4out;
namespace fs = std::filesystem;

namespace {

struct Run
{
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args)
{
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch()
{
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("c4out_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// generated once and shared by the cases below
fs::path generated()
{
  static const fs::path prefix = [] {
    const fs::path p = scratch() / "exp";
    const Run r = cli({"--seed", "7", "--out", p.string(), "gen", "--t", "1000", "--n", "30", "--tau", "100",
                       "--nu-c", "6", "--nu-u", "6"});
    REQUIRE(r.code == 0);
    return p;
  }();
  return prefix;
}

} // namespace

TEST_CASE("gen writes data, labels and meta")
{
  const fs::path p = generated();
  const std::string base = p.string();
  REQUIRE(fs::exists(base + ".data.csv"));
  REQUIRE(fs::exists(base + ".labels.csv"));
  REQUIRE(fs::exists(base + ".meta.json"));

  std::ifstream din(base + ".data.csv");
  const DataMatrix X = read_data_csv(din);
  CHECK(X.rows() == 1000);
  CHECK(X.cols() == 30);
  std::ifstream lin(base + ".labels.csv");
  const auto labels = read_labels_csv(lin);
  CHECK(std::accumulate(labels.begin(), labels.end(), 0) == 100);

  const json meta = json::parse(slurp(base + ".meta.json"));
  CHECK(meta.at("seed") == 7);
  CHECK(meta.at("n") == 30);
  CHECK(meta.at("subset").size() == 15);

  // same seed, same bytes
  const fs::path again = scratch() / "again";
  REQUIRE(cli({"--seed", "7", "--out", again.string(), "gen"}).code == 0);
  CHECK(slurp(again.string() + ".data.csv") == slurp(base + ".data.csv"));
}

TEST_CASE("detect c4 and rx")
{
  const std::string data = generated().string() + ".data.csv";
  const Run c4 = cli({"detect", "c4", data, "--beta", "2.5", "--r", "3"});
  REQUIRE(c4.code == 0);
  const json j = json::parse(c4.out);
  CHECK(j.at("r") == 3);
  CHECK(j.at("beta") == 2.5);
  CHECK(j.at("iterations").is_array());
  for (const json& v : j.at("flagged"))
    CHECK((v.get<int>() >= 1 && v.get<int>() <= 1000));

  const Run rx = cli({"detect", "rx", data, "--percentile", "0.99"});
  REQUIRE(rx.code == 0);
  const json k = json::parse(rx.out);
  CHECK(k.at("detector") == "rx");
  CHECK(k.at("threshold").get<double>() == doctest::Approx(chi2_quantile(0.99, 30)));

  CHECK(cli({"detect", "rx", data, "--threshold", "1e300"}).out.find("\"flagged\": []") != std::string::npos);
  CHECK(cli({"detect", "rx", data}).code == 1);
  CHECK(cli({"detect", "rx", data, "--percentile", "0.9", "--threshold", "3"}).code == 1);
  CHECK(cli({"detect", "c4", data, "--r", "31"}).code == 2);
}

TEST_CASE("roc")
{
  const std::string base = generated().string();
  const fs::path out = scratch() / "roc.csv";
  const Run r = cli({"--out", out.string(), "roc", "--data", base + ".data.csv", "--labels", base + ".labels.csv",
                     "--beta-grid", "2:4:1"});
  REQUIRE(r.code == 0);
  std::ifstream in(out);
  const RocCurve c = read_roc_csv(in);
  CHECK(c.points.size() == 3);
  CHECK(c.auc >= 0.0);
  CHECK(c.auc <= 1.0);
  CHECK(slurp(out).rfind("beta,fpr,tpr\n", 0) == 0);

  const Run rx = cli({"roc", "--data", base + ".data.csv", "--labels", base + ".labels.csv", "--detector", "rx",
                      "--beta-grid", "1:2:0.5"});
  CHECK(rx.code == 0);

  const fs::path zeros = scratch() / "zeros.csv";
  {
    std::ofstream z(zeros);
    z << "label\n";
    for (int j = 0; j < 1000; ++j)
      z << "0\n";
  }
  const Run bad = cli({"roc", "--data", base + ".data.csv", "--labels", zeros.string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.rfind("ERROR(data):", 0) == 0);
}

TEST_CASE("cumulants, mi and ingest")
{
  const fs::path data = scratch() / "small.csv";
  {
    std::ofstream f(data);
    f << "m1,m2\n0,0\n2,0\n0,2\n2,2\n";
  }
  const Run c2 = cli({"cumulants", data.string(), "--order", "2"});
  REQUIRE(c2.code == 0);
  const auto T = tensor_from_json(json::parse(c2.out));
  CHECK(T(0, 0) == 1.0);
  CHECK(T(0, 1) == 0.0);
  CHECK(cli({"cumulants", data.string(), "--order", "5"}).code == 2);

  const Run mi = cli({"mi", "--nu", "6", "--n", "30"});
  REQUIRE(mi.code == 0);
  const json m = json::parse(mi.out);
  CHECK(m.at("i_nu_n").get<double>() > 0);
  CHECK(m.at("i_sigma").get<double>() == 0.0);
  CHECK(cli({"mi", "--nu", "6"}).code == 1);
  CHECK(json::parse(cli({"mi", "--nu", "inf", "--n", "3"}).out).at("i_nu_n") == 0.0);

  const fs::path sig = scratch() / "sigma.csv";
  {
    std::ofstream f(sig);
    f << "1,0.5\n0.5,1\n";
  }
  const json ms = json::parse(cli({"mi", "--nu", "10", "--sigma", sig.string()}).out);
  CHECK(ms.at("i_sigma").get<double>() == doctest::Approx(-0.5 * std::log(0.75)));

  const fs::path prices = scratch() / "prices.csv";
  {
    std::ofstream f(prices);
    f << "date,AAA,BBB\n1,100,50\n2,110,50\n";
  }
  const Run ing = cli({"ingest", prices.string()});
  REQUIRE(ing.code == 0);
  std::istringstream is(ing.out);
  std::string header;
  std::getline(is, header);
  CHECK(header == "AAA,BBB");
  std::istringstream body(ing.out);
  const DataMatrix inc = read_data_csv(body);
  CHECK(inc(0, 0) == doctest::Approx(std::log(1.1)).epsilon(1e-15));

  {
    std::ofstream f(prices);
    f << "date,AAA\n1,100\n2,-4\n";
  }
  const Run bad = cli({"ingest", prices.string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("row 3") != std::string::npos);
}

TEST_CASE("experiment")
{
  const fs::path cfg = scratch() / "cfg.json";
  {
    std::ofstream f(cfg);
    f << R"({"t": 200, "tau": 20, "n": 4, "r": 2, "beta_grid": "2:3:1"})";
  }
  const Run r = cli({"--seed", "3", "--threads", "2", "experiment", "--config", cfg.string(), "--seeds", "2"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("config").at("seeds") == json::array({3, 4}));
  CHECK(j.at("per_seed").size() == 2);
  CHECK(j.at("aggregate").contains("c4"));
  CHECK(j.at("aggregate").contains("rx"));

  CHECK(cli({"experiment", "--config", (scratch() / "missing.json").string()}).code == 2);
  CHECK(cli({"experiment", "--detector", "svm"}).code == 1);
  CHECK(cli({"experiment", "--tau", "0"}).code == 2);
}

TEST_CASE("usage errors")
{
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  const Run r = cli({"detect", "c4"});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("ERROR(usage):", 0) == 0);
  CHECK(cli({"--threads", "0", "mi", "--nu", "3", "--n", "2"}).code == 1);
  CHECK(cli({"detect", "c4", "/nonexistent/file.csv"}).code == 2);
}

TEST_CASE("binary exit codes and stderr")
{
  const std::string bin = C4OUT_CLI_PATH;
  const std::string err = (scratch() / "stderr.txt").string();
  auto status = [&](const std::string& args) {
    const int s = std::system((bin + " " + args + " > /dev/null 2> " + err).c_str());
    return WEXITSTATUS(s);
  };
  CHECK(status("mi --nu 6 --n 30") == 0);
  CHECK(status("mi") == 1);
  CHECK(slurp(err).rfind("ERROR(usage):", 0) == 0);
  CHECK(status("cumulants /nonexistent.csv") == 2);
  CHECK(slurp(err).rfind("ERROR(data):", 0) == 0);

  const fs::path flat = scratch() / "flat.csv";
  {
    std::ofstream f(flat);
    f << "m1,m2\n1,2\n2,4\n3,6\n";
  }
  CHECK(status("detect c4 --r 1 " + flat.string()) == 3);
  CHECK(slurp(err).rfind("ERROR(numeric):", 0) == 0);
}
