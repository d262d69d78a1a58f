#include "c4out/io.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>

namespace c4out {

std::string format_double(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line)
{
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (std::string& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

double parse_double(const std::string& field, const std::string& context)
{
  double v = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (first != last && *first == '+')
    ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last)
    throw DomainError("cannot parse number '" + field + "' (" + context + ")");
  return v;
}

namespace {

bool is_blank(const std::string& line)
{
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

bool all_numeric(const std::vector<std::string>& fields)
{
  for (const std::string& f : fields) {
    try {
      parse_double(f, "");
    } catch (const DomainError&) {
      return false;
    }
  }
  return true;
}

} // namespace

void write_data_csv(std::ostream& os, const DataMatrix& X)
{
  for (Index i = 0; i < X.cols(); ++i)
    os << (i ? "," : "") << 'm' << (i + 1);
  os << '\n';
  for (Index j = 0; j < X.rows(); ++j) {
    for (Index i = 0; i < X.cols(); ++i)
      os << (i ? "," : "") << format_double(X(j, i));
    os << '\n';
  }
}

DataMatrix read_data_csv(std::istream& is)
{
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (is_blank(line))
      continue;
    const auto fields = split_csv_line(line);
    if (rows.empty() && width == 0 && !all_numeric(fields)) {
      width = fields.size();
      continue;
    }
    if (width == 0)
      width = fields.size();
    if (fields.size() != width)
      throw DomainError("line " + std::to_string(lineno) + ": expected " + std::to_string(width) + " fields, got " +
                        std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(width);
    for (std::size_t i = 0; i < fields.size(); ++i)
      row.push_back(parse_double(fields[i], "line " + std::to_string(lineno) + ", column " + std::to_string(i + 1)));
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw DomainError("data file has no numeric rows");
  DataMatrix X(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t i = 0; i < width; ++i)
      X(static_cast<Index>(j), static_cast<Index>(i)) = rows[j][i];
  return X;
}

void write_labels_csv(std::ostream& os, const std::vector<int>& labels)
{
  os << "label\n";
  for (int l : labels)
    os << l << '\n';
}

std::vector<int> read_labels_csv(std::istream& is)
{
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(is, line)) {
    ++lineno;
    if (is_blank(line))
      continue;
    const auto fields = split_csv_line(line);
    if (first && !all_numeric(fields)) {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() != 1)
      throw DomainError("labels line " + std::to_string(lineno) + ": expected a single column");
    const double v = parse_double(fields[0], "labels line " + std::to_string(lineno));
    if (v != 0.0 && v != 1.0)
      throw DomainError("labels line " + std::to_string(lineno) + ": label must be 0 or 1");
    labels.push_back(static_cast<int>(v));
  }
  return labels;
}

json tensor_to_json(const SymmetricTensor<double>& T)
{
  std::vector<std::pair<std::vector<Index>, double>> entries(static_cast<std::size_t>(T.size()));
  T.for_each_index([&](std::span<const Index> idx, Index off) {
    std::vector<Index> one_based(idx.begin(), idx.end());
    for (Index& i : one_based)
      ++i;
    entries[static_cast<std::size_t>(off)] = {std::move(one_based), T.values()[static_cast<std::size_t>(off)]};
  });
  json arr = json::array();
  for (const auto& [idx, value] : entries) {
    json e = json::array();
    for (Index i : idx)
      e.push_back(i);
    e.push_back(value);
    arr.push_back(std::move(e));
  }
  return json{{"order", T.order()}, {"dim", T.dim()}, {"entries", std::move(arr)}};
}

SymmetricTensor<double> tensor_from_json(const json& j)
{
  try {
    const int order = j.at("order").get<int>();
    const Index dim = j.at("dim").get<Index>();
    SymmetricTensor<double> T(order, dim);
    std::vector<bool> seen(static_cast<std::size_t>(T.size()), false);
    for (const json& e : j.at("entries")) {
      if (!e.is_array() || static_cast<int>(e.size()) != order + 1)
        throw DomainError("tensor entry must hold " + std::to_string(order) + " indices and a value");
      std::array<Index, kMaxTensorOrder> idx{};
      for (int k = 0; k < order; ++k) {
        idx[static_cast<std::size_t>(k)] = e[static_cast<std::size_t>(k)].get<Index>() - 1;
        if (k > 0 && idx[static_cast<std::size_t>(k)] < idx[static_cast<std::size_t>(k - 1)])
          throw DomainError("tensor entry indices must be non-decreasing");
      }
      const std::span<const Index> view(idx.data(), static_cast<std::size_t>(order));
      const Index off = T.offset(view);
      if (seen[static_cast<std::size_t>(off)])
        throw DomainError("duplicate tensor entry");
      seen[static_cast<std::size_t>(off)] = true;
      T.values()[static_cast<std::size_t>(off)] = e[static_cast<std::size_t>(order)].get<double>();
    }
    return T;
  } catch (const json::exception& ex) {
    throw DomainError(std::string("malformed tensor JSON: ") + ex.what());
  }
}

json detection_to_json(const DetectionResult& d)
{
  json flagged = json::array();
  for (Index i : d.flagged)
    flagged.push_back(i + 1);
  json iters = json::array();
  for (const IterationInfo& it : d.iterations)
    iters.push_back({{"k", it.k}, {"removed", it.removed}});
  return json{{"flagged", std::move(flagged)}, {"beta", d.beta}, {"r", d.r}, {"iterations", std::move(iters)}};
}

DetectionResult detection_from_json(const json& j)
{
  try {
    DetectionResult d;
    for (const json& f : j.at("flagged"))
      d.flagged.push_back(f.get<Index>() - 1);
    d.beta = j.at("beta").get<double>();
    d.r = j.at("r").get<Index>();
    for (const json& it : j.at("iterations"))
      d.iterations.push_back({it.at("k").get<double>(), it.at("removed").get<Index>()});
    return d;
  } catch (const json::exception& ex) {
    throw DomainError(std::string("malformed detection JSON: ") + ex.what());
  }
}

json mi_to_json(const MutualInfoReport& r)
{
  return json{{"i_sigma", r.i_sigma}, {"i_nu_n", r.i_nu_n}, {"total", r.total}};
}

json meta_to_json(const ExperimentMeta& meta)
{
  json sigma = json::array();
  const Eigen::MatrixXd& S = meta.sigma.values();
  for (Index i = 0; i < S.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < S.cols(); ++k)
      row.push_back(S(i, k));
    sigma.push_back(std::move(row));
  }
  json subset = json::array();
  for (Index i : meta.spec.subset)
    subset.push_back(i + 1);
  return json{{"seed", meta.seed},         {"t", meta.t},     {"tau", meta.tau},
              {"n", S.rows()},             {"nu_c", meta.spec.nu_c}, {"nu_u", meta.spec.nu_u},
              {"sigma", std::move(sigma)}, {"subset", std::move(subset)}};
}

ExperimentMeta meta_from_json(const json& j)
{
  try {
    ExperimentMeta meta;
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.t = j.at("t").get<Index>();
    meta.tau = j.at("tau").get<Index>();
    const Index n = j.at("n").get<Index>();
    Eigen::MatrixXd S(n, n);
    const json& rows = j.at("sigma");
    if (static_cast<Index>(rows.size()) != n)
      throw DomainError("meta sigma has wrong dimension");
    for (Index i = 0; i < n; ++i) {
      if (static_cast<Index>(rows[static_cast<std::size_t>(i)].size()) != n)
        throw DomainError("meta sigma has wrong dimension");
      for (Index k = 0; k < n; ++k)
        S(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
    }
    meta.sigma = CorrelationMatrix(std::move(S));
    meta.spec.nu_c = j.at("nu_c").get<int>();
    meta.spec.nu_u = j.at("nu_u").get<double>();
    for (const json& s : j.at("subset"))
      meta.spec.subset.push_back(s.get<Index>() - 1);
    return meta;
  } catch (const json::exception& ex) {
    throw DomainError(std::string("malformed meta JSON: ") + ex.what());
  }
}

void write_roc_csv(std::ostream& os, const RocCurve& curve)
{
  os << "beta,fpr,tpr\n";
  for (const RocPoint& p : curve.points)
    os << format_double(p.param) << ',' << format_double(p.fpr) << ',' << format_double(p.tpr) << '\n';
  os << "auc," << format_double(curve.auc) << '\n';
}

RocCurve read_roc_csv(std::istream& is)
{
  RocCurve curve;
  std::string line;
  bool header = true;
  bool have_auc = false;
  while (std::getline(is, line)) {
    if (is_blank(line))
      continue;
    const auto f = split_csv_line(line);
    if (header) {
      header = false;
      if (f.size() == 3 && f[0] == "beta")
        continue;
    }
    if (f.size() == 2 && f[0] == "auc") {
      curve.auc = parse_double(f[1], "ROC auc footer");
      have_auc = true;
    } else if (f.size() == 3) {
      curve.points.push_back({parse_double(f[0], "ROC beta"), parse_double(f[1], "ROC fpr"), parse_double(f[2], "ROC tpr")});
    } else {
      throw DomainError("malformed ROC line: " + line);
    }
  }
  if (!have_auc)
    throw DomainError("ROC file lacks the auc footer");
  return curve;
}

std::string dump_json(const json& j)
{
  return j.dump(2);
}

} // namespace c4out
