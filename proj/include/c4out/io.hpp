#pragma once

#include "c4out/copula_gen.hpp"
#include "c4out/detectors.hpp"
#include "c4out/sym_tensor.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace c4out {

using json = nlohmann::json;

// Text formats. Every real number is written with 17 significant digits so
// that reading it back reproduces the same double.

std::string format_double(double v);

/// Splits one CSV line on commas; strips CR, surrounding blanks and quotes.
std::vector<std::string> split_csv_line(const std::string& line);

/// Parses a decimal number (no thousands separators); throws DomainError otherwise.
double parse_double(const std::string& field, const std::string& context);

/// Header `m1,...,mn` followed by one row per realisation.
void write_data_csv(std::ostream& os, const DataMatrix& X);

/// Reads a numeric matrix. A first line that is not fully numeric is treated as a header.
DataMatrix read_data_csv(std::istream& is);

void write_labels_csv(std::ostream& os, const std::vector<int>& labels);
std::vector<int> read_labels_csv(std::istream& is);

/// {order, dim, entries: [[i1..id, value], ...]} with 1-based non-decreasing indices.
json tensor_to_json(const SymmetricTensor<double>& T);
SymmetricTensor<double> tensor_from_json(const json& j);

/// {"flagged": [...], "beta": ..., "r": ..., "iterations": [{"k": ..., "removed": ...}]}, 1-based rows.
json detection_to_json(const DetectionResult& d);
DetectionResult detection_from_json(const json& j);

json mi_to_json(const MutualInfoReport& r);

/// {seed, t, tau, n, nu_c, nu_u, sigma, subset}, subset 1-based.
json meta_to_json(const ExperimentMeta& meta);
ExperimentMeta meta_from_json(const json& j);

/// Columns beta,fpr,tpr; final line `auc,<value>`.
void write_roc_csv(std::ostream& os, const RocCurve& curve);
RocCurve read_roc_csv(std::istream& is);

/// Serialises a JSON document with shortest round-trip number formatting.
std::string dump_json(const json& j);

} // namespace c4out
