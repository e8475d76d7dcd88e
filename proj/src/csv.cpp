#include "sface/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace sface {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

bool is_missing(const std::string& s) { return s.empty() || s == "NA"; }

double parse_double(const std::string& s, size_t row, const std::string& col) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError("load_csv: cannot parse '" + s + "' in column '" + col +
                    "' at data row " + std::to_string(row));
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Dataset load_csv(const std::string& path, const CsvSchema& schema, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw DataError("load_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("load_csv: empty file '" + path + "'");
  const std::vector<std::string> header = split_line(line);
  std::unordered_map<std::string, size_t> col_idx;
  for (size_t j = 0; j < header.size(); ++j) col_idx[header[j]] = j;

  const auto need = [&](const std::string& name) -> size_t {
    const auto it = col_idx.find(name);
    if (it == col_idx.end())
      throw DataError("load_csv: column '" + name + "' not found in '" + path + "'");
    return it->second;
  };
  const size_t ci_exposure = need(schema.exposure);
  const size_t ci_outcome = need(schema.outcome);
  std::vector<size_t> ci_cov, ci_aux;
  for (const auto& nm : schema.covariates) ci_cov.push_back(need(nm));
  for (const auto& nm : schema.aux_covariates) ci_aux.push_back(need(nm));
  const bool has_weight = !schema.weight.empty();
  const size_t ci_weight = has_weight ? need(schema.weight) : 0;

  std::vector<double> exposure, weight;
  std::vector<int> outcome;
  std::vector<std::vector<double>> cov(ci_cov.size()), aux(ci_aux.size());
  Eigen::Index rejected = 0;
  size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const std::vector<std::string> f = split_line(line);
    if (f.size() != header.size())
      throw DataError("load_csv: row " + std::to_string(row) + " has " +
                      std::to_string(f.size()) + " fields, header has " +
                      std::to_string(header.size()));
    bool missing = is_missing(f[ci_exposure]) || is_missing(f[ci_outcome]) ||
                   (has_weight && is_missing(f[ci_weight]));
    for (size_t j = 0; j < ci_cov.size() && !missing; ++j)
      missing = is_missing(f[ci_cov[j]]);
    if (missing) {
      ++rejected;
      continue;
    }
    const double a = parse_double(f[ci_exposure], row, schema.exposure);
    if (a != 0.0 && a != 1.0)
      throw DataError("load_csv: non-binary exposure '" + f[ci_exposure] +
                      "' in column '" + schema.exposure + "' at data row " +
                      std::to_string(row));
    const double yd = parse_double(f[ci_outcome], row, schema.outcome);
    const int y = static_cast<int>(yd);
    if (yd != y || (y != kOutcomeFree && y != kOutcomeSubtype1 &&
                    y != kOutcomeSubtype2 && y != kOutcomeUnknown))
      throw DataError("load_csv: unknown outcome code '" + f[ci_outcome] +
                      "' in column '" + schema.outcome + "' at data row " +
                      std::to_string(row));
    exposure.push_back(a);
    outcome.push_back(y);
    weight.push_back(has_weight ? parse_double(f[ci_weight], row, schema.weight) : 1.0);
    for (size_t j = 0; j < ci_cov.size(); ++j)
      cov[j].push_back(parse_double(f[ci_cov[j]], row, schema.covariates[j]));
    for (size_t j = 0; j < ci_aux.size(); ++j)
      aux[j].push_back(is_missing(f[ci_aux[j]])
                           ? std::numeric_limits<double>::quiet_NaN()
                           : parse_double(f[ci_aux[j]], row, schema.aux_covariates[j]));
  }
  const Eigen::Index n = static_cast<Eigen::Index>(outcome.size());
  if (n == 0) throw DataError("load_csv: no usable rows in '" + path + "'");
  Eigen::VectorXd ve(n), vw(n);
  Eigen::VectorXi vy(n);
  Eigen::MatrixXd mc(n, static_cast<Eigen::Index>(cov.size()));
  Eigen::MatrixXd ma(n, static_cast<Eigen::Index>(aux.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    ve(i) = exposure[static_cast<size_t>(i)];
    vw(i) = weight[static_cast<size_t>(i)];
    vy(i) = outcome[static_cast<size_t>(i)];
    for (size_t j = 0; j < cov.size(); ++j) mc(i, static_cast<Eigen::Index>(j)) = cov[j][static_cast<size_t>(i)];
    for (size_t j = 0; j < aux.size(); ++j) ma(i, static_cast<Eigen::Index>(j)) = aux[j][static_cast<size_t>(i)];
  }
  if (report) {
    report->n_loaded = n;
    report->n_rejected_missing = rejected;
  }
  return Dataset::create(std::move(ve), std::move(mc), std::move(vy), std::move(vw),
                         schema.covariates, std::move(ma), schema.aux_covariates);
}

void write_csv(const std::string& path, const Dataset& data, const CsvSchema& schema) {
  std::ofstream out(path);
  if (!out) throw DataError("write_csv: cannot open '" + path + "'");
  out << schema.exposure << ',' << schema.outcome;
  if (!schema.weight.empty()) out << ',' << schema.weight;
  for (const auto& nm : data.covariate_names()) out << ',' << nm;
  for (const auto& nm : data.aux_names()) out << ',' << nm;
  out << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << format_double(data.exposure()(i)) << ',' << data.outcome()(i);
    if (!schema.weight.empty()) out << ',' << format_double(data.weight()(i));
    for (Eigen::Index j = 0; j < data.n_covariates(); ++j)
      out << ',' << format_double(data.covariates()(i, j));
    for (Eigen::Index j = 0; j < data.aux().cols(); ++j) {
      const double v = data.aux()(i, j);
      out << ',';
      if (std::isfinite(v)) out << format_double(v);
      else out << "NA";
    }
    out << '\n';
  }
}

}  // namespace sface
