#include "sface/config.hpp"

#include <fstream>

namespace sface {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

double parse_num(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

std::int64_t parse_int(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    const long long d = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
  }
}

void apply_schema_string(RunConfig& cfg, const std::string& value) {
  // exposure=A,outcome=Y,covariates=x1+x2,weight=w,missing=m1+m2
  for (const std::string& part : split_list(value, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos)
      throw ConfigError("schema part '" + part + "': expected name=value");
    const std::string name = trim(part.substr(0, eq));
    const std::string val = trim(part.substr(eq + 1));
    if (name == "exposure") cfg.schema.exposure = val;
    else if (name == "outcome") cfg.schema.outcome = val;
    else if (name == "weight") cfg.schema.weight = val;
    else if (name == "covariates") cfg.schema.covariates = split_list(val, '+');
    else if (name == "missing") {
      cfg.schema.aux_covariates = split_list(val, '+');
      cfg.missingness = true;
    } else {
      throw ConfigError("schema part '" + name + "' not recognized");
    }
  }
}

}  // namespace

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      if (!trim(cur).empty()) out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

const std::vector<ConfigKey>& config_registry() {
  static const std::vector<ConfigKey> keys = {
      {"data", "input CSV path"},
      {"schema", "column mapping: exposure=..,outcome=..,covariates=a+b[,weight=..][,missing=a+b]"},
      {"exposure", "exposure column name"},
      {"outcome", "outcome column name (codes 0,1,2,9)"},
      {"covariates", "comma-separated covariate column names"},
      {"weight", "optional unit-weight column name"},
      {"missing-covariates", "case-only columns predicting subtype availability"},
      {"missingness", "fit subtype-availability weights (bool)"},
      {"trunc-quantile", "missingness-weight truncation quantile, default 0.99"},
      {"combo", "monotonicity assumptions, e.g. s,s or d,s or n,n"},
      {"method", "estimators: comma list of stand,iptw,dr"},
      {"scale", "effect scales: comma list of diff,rr"},
      {"lambda1", "subtype-1 switching probability: value or lo:hi:step"},
      {"lambda2", "subtype-2 switching probability: value or lo:hi:step"},
      {"lambda1-0", "subtype-1 disease-free-under-exposure probability"},
      {"lambda2-0", "subtype-2 disease-free-under-exposure probability"},
      {"alpha", "significance level for grid flags, default 0.05"},
      {"clip-to-bounds", "truncate lambda grids at their data-driven bounds (bool)"},
      {"boundary", "emit the significance-boundary JSON next to the grid CSV (bool)"},
      {"dr-augmentation", "doubly-robust augmentation: mean or unit"},
      {"dr-a0-literal", "reproduce the printed a=0 augmentation exactly (bool)"},
      {"refit-missingness", "refit the missingness model inside each bootstrap replicate (bool)"},
      {"boot", "bootstrap repetitions, default 200"},
      {"seed", "master seed"},
      {"threads", "worker pool size (default: SFACE_THREADS or OpenMP)"},
      {"out", "output path; - for stdout"},
      {"format", "output format: json or csv"},
      {"dump-replicates", "write bootstrap replicate values to this CSV"},
      {"study", "simulation study: I, II, or III"},
      {"n", "sample size per simulated dataset"},
      {"sims", "number of simulation repetitions"},
      {"misspec", "Study III misspecification: none, exposure, outcome, both"},
      {"n-mc", "Monte-Carlo size for true-effect computation"},
      {"sweep-param", "Study II parameter path, e.g. gamma2[1]"},
      {"sweep-values", "Study II comma-separated parameter values"},
      {"dgm", "generating-model overrides: path=value;path=value"},
      {"observed", "observed record a,y1,y2 for profile compatibility"},
  };
  return keys;
}

void apply_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "data") cfg.data_path = value;
  else if (key == "schema") apply_schema_string(cfg, value);
  else if (key == "exposure") cfg.schema.exposure = value;
  else if (key == "outcome") cfg.schema.outcome = value;
  else if (key == "covariates") cfg.schema.covariates = split_list(value, ',');
  else if (key == "weight") cfg.schema.weight = value;
  else if (key == "missing-covariates") {
    cfg.schema.aux_covariates = split_list(value, ',');
    cfg.missingness = true;
  } else if (key == "missingness") cfg.missingness = parse_bool(value, key);
  else if (key == "trunc-quantile") cfg.trunc_quantile = parse_num(value, key);
  else if (key == "combo") cfg.combo = parse_combo(value);
  else if (key == "method") {
    cfg.methods.clear();
    for (const auto& tok : split_list(value, ',')) cfg.methods.push_back(parse_method(tok));
    if (cfg.methods.empty()) throw ConfigError("method: empty list");
  } else if (key == "scale") {
    cfg.scales.clear();
    for (const auto& tok : split_list(value, ',')) cfg.scales.push_back(parse_scale(tok));
    if (cfg.scales.empty()) throw ConfigError("scale: empty list");
  } else if (key == "lambda1") cfg.lambda1 = GridAxis::parse(value);
  else if (key == "lambda2") cfg.lambda2 = GridAxis::parse(value);
  else if (key == "lambda1-0") cfg.lambda1_0 = parse_num(value, key);
  else if (key == "lambda2-0") cfg.lambda2_0 = parse_num(value, key);
  else if (key == "alpha") cfg.alpha = parse_num(value, key);
  else if (key == "clip-to-bounds") cfg.clip_to_bounds = parse_bool(value, key);
  else if (key == "boundary") cfg.boundary = parse_bool(value, key);
  else if (key == "dr-augmentation") {
    if (value == "mean") cfg.dr_augmentation = DrAugmentation::Mean;
    else if (value == "unit") cfg.dr_augmentation = DrAugmentation::Unit;
    else throw ConfigError("dr-augmentation must be mean or unit");
  } else if (key == "dr-a0-literal") cfg.dr_a0_literal = parse_bool(value, key);
  else if (key == "refit-missingness") cfg.refit_missingness = parse_bool(value, key);
  else if (key == "boot") cfg.boot = static_cast<int>(parse_int(value, key));
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(value, key));
  else if (key == "threads") cfg.threads = static_cast<int>(parse_int(value, key));
  else if (key == "out") cfg.out = value;
  else if (key == "format") {
    if (value == "json") cfg.format = OutputFormat::Json;
    else if (value == "csv") cfg.format = OutputFormat::Csv;
    else throw ConfigError("format must be json or csv");
  } else if (key == "dump-replicates") cfg.dump_replicates = value;
  else if (key == "study") cfg.study = parse_study(value);
  else if (key == "n") cfg.n = parse_int(value, key);
  else if (key == "sims") cfg.sims = static_cast<int>(parse_int(value, key));
  else if (key == "misspec") cfg.misspec = parse_misspec(value);
  else if (key == "n-mc") cfg.n_mc = parse_int(value, key);
  else if (key == "sweep-param") {
    if (!cfg.sweep) cfg.sweep = SweepSpec{};
    cfg.sweep->param = value;
  } else if (key == "sweep-values") {
    if (!cfg.sweep) cfg.sweep = SweepSpec{};
    cfg.sweep->values.clear();
    for (const auto& tok : split_list(value, ','))
      cfg.sweep->values.push_back(parse_num(tok, key));
  } else if (key == "dgm") {
    for (const auto& part : split_list(value, ';')) {
      const auto eq = part.find('=');
      if (eq == std::string::npos)
        throw ConfigError("dgm override '" + part + "': expected path=value");
      cfg.dgm_overrides.emplace_back(trim(part.substr(0, eq)),
                                     parse_num(trim(part.substr(eq + 1)), key));
    }
  } else if (key == "observed") cfg.observed = value;
  else throw ConfigError("unknown config key '" + key + "'");
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> entries;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    entries[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return entries;
}

void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& entries) {
  for (const auto& [key, value] : entries) {
    bool known = false;
    for (const ConfigKey& k : config_registry())
      if (key == k.key) {
        known = true;
        break;
      }
    if (!known) throw ConfigError("unknown config key '" + key + "'");
    apply_entry(cfg, key, value);
  }
}

}  // namespace sface
