#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sface/csv.hpp"
#include "sface/sensitivity.hpp"
#include "sface/simulation.hpp"

namespace sface {

enum class OutputFormat { Json, Csv };

// One flat bag of settings; each command validates the slice it consumes.
// Config-file keys and CLI flags mirror one another one-to-one.
struct RunConfig {
  // data ingestion
  std::string data_path;
  CsvSchema schema;
  bool missingness = false;  // fit subtype-availability weights
  double trunc_quantile = 0.99;

  // analysis
  AssumptionCombo combo{Mono::SMono, Mono::SMono};
  std::vector<Method> methods = {Method::Standardization, Method::Iptw, Method::Dr};
  std::vector<Scale> scales = {Scale::Diff, Scale::RR};
  GridAxis lambda1 = GridAxis::fixed(0.0);
  GridAxis lambda2 = GridAxis::fixed(0.0);
  double lambda1_0 = 0.0;
  double lambda2_0 = 0.0;
  double alpha = 0.05;
  bool clip_to_bounds = false;
  bool boundary = false;
  DrAugmentation dr_augmentation = DrAugmentation::Mean;
  bool dr_a0_literal = false;
  bool refit_missingness = true;

  // inference
  int boot = 200;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = SFACE_THREADS env or the OpenMP default

  // output
  std::string out;  // empty or "-" = stdout
  OutputFormat format = OutputFormat::Json;
  std::string dump_replicates;

  // simulation harness
  Study study = Study::I;
  std::int64_t n = 10000;
  int sims = 500;
  Misspec misspec = Misspec::None;
  std::int64_t n_mc = 10000000;
  std::optional<SweepSpec> sweep;
  std::vector<std::pair<std::string, double>> dgm_overrides;

  // profiles command
  std::string observed;  // "a,y1,y2"
};

struct ConfigKey {
  const char* key;    // config-file key == long flag name
  const char* help;
};

// Every key the config parser accepts; the CLI builds its flags from the
// same table, so flags and config keys cannot drift apart.
const std::vector<ConfigKey>& config_registry();

// key = value lines, # comments, unknown keys rejected.
std::map<std::string, std::string> parse_config_file(const std::string& path);

// Applies config-file entries onto defaults; CLI flag handling reuses
// apply_entry so a flag and its config key share one code path.
void apply_entry(RunConfig& cfg, const std::string& key, const std::string& value);
void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& entries);

std::vector<std::string> split_list(const std::string& text, char sep);

}  // namespace sface
