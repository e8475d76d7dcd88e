#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "sface/commands.hpp"

namespace {

// flag-presence switches; every other registry key takes a value
bool is_switch(const std::string& key) {
  return key == "missingness" || key == "clip-to-bounds" || key == "boundary" ||
         key == "dr-a0-literal";
}

struct SubState {
  std::string config_path;
  std::map<std::string, std::string> values;
};

void add_common_options(CLI::App* sub, SubState& state) {
  sub->add_option("--config", state.config_path, "key = value config file; flags override");
  for (const sface::ConfigKey& key : sface::config_registry()) {
    const std::string flag = std::string("--") + key.key;
    if (is_switch(key.key)) {
      sub->add_flag_callback(
          flag, [&state, k = std::string(key.key)]() { state.values[k] = "true"; },
          key.help);
    } else {
      sub->add_option_function<std::string>(
          flag,
          [&state, k = std::string(key.key)](const std::string& v) { state.values[k] = v; },
          key.help);
    }
  }
}

sface::RunConfig build_config(const SubState& state) {
  sface::RunConfig cfg;
  if (!state.config_path.empty())
    sface::apply_config(cfg, sface::parse_config_file(state.config_path));
  // flags override the file, applied in registry order for determinism
  for (const sface::ConfigKey& key : sface::config_registry()) {
    const auto it = state.values.find(key.key);
    if (it != state.values.end()) sface::apply_entry(cfg, it->first, it->second);
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SF-ACE: subtype-free average causal effects for two-subtype outcomes"};
  app.require_subcommand(1);

  SubState st_estimate, st_sensitivity, st_simulate, st_profiles;
  CLI::App* estimate =
      app.add_subcommand("estimate", "point estimates, bootstrap SEs and Wald CIs");
  add_common_options(estimate, st_estimate);
  CLI::App* sensitivity =
      app.add_subcommand("sensitivity", "effect grids over the switching probabilities");
  add_common_options(sensitivity, st_sensitivity);
  CLI::App* simulate =
      app.add_subcommand("simulate", "simulation studies with bias/coverage metrics");
  add_common_options(simulate, st_simulate);
  CLI::App* profiles =
      app.add_subcommand("profiles", "potential-outcome profile feasibility tables");
  add_common_options(profiles, st_profiles);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (estimate->parsed()) sface::cmd_estimate(build_config(st_estimate));
    else if (sensitivity->parsed()) sface::cmd_sensitivity(build_config(st_sensitivity));
    else if (simulate->parsed()) sface::cmd_simulate(build_config(st_simulate));
    else if (profiles->parsed()) sface::cmd_profiles(build_config(st_profiles));
  } catch (const sface::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const sface::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const sface::FitError& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
