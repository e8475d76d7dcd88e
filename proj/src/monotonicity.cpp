#include "sface/monotonicity.hpp"

#include <algorithm>

namespace sface {

bool mutually_exclusive(int y1_0, int y1_1, int y2_0, int y2_1) {
  return !(y1_0 == 1 && y2_0 == 1) && !(y1_1 == 1 && y2_1 == 1);
}

const std::array<Profile, 9>& all_profiles() {
  // id assignment follows the published numbering
  static const std::array<Profile, 9> profiles = {{
      {0, 0, 0, 0, 0},
      {1, 0, 0, 0, 1},
      {2, 0, 0, 1, 0},
      {3, 0, 1, 0, 0},
      {4, 1, 0, 0, 0},
      {5, 1, 1, 0, 0},
      {6, 0, 0, 1, 1},
      {7, 1, 0, 0, 1},
      {8, 0, 1, 1, 0},
  }};
  return profiles;
}

bool satisfies(const Profile& p, int subtype, Mono assumption) {
  const int y0 = subtype == 1 ? p.y1_0 : p.y2_0;
  const int y1 = subtype == 1 ? p.y1_1 : p.y2_1;
  switch (assumption) {
    case Mono::SMono:
      return y0 <= y1;
    case Mono::DMono:
      return y0 <= std::max(p.y1_1, p.y2_1);
    case Mono::None:
      return true;
  }
  return true;
}

std::vector<Profile> feasible_profiles(const AssumptionCombo& combo) {
  std::vector<Profile> out;
  for (const Profile& p : all_profiles())
    if (satisfies(p, 1, combo.subtype1) && satisfies(p, 2, combo.subtype2))
      out.push_back(p);
  return out;
}

std::vector<int> compatible_profiles(const Observation& obs,
                                     const AssumptionCombo& combo) {
  if (obs.y1 == 1 && obs.y2 == 1)
    throw DataError("compatible_profiles: observation has both subtypes diagnosed");
  if (obs.a != 0 && obs.a != 1)
    throw DataError("compatible_profiles: exposure arm must be 0 or 1");
  std::vector<int> ids;
  for (const Profile& p : feasible_profiles(combo))
    if (p.y1(obs.a) == obs.y1 && p.y2(obs.a) == obs.y2) ids.push_back(p.id);
  return ids;
}

Mono parse_mono(const std::string& token) {
  if (token == "s" || token == "S") return Mono::SMono;
  if (token == "d" || token == "D") return Mono::DMono;
  if (token == "n" || token == "N") return Mono::None;
  throw ConfigError("unknown monotonicity token '" + token + "' (expected s, d, or n)");
}

AssumptionCombo parse_combo(const std::string& spec) {
  const auto comma = spec.find(',');
  if (comma == std::string::npos)
    throw ConfigError("combo must be two comma-separated tokens, got '" + spec + "'");
  return {parse_mono(spec.substr(0, comma)), parse_mono(spec.substr(comma + 1))};
}

std::string to_string(Mono m) {
  switch (m) {
    case Mono::SMono: return "S-Mono";
    case Mono::DMono: return "D-Mono";
    case Mono::None: return "None";
  }
  return "?";
}

}  // namespace sface
