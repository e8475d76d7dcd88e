#pragma once

#include <array>
#include <string>
#include <vector>

#include "sface/errors.hpp"

namespace sface {

enum class Mono { SMono, DMono, None };

struct AssumptionCombo {
  Mono subtype1 = Mono::SMono;
  Mono subtype2 = Mono::SMono;
};

// One potential-outcome profile (Y1(0), Y1(1), Y2(0), Y2(1)). The id order is
// the published convention; feasibility below is computed from the assumption
// predicates, never read off a table.
struct Profile {
  int id;
  int y1_0, y1_1, y2_0, y2_1;

  int y1(int a) const { return a == 0 ? y1_0 : y1_1; }
  int y2(int a) const { return a == 0 ? y2_0 : y2_1; }
};

// The nine mutually-exclusive profiles, id order 0..8.
const std::array<Profile, 9>& all_profiles();

// True when the quadruple never has both subtypes diagnosed in the same arm.
bool mutually_exclusive(int y1_0, int y1_1, int y2_0, int y2_1);

// Does the profile satisfy the assumption for subtype k (1 or 2)?
bool satisfies(const Profile& p, int subtype, Mono assumption);

std::vector<Profile> feasible_profiles(const AssumptionCombo& combo);

struct Observation {
  int a;   // exposure arm
  int y1;  // observed subtype-1 indicator
  int y2;  // observed subtype-2 indicator
};

// Profiles feasible under the combo whose arm-a coordinates match the
// observation. Rejects the impossible observation (y1, y2) = (1, 1).
std::vector<int> compatible_profiles(const Observation& obs,
                                     const AssumptionCombo& combo);

Mono parse_mono(const std::string& token);            // "s" | "d" | "n"
AssumptionCombo parse_combo(const std::string& spec);  // e.g. "s,d"
std::string to_string(Mono m);

}  // namespace sface
