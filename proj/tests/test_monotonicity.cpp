#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>

#include "sface/monotonicity.hpp"

using namespace sface;

namespace {

std::set<int> ids(const std::vector<Profile>& profiles) {
  std::set<int> out;
  for (const Profile& p : profiles) out.insert(p.id);
  return out;
}

std::set<int> ids(const std::vector<int>& v) { return {v.begin(), v.end()}; }

const std::vector<AssumptionCombo> kTableCombos = {
    {Mono::SMono, Mono::SMono},
    {Mono::DMono, Mono::DMono},
    {Mono::SMono, Mono::DMono},
    {Mono::DMono, Mono::SMono},
};

std::vector<AssumptionCombo> all_combos() {
  std::vector<AssumptionCombo> out;
  for (Mono m1 : {Mono::SMono, Mono::DMono, Mono::None})
    for (Mono m2 : {Mono::SMono, Mono::DMono, Mono::None}) out.push_back({m1, m2});
  return out;
}

}  // namespace

TEST_CASE("the nine profiles are exactly the mutually exclusive quadruples") {
  std::set<std::array<int, 4>> brute;
  for (int bits = 0; bits < 16; ++bits) {
    const int y1_0 = (bits >> 3) & 1, y1_1 = (bits >> 2) & 1;
    const int y2_0 = (bits >> 1) & 1, y2_1 = bits & 1;
    if (mutually_exclusive(y1_0, y1_1, y2_0, y2_1)) brute.insert({y1_0, y1_1, y2_0, y2_1});
  }
  CHECK(brute.size() == 9);
  std::set<std::array<int, 4>> listed;
  std::set<int> id_set;
  for (const Profile& p : all_profiles()) {
    listed.insert({p.y1_0, p.y1_1, p.y2_0, p.y2_1});
    id_set.insert(p.id);
  }
  CHECK(listed == brute);
  CHECK(id_set == std::set<int>{0, 1, 2, 3, 4, 5, 6, 7, 8});
}

TEST_CASE("feasibility under the published assumption combinations") {
  CHECK(ids(feasible_profiles({Mono::SMono, Mono::SMono})) == std::set<int>{0, 1, 3, 5, 6});
  CHECK(ids(feasible_profiles({Mono::DMono, Mono::DMono})) ==
        std::set<int>{0, 1, 3, 5, 6, 7, 8});
  CHECK(ids(feasible_profiles({Mono::SMono, Mono::DMono})) ==
        std::set<int>{0, 1, 3, 5, 6, 8});
  CHECK(ids(feasible_profiles({Mono::DMono, Mono::SMono})) ==
        std::set<int>{0, 1, 3, 5, 6, 7});
}

TEST_CASE("profiles 2 and 4 are excluded under every published combination") {
  for (const AssumptionCombo& combo : kTableCombos) {
    const std::set<int> f = ids(feasible_profiles(combo));
    CHECK(!f.contains(2));
    CHECK(!f.contains(4));
  }
}

TEST_CASE("feasible sets are nested: (S,S) within (D,D) within (None,None)") {
  const std::set<int> ss = ids(feasible_profiles({Mono::SMono, Mono::SMono}));
  const std::set<int> dd = ids(feasible_profiles({Mono::DMono, Mono::DMono}));
  const std::set<int> nn = ids(feasible_profiles({Mono::None, Mono::None}));
  CHECK(std::includes(dd.begin(), dd.end(), ss.begin(), ss.end()));
  CHECK(std::includes(nn.begin(), nn.end(), dd.begin(), dd.end()));
  CHECK(ss.size() < dd.size());
  CHECK(dd.size() < nn.size());
  CHECK(nn.size() == 9);
}

TEST_CASE("observed-data-to-profile mapping reproduces the published table") {
  // rows: observation, then the expected sets under (S,S), (D,D), (S,D), (D,S)
  struct Row {
    Observation obs;
    std::set<int> expect[4];
  };
  const std::vector<Row> table = {
      {{0, 0, 0}, {{0, 1, 3}, {0, 1, 3}, {0, 1, 3}, {0, 1, 3}}},
      {{0, 1, 0}, {{5}, {5, 7}, {5}, {5, 7}}},
      {{0, 0, 1}, {{6}, {6, 8}, {6, 8}, {6}}},
      {{1, 0, 0}, {{0}, {0}, {0}, {0}}},
      {{1, 1, 0}, {{3, 5}, {3, 5, 8}, {3, 5, 8}, {3, 5}}},
      {{1, 0, 1}, {{1, 6}, {1, 6, 7}, {1, 6}, {1, 6, 7}}},
  };
  for (const Row& row : table)
    for (size_t c = 0; c < kTableCombos.size(); ++c)
      CHECK(ids(compatible_profiles(row.obs, kTableCombos[c])) == row.expect[c]);
}

TEST_CASE("every observation is compatible with some profile under every combo") {
  const std::vector<Observation> observations = {
      {0, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 0}, {1, 1, 0}, {1, 0, 1}};
  for (const AssumptionCombo& combo : all_combos())
    for (const Observation& obs : observations)
      CHECK(!compatible_profiles(obs, combo).empty());
}

TEST_CASE("feasible profiles generate exactly the mapped observations") {
  // regenerate the observed-data table from the profile algebra and check the
  // compatible sets agree with a direct arm-coordinate match
  for (const AssumptionCombo& combo : kTableCombos) {
    for (const Profile& p : feasible_profiles(combo)) {
      for (int a = 0; a < 2; ++a) {
        const Observation obs{a, p.y1(a), p.y2(a)};
        const auto compat = ids(compatible_profiles(obs, combo));
        CHECK(compat.contains(p.id));
      }
    }
  }
}

TEST_CASE("inconsistent observation is rejected") {
  CHECK_THROWS_AS(compatible_profiles({0, 1, 1}, {Mono::SMono, Mono::SMono}), DataError);
  CHECK_THROWS_AS(compatible_profiles({2, 1, 0}, {Mono::SMono, Mono::SMono}), DataError);
}

TEST_CASE("combo parsing") {
  const AssumptionCombo c = parse_combo("d,s");
  CHECK(c.subtype1 == Mono::DMono);
  CHECK(c.subtype2 == Mono::SMono);
  CHECK(parse_combo("n,n").subtype1 == Mono::None);
  CHECK_THROWS_AS(parse_combo("x,s"), ConfigError);
  CHECK_THROWS_AS(parse_combo("ss"), ConfigError);
}
