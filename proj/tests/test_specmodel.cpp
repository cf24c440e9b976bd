#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spinstat/errors.hpp"
#include "spinstat/specmodel.hpp"

using namespace spinstat;
using namespace spinstat::specmodel;

namespace {

MoleculeSpec rigid(double nu0, double b_upper, double b_lower, double d) {
  MoleculeSpec m;
  m.nu0 = nu0;
  m.b_upper = b_upper;
  m.b_lower = b_lower;
  m.d_upper = d;
  m.d_lower = d;
  return m;
}

}  // namespace

TEST_CASE("allowed parity follows the electronic parity") {
  CHECK(allowed_parity(ElectronicParity::Symmetric) == JParity::Even);
  CHECK(allowed_parity(ElectronicParity::Antisymmetric) == JParity::Odd);
  CHECK_FALSE(is_allowed(ElectronicParity::Symmetric, 1));
  CHECK(is_allowed(ElectronicParity::Symmetric, 4));
  CHECK(is_allowed(ElectronicParity::Antisymmetric, 3));
}

TEST_CASE("line positions") {
  const auto m = rigid(1000.0, 0.4, 0.4, 0.0);
  CHECK(line_position(m, Branch::R, 0) == doctest::Approx(1000.8).epsilon(1e-15));
  CHECK(line_position(m, Branch::R, 2) == doctest::Approx(1002.4).epsilon(1e-15));
  CHECK(line_position(m, Branch::P, 1) == doctest::Approx(999.2).epsilon(1e-15));
  CHECK_THROWS_AS(line_position(m, Branch::P, 0), ValidationError);
  CHECK_THROWS_AS(line_position(m, Branch::R, -1), ValidationError);

  // 1000 + F'(11) - F''(10), evaluated in exact rationals: 2518698669 / 2500000.
  const auto d = rigid(1000.0, 0.39, 0.40, 1e-7);
  CHECK(line_position(d, Branch::R, 10) == doctest::Approx(1007.4794676).epsilon(1e-14));
  CHECK(term_value(0.4, 0.0, 3) == doctest::Approx(4.8));
}

TEST_CASE("R positions increase with J for the shipped defaults") {
  const auto m = co2_like_2um();
  CHECK(m == MoleculeSpec{});
  double prev = 0.0;
  for (int j = 0; j <= 60; ++j) {
    const double nu = line_position(m, Branch::R, j);
    CHECK(nu > prev);
    prev = nu;
  }
}

TEST_CASE("molecule validation") {
  auto bad = [](auto mutate) {
    MoleculeSpec m;
    mutate(m);
    return m;
  };
  CHECK_THROWS_AS(bad([](MoleculeSpec& m) { m.b_lower = 0.0; }).validate(), ValidationError);
  CHECK_THROWS_AS(bad([](MoleculeSpec& m) { m.d_upper = -1e-9; }).validate(), ValidationError);
  CHECK_THROWS_AS(bad([](MoleculeSpec& m) { m.nu0 = 0.0; }).validate(), ValidationError);
  CHECK_THROWS_AS(bad([](MoleculeSpec& m) { m.temperature = -3.0; }).validate(), ValidationError);
  CHECK_THROWS_AS(bad([](MoleculeSpec& m) { m.nuclear_spin = 1; }).validate(), ValidationError);
  CHECK_NOTHROW(MoleculeSpec{}.validate());
}

TEST_CASE("strength ratio in the high-temperature limit") {
  auto m = rigid(1000.0, 0.4, 0.4, 0.0);
  m.temperature = 1e12;
  const double r = raw_strength(m, Branch::R, 1, 1.0) / raw_strength(m, Branch::R, 0, 1.0);
  CHECK(r == doctest::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("forbidden strengths are linear in beta2_half") {
  const MoleculeSpec m;
  for (int j : {1, 3, 11, 25}) {
    const double a = raw_strength(m, Branch::R, j, 1e-3);
    const double b = raw_strength(m, Branch::R, j, 2e-3);
    CHECK(std::abs(b / a - 2.0) <= 1e-12);
    CHECK(std::abs(a / raw_strength(m, Branch::R, j, 1.0) - 1e-3) <= 1e-18);
    CHECK(raw_strength(m, Branch::R, j, 0.0) == 0.0);
  }
  // Allowed lines ignore beta2_half.
  CHECK(raw_strength(m, Branch::R, 2, 0.0) == raw_strength(m, Branch::R, 2, 0.7));
}

TEST_CASE("beta = 0 catalog contains only R(2J)") {
  const auto cat = build_catalog(MoleculeSpec{}, {}, 6, 0.0);
  REQUIRE(cat.lines.size() == 7);
  for (const auto& l : cat.lines) {
    CHECK(l.branch == Branch::R);
    CHECK(l.allowed == (l.j_lower % 2 == 0));
    CHECK((l.strength > 0.0) == (l.j_lower % 2 == 0));
  }
  CHECK(std::is_sorted(cat.lines.begin(), cat.lines.end(),
                       [](const auto& a, const auto& b) { return a.position < b.position; }));

  std::istringstream csv(to_csv(cat));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "branch,J_lower,position_cm1,strength,allowed");
  int rows = 0;
  while (std::getline(csv, line)) {
    const int j = std::stoi(line.substr(2));
    CHECK(j % 2 == 0);
    ++rows;
  }
  CHECK(rows == 4);
}

TEST_CASE("parity flip exchanges the surviving class") {
  MoleculeSpec anti;
  anti.electronic_parity = ElectronicParity::Antisymmetric;
  const auto sym = build_catalog(MoleculeSpec{}, {true, true}, 20, 0.0);
  const auto odd = build_catalog(anti, {true, true}, 20, 0.0);
  REQUIRE(sym.lines.size() == odd.lines.size());
  for (const auto& l : sym.lines)
    if (l.strength > 0.0) CHECK(l.j_lower % 2 == 0);
  for (const auto& l : odd.lines)
    if (l.strength > 0.0) CHECK(l.j_lower % 2 == 1);
  CHECK(sym.allowed_lines().size() + odd.allowed_lines().size() == sym.lines.size());
}

TEST_CASE("beta2_half = 0.5 catalog") {
  const MoleculeSpec m;
  const auto cat = build_catalog(m, {}, 6, 0.5);
  int nonzero = 0;
  for (const auto& l : cat.lines) {
    if (l.strength > 0.0) ++nonzero;
    if (!l.allowed) {
      const double mirrored = raw_strength(m, Branch::R, l.j_lower, 1.0) / cat.normalization;
      CHECK(l.strength == doctest::Approx(0.5 * mirrored).epsilon(1e-15));
    }
  }
  CHECK(nonzero == 7);
}

TEST_CASE("normalization: strongest allowed line is 1") {
  const auto cat = build_catalog(MoleculeSpec{}, {true, true}, 40, 1e-3);
  double best = 0.0;
  for (const auto& l : cat.allowed_lines()) best = std::max(best, l.strength);
  CHECK(best == 1.0);
  for (const auto& l : cat.lines)
    CHECK(l.strength == line_strength(cat.molecule, l.branch, l.j_lower, 1e-3, cat.normalization));
}

TEST_CASE("small catalogs and argument checks") {
  const auto one = build_catalog(MoleculeSpec{}, {}, 0, 0.0);
  REQUIRE(one.lines.size() == 1);
  CHECK(line_label(one.lines[0]) == "R(0)");
  CHECK(one.lines[0].strength == 1.0);

  CHECK_THROWS_AS(build_catalog(MoleculeSpec{}, {}, -1, 0.0), ValidationError);
  CHECK_THROWS_AS(build_catalog(MoleculeSpec{}, {}, 3, 1.5), ValidationError);
  CHECK_THROWS_AS(build_catalog(MoleculeSpec{}, {false, false}, 3, 0.0), ValidationError);
}

TEST_CASE("catalog hash tracks content") {
  const auto a = build_catalog(MoleculeSpec{}, {}, 10, 0.0);
  const auto b = build_catalog(MoleculeSpec{}, {}, 10, 0.0);
  const auto c = build_catalog(MoleculeSpec{}, {}, 10, 1e-6);
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  const auto j = to_json(a);
  CHECK(j.at("lines").size() == 11);
}
