#include <cmath>
#include <sstream>

#include "doctest.h"
#include "ricci/errors.hpp"
#include "ricci/grid.hpp"
#include "ricci/profiles.hpp"
#include "ricci/quadrature.hpp"

using namespace ricci;
using namespace ricci::profiles;

namespace {
constexpr double kPi = 3.14159265358979323846;

ScalarProfile ramp_then_flat() {
  return ScalarProfile({ProfilePiece::affine(0.0, 1.0, 0.0, 1.0),
                        ProfilePiece::affine(1.0, 2.0, 1.0, 0.0)},
                       "ramp_then_flat");
}
}  // namespace

TEST_CASE("grid nodes are uniform plus sorted extras") {
  GridSpec g{0.0, 1.0, 0.25, {}};
  auto n = g.nodes();
  REQUIRE(n.size() == 5);
  CHECK(n.front() == 0.0);
  CHECK(n.back() == 1.0);

  g.extra = {0.1, 0.5, 3.0};
  n = g.nodes();
  REQUIRE(n.size() == 6);
  CHECK(n[1] == doctest::Approx(0.1));
}

TEST_CASE("adaptive quadrature integrates smooth functions") {
  const double s = integrate([](double x) { return std::sin(x); }, 0.0, kPi);
  CHECK(std::abs(s - 2.0) < 1e-11);
  const double t = integrate_split([](double x) { return std::abs(x); }, -1.0, 2.0, {0.0});
  CHECK(std::abs(t - 2.5) < 1e-11);
  const double u = integrate_gl([](double x) { return std::exp(x); }, 0.0, 1.0, 8);
  CHECK(std::abs(u - (std::exp(1.0) - 1.0)) < 1e-13);
}

TEST_CASE("closed form pieces evaluate values and derivatives") {
  const auto aff = ProfilePiece::affine(0.0, 1.0, 2.0, -3.0);
  CHECK(aff.eval(0.5, 0) == doctest::Approx(0.5));
  CHECK(aff.eval(0.5, 1) == -3.0);
  CHECK(aff.eval(0.5, 2) == 0.0);

  const auto sin_pc = ProfilePiece::sinusoid(0.0, kPi, 2.0, 3.0, 0.5, 1.0);
  const double r = 0.7;
  CHECK(sin_pc.eval(r, 0) == doctest::Approx(2.0 * std::sin(3.0 * r + 0.5) + 1.0));
  CHECK(sin_pc.eval(r, 1) == doctest::Approx(6.0 * std::cos(3.0 * r + 0.5)));
  CHECK(sin_pc.eval(r, 2) == doctest::Approx(-18.0 * std::sin(3.0 * r + 0.5)));

  const auto poly = ProfilePiece::polynomial(0.0, 2.0, 1.0, {1.0, 0.0, -2.0, 0.5});
  // f(x) = 1 - 2 (x-1)^2 + 0.5 (x-1)^3
  CHECK(poly.eval(1.5, 0) == doctest::Approx(1.0 - 0.5 + 0.0625));
  CHECK(poly.eval(1.5, 1) == doctest::Approx(-2.0 + 0.375));
  CHECK(poly.eval(1.5, 2) == doctest::Approx(-4.0 + 1.5));
}

TEST_CASE("table pieces reproduce a cubic and its derivatives") {
  auto f = [](double x) { return x * x * x - 2.0 * x; };
  const double h = 0.01, start = -0.02;
  std::vector<double> vals;
  for (int i = 0; i <= 104; ++i) vals.push_back(f(start + i * h));
  const auto tab = ProfilePiece::table(0.0, 1.0, start, h, vals);

  CHECK(std::abs(tab.eval(0.5037, 0) - f(0.5037)) < 1e-12);
  CHECK(std::abs(tab.eval(0.0, 0) - f(0.0)) < 1e-14);
  CHECK(std::abs(tab.eval(1.0, 0) - f(1.0)) < 1e-13);
  CHECK(std::abs(tab.eval(0.37, 1) - (3.0 * 0.37 * 0.37 - 2.0)) < 2e-4);
  CHECK(std::abs(tab.eval(0.37, 2) - 6.0 * 0.37) < 1e-9);
}

TEST_CASE("profile construction enforces contiguity and continuity") {
  CHECK_THROWS_AS(ScalarProfile(std::vector<ProfilePiece>{}), ParameterError);
  CHECK_THROWS_AS(ScalarProfile({ProfilePiece::affine(0.0, 1.0, 0.0, 1.0),
                                 ProfilePiece::affine(1.5, 2.0, 1.5, 1.0)}),
                  ParameterError);
  CHECK_THROWS_AS(ScalarProfile({ProfilePiece::affine(0.0, 1.0, 0.0, 1.0),
                                 ProfilePiece::affine(1.0, 2.0, 2.0, 0.0)}),
                  ParameterError);

  const auto p = ramp_then_flat();
  CHECK(p.lo() == 0.0);
  CHECK(p.hi() == 2.0);
  REQUIRE(p.breakpoints().size() == 1);
  CHECK(p.breakpoints()[0] == 1.0);
}

TEST_CASE("profile evaluation uses the left piece at a breakpoint") {
  const auto p = ScalarProfile({ProfilePiece::affine(0.0, 1.0, 0.0, 1.0),
                                ProfilePiece::affine(1.0, 2.0, 2.0, -1.0)});
  CHECK(p.eval(1.0, 1) == 1.0);
  CHECK(p.eval(1.0 + 1e-6, 1) == -1.0);
  CHECK_THROWS_AS(p.eval(-0.5), DomainError);
  CHECK_THROWS_AS(p.eval(2.5), DomainError);
  CHECK_THROWS_AS(p.eval(0.5, 3), ParameterError);
  // Tiny excursions outside the domain are clamped, not rejected.
  CHECK(p.eval(-1e-12) == 0.0);
  CHECK(p.eval(2.0 + 1e-12) == doctest::Approx(0.0));
}

TEST_CASE("affine_change rescales values and arguments but keeps slopes") {
  const auto p = ScalarProfile({ProfilePiece::affine(0.0, 1.0, 0.0, 1.0),
                                ProfilePiece::sinusoid(1.0, 2.0, 1.0, kPi / 2.0,
                                                       -kPi / 2.0, 1.0)});
  const double scale = 0.5, shift = 0.25;
  const auto q = affine_change(p, scale, shift);
  CHECK(q.lo() == doctest::Approx(shift));
  CHECK(q.hi() == doctest::Approx(scale * 2.0 + shift));
  CHECK(q.pieces()[0].a1 == 1.0);
  for (double x : {0.3, 0.6, 0.9, 1.2}) {
    CHECK(q.eval(x, 0) == doctest::Approx(scale * p.eval((x - shift) / scale, 0)));
    CHECK(q.eval(x, 1) == doctest::Approx(p.eval((x - shift) / scale, 1)));
  }
}

TEST_CASE("mirror_about reflects the graph") {
  const auto p = ScalarProfile({ProfilePiece::affine(0.0, 1.0, 0.0, 1.0),
                                ProfilePiece::polynomial(1.0, 2.0, 1.0, {1.0, 1.0, -0.5})});
  const auto q = mirror_about(p, kPi);
  CHECK(q.lo() == doctest::Approx(kPi - 2.0));
  CHECK(q.hi() == doctest::Approx(kPi));
  for (double x : {kPi - 1.7, kPi - 1.1, kPi - 0.2}) {
    CHECK(q.eval(x, 0) == doctest::Approx(p.eval(kPi - x, 0)));
    CHECK(q.eval(x, 1) == doctest::Approx(-p.eval(kPi - x, 1)));
    CHECK(q.eval(x, 2) == doctest::Approx(p.eval(kPi - x, 2)));
  }
}

TEST_CASE("restrict_to clips the domain without changing values") {
  const auto p = ramp_then_flat();
  const auto q = restrict_to(p, 0.5, 1.5);
  CHECK(q.lo() == 0.5);
  CHECK(q.hi() == 1.5);
  CHECK(q.eval(0.75) == p.eval(0.75));
  CHECK(q.eval(1.25) == p.eval(1.25));
  CHECK_THROWS_AS(q.eval(0.25), DomainError);
  CHECK_THROWS_AS(restrict_to(p, -1.0, 1.0), ParameterError);
}

TEST_CASE("profiles round trip through json exactly") {
  std::vector<double> vals;
  for (int i = 0; i <= 24; ++i) {
    const double x = 1.49 + 0.005 * i;
    vals.push_back(0.975 + 0.25 * std::sin(3.0 * (x - 1.5)));
  }
  const auto p = ScalarProfile(
      {ProfilePiece::affine(0.0, 1.0, 0.0, 0.7),
       ProfilePiece::polynomial(1.0, 1.5, 1.0, {0.7, 0.7, -0.3}),
       ProfilePiece::table(1.5, 1.6, 1.49, 0.005, vals)},
      "roundtrip");
  const auto j = p.to_json();
  const auto q = ScalarProfile::from_json(j);
  CHECK(q.name() == "roundtrip");
  REQUIRE(q.pieces().size() == 3);
  for (double x : {0.0, 0.31, 1.0, 1.23, 1.5, 1.55, 1.6})
    CHECK(q.eval(x, 0) == p.eval(x, 0));

  // Serialized doubles parse back bitwise.
  const auto text = j.dump();
  const auto q2 = ScalarProfile::from_json(nlohmann::json::parse(text));
  CHECK(q2.eval(1.55, 0) == p.eval(1.55, 0));
}

TEST_CASE("grid csv has a header and one row per node") {
  const auto p = ramp_then_flat();
  std::ostringstream os;
  p.write_grid_csv(os, 0.5);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "r,value,d1,d2");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("mollifier kernel is normalized with compact support") {
  const MollifierKernel k(0.25);
  CHECK(std::abs(k.integral() - 1.0) < 1e-10);
  CHECK(k(0.3) == 0.0);
  CHECK(k(0.25) == 0.0);
  CHECK(k(0.1) == doctest::Approx(k(-0.1)));
  CHECK(k(0.0) > k(0.1));
  CHECK_THROWS_AS(MollifierKernel(0.0), ParameterError);
}

TEST_CASE("mollify reproduces affine stretches exactly and rounds the corner") {
  const auto p = ramp_then_flat();
  const MollifierKernel k(0.25);
  const auto m = mollify(p, k);
  CHECK(m.lo() == doctest::Approx(0.25));
  CHECK(m.hi() == doctest::Approx(1.75));

  // Far from the corner the output is the same affine formula.
  CHECK(m.eval(0.5, 0) == 0.5);
  CHECK(m.eval(0.5, 1) == 1.0);
  CHECK(m.eval(1.5, 0) == 1.0);
  CHECK(m.eval(1.5, 1) == 0.0);

  // At the corner the smoothed value drops by the kernel first moment.
  const double moment =
      integrate([&](double s) { return s * k(s); }, 0.0, k.radius(), 1e-13);
  CHECK(std::abs(m.eval(1.0, 0) - (1.0 - moment)) < 1e-9);

  // Smoothing a concave corner keeps the profile concave and 1-Lipschitz.
  const auto rep = check_regularity(m, GridSpec{m.lo(), m.hi(), 1e-3, {}});
  CHECK(rep.concave);
  CHECK(rep.lipschitz_constant <= 1.0 + 1e-9);
  for (const auto& jmp : rep.breakpoint_jumps) {
    CHECK(jmp.value < 1e-11);
    CHECK(jmp.d1 < 1e-6);
  }
}

TEST_CASE("concave_smooth replaces a corner by a quintic with matched jets") {
  const auto p = ramp_then_flat();
  const auto q = concave_smooth(p, 1.0, 0.25);
  REQUIRE(q.pieces().size() == 3);
  CHECK(q.eval(0.5, 0) == 0.5);
  CHECK(q.eval(1.6, 0) == 1.0);
  CHECK(q.eval(0.75, 0) == doctest::Approx(0.75));
  CHECK(q.eval(1.25, 0) == doctest::Approx(1.0));
  CHECK(q.eval(0.75, 1) == doctest::Approx(1.0));
  CHECK(q.eval(1.25, 1) == doctest::Approx(0.0).epsilon(1e-9));

  const auto rep = check_regularity(q, GridSpec{0.0, 2.0, 1e-3, {}});
  CHECK(rep.concave);
  CHECK(rep.lipschitz_constant <= 1.0 + 1e-9);
  for (const auto& jmp : rep.breakpoint_jumps) {
    CHECK(jmp.value < 1e-12);
    CHECK(jmp.d1 < 1e-12);
    CHECK(jmp.d2 < 1e-9);
  }
  // The quintic stays below the corner it replaces.
  for (int i = 0; i <= 100; ++i) {
    const double x = 0.75 + 0.5 * i / 100.0;
    CHECK(q.eval(x, 0) <= p.eval(x, 0) + 1e-12);
  }
}

TEST_CASE("concave_smooth is a no-op away from corners and rejects convex ones") {
  const auto line = make_affine(0.0, 2.0, 0.0, 1.0);
  const auto same = concave_smooth(line, 1.0, 0.25);
  CHECK(same.pieces().size() == 1);

  const auto convex = ScalarProfile({ProfilePiece::affine(0.0, 1.0, 1.0, 0.0),
                                     ProfilePiece::affine(1.0, 2.0, 0.0, 1.0)});
  CHECK_THROWS_AS(concave_smooth(convex, 1.0, 0.25), ParameterError);
}
