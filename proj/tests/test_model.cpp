#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "hopfsync/model.hpp"
#include "test_support.hpp"

using namespace hopfsync;
using Catch::Matchers::WithinAbs;
using testsupport::TestRng;

TEST_CASE("amplitude gain polynomial", "[model]") {
  ModelParams p;  // lambda0=-0.5, alpha=gamma=-0.2

  SECTION("r=0 returns lambda0") {
    CHECK(lambda_gain(0.0, p) == p.lambda0);
    p.lambda0 = 0.3;
    CHECK(lambda_gain(0.0, p) == 0.3);
  }

  SECTION("r=1 with defaults") {
    CHECK_THAT(lambda_gain(1.0, p), WithinAbs(-0.9, 1e-15));
  }

  SECTION("positive root of the gain at lambda0=0.2") {
    p.lambda0 = 0.2;
    const double r_star = 0.7861513777574233;  // r^2 = (-1+sqrt(5))/2
    CHECK_THAT(lambda_gain(r_star, p), WithinAbs(0.0, 1e-15));
    CHECK_THAT(r_star * r_star, WithinAbs((-1.0 + std::sqrt(5.0)) / 2.0, 1e-15));
  }
}

TEST_CASE("angular frequency polynomial", "[model]") {
  ModelParams p;  // omega0=2, omega1=0

  CHECK(omega_freq(0.0, p) == 2.0);
  CHECK(omega_freq(0.5, p) == 2.0);  // omega1=0: rigid rotation at any radius

  p.omega1 = 0.5;
  CHECK_THAT(omega_freq(2.0, p), WithinAbs(4.0, 1e-15));
  CHECK(omega_freq(0.0, p) == 2.0);
}

TEST_CASE("drift field", "[model]") {
  ModelParams p;

  SECTION("origin is a fixed point") {
    const Vec4 f = drift(State{0.0, 0.0, 0.0, 0.0}, p);
    for (double v : f) CHECK(v == 0.0);
  }

  SECTION("symmetric state oracle") {
    // x1=x2=1, y1=y2=0, d1=d2=0.1: coupling terms vanish, lambda(1)=-0.9,
    // omega(1)=2 so the drift is (-0.9, 2, -0.9, 2).
    p.d1 = 0.1;
    p.d2 = 0.1;
    const Vec4 f = drift(State{1.0, 0.0, 1.0, 0.0}, p);
    CHECK_THAT(f[0], WithinAbs(-0.9, 1e-15));
    CHECK_THAT(f[1], WithinAbs(2.0, 1e-15));
    CHECK_THAT(f[2], WithinAbs(-0.9, 1e-15));
    CHECK_THAT(f[3], WithinAbs(2.0, 1e-15));
  }

  SECTION("coupling enters through the x and y differences") {
    p.d1 = 0.25;
    p.d2 = 0.0;
    const State s{0.1, 0.0, 0.5, 0.0};
    const Vec4 f = drift(s, p);
    const Vec4 base = drift(s, ModelParams{});
    CHECK_THAT(f[0] - base[0], WithinAbs(0.25 * (0.5 - 0.1), 1e-15));
    CHECK_THAT(f[1] - base[1], WithinAbs(0.0, 1e-15));
    CHECK(f[2] == base[2]);  // d2=0: oscillator 2 unaffected
    CHECK(f[3] == base[3]);
  }

  SECTION("exchange symmetry is bit-exact") {
    TestRng rng(41);
    for (int it = 0; it < 200; ++it) {
      ModelParams q;
      q.lambda0 = rng.uniform(-1.0, 0.5);
      q.alpha = rng.uniform(-0.5, 0.0);
      q.gamma = rng.uniform(-0.5, 0.0);
      q.omega0 = rng.uniform(0.5, 3.0);
      q.omega1 = rng.uniform(-0.5, 0.5);
      q.d1 = rng.uniform(0.0, 0.3);
      q.d2 = rng.uniform(0.0, 0.3);
      const State s{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                    rng.uniform(-1, 1)};
      const State sw{s.x2, s.y2, s.x1, s.y1};
      const Vec4 f = drift(s, q);
      const Vec4 g = drift(sw, q.swapped());
      REQUIRE(f[0] == g[2]);
      REQUIRE(f[1] == g[3]);
      REQUIRE(f[2] == g[0]);
      REQUIRE(f[3] == g[1]);
    }
  }

  SECTION("finite for finite inputs") {
    TestRng rng(7);
    for (int it = 0; it < 100; ++it) {
      const State s{rng.uniform(-100, 100), rng.uniform(-100, 100),
                    rng.uniform(-100, 100), rng.uniform(-100, 100)};
      for (double v : drift(s, p)) REQUIRE(std::isfinite(v));
    }
  }
}

TEST_CASE("origin Jacobian", "[model]") {
  SECTION("uncoupled block structure") {
    ModelParams p;
    const Mat4 j = jacobian_origin(p);
    const double l0 = p.lambda0, w0 = p.omega0;
    const Mat4 expected{{{l0, -w0, 0.0, 0.0},
                         {w0, l0, 0.0, 0.0},
                         {0.0, 0.0, l0, -w0},
                         {0.0, 0.0, w0, l0}}};
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c) CHECK(j[r][c] == expected[r][c]);
  }

  SECTION("coupling appears on the diagonal and cross blocks") {
    ModelParams p;
    p.d1 = 0.1;
    p.d2 = 0.02;
    const Mat4 j = jacobian_origin(p);
    CHECK_THAT(j[0][0], WithinAbs(p.lambda0 - 0.1, 1e-15));
    CHECK_THAT(j[0][2], WithinAbs(0.1, 1e-15));
    CHECK_THAT(j[2][0], WithinAbs(0.02, 1e-15));
    CHECK_THAT(j[2][2], WithinAbs(p.lambda0 - 0.02, 1e-15));
    CHECK(j[0][1] == -p.omega0);
    CHECK(j[1][0] == p.omega0);
  }

  SECTION("matches central finite differences of the drift on random sets") {
    TestRng rng(2024);
    const double h = 1e-5;
    for (int it = 0; it < 100; ++it) {
      ModelParams q;
      q.lambda0 = rng.uniform(-1.0, 1.0);
      q.alpha = rng.uniform(-0.5, 0.0);
      q.gamma = rng.uniform(-0.5, 0.0);
      q.omega0 = rng.uniform(0.5, 3.0);
      q.omega1 = rng.uniform(-0.5, 0.5);
      q.d1 = rng.uniform(0.0, 0.3);
      q.d2 = rng.uniform(0.0, 0.3);
      const Mat4 j = jacobian_origin(q);
      for (std::size_t c = 0; c < 4; ++c) {
        State plus{0, 0, 0, 0}, minus{0, 0, 0, 0};
        double* pc[4] = {&plus.x1, &plus.y1, &plus.x2, &plus.y2};
        double* mc[4] = {&minus.x1, &minus.y1, &minus.x2, &minus.y2};
        *pc[c] = h;
        *mc[c] = -h;
        const Vec4 fp = drift(plus, q);
        const Vec4 fm = drift(minus, q);
        for (std::size_t r = 0; r < 4; ++r) {
          const double fd = (fp[r] - fm[r]) / (2.0 * h);
          REQUIRE_THAT(j[r][c], WithinAbs(fd, 1e-6));
        }
      }
    }
  }
}

TEST_CASE("parameter validation", "[model]") {
  ModelParams p;
  SECTION("defaults are valid") { CHECK_NOTHROW(p.validate()); }
  SECTION("negative coupling rejected") {
    p.d1 = -0.01;
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }
  SECTION("negative noise intensity rejected") {
    p.delta2 = -1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }
  SECTION("non-finite and non-positive frequency rejected") {
    p.omega0 = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.omega0 = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }
  SECTION("swapped exchanges the per-oscillator parameters") {
    p.d1 = 0.1;
    p.d2 = 0.2;
    p.delta1 = 0.3;
    p.delta2 = 0.4;
    const ModelParams s = p.swapped();
    CHECK(s.d1 == 0.2);
    CHECK(s.d2 == 0.1);
    CHECK(s.delta1 == 0.4);
    CHECK(s.delta2 == 0.3);
    CHECK(s.lambda0 == p.lambda0);
  }
}
