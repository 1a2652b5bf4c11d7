#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "ucbvi/grid.hpp"

using namespace ucbvi;

namespace {

ContinuousMdp linear_reward_env() {
  auto env = make_constant_env(1, 1, 0.0);
  env.reward = [](StateView s, int) { return s[0]; };
  env.holder = {1.0, 1.0};
  return env;
}

// Smooth bump of half-width w around c; mass one, zero outside.
ContinuousMdp narrow_bump_env(double c, double w) {
  auto env = make_constant_env(1, 2, 0.5);
  env.density = [c, w](StateView y, StateView, int) {
    const double t = y[0] - c;
    return std::abs(t) < w ? (1.0 + std::cos(std::numbers::pi * t / w)) / (2.0 * w) : 0.0;
  };
  return env;
}

}  // namespace

TEST_CASE("interval_of examples") {
  const Grid g(4, 1);
  CHECK(g.interval_of(State{0.3}).per_dim == std::vector<int>{1});
  CHECK(g.interval_of(State{0.0}).flat_index == 0);
  CHECK(g.interval_of(State{0.25}).flat_index == 0);
  CHECK(g.interval_of(State{0.2500001}).flat_index == 1);
  CHECK(g.interval_of(State{1.0}).flat_index == 3);
  CHECK_THROWS_AS(g.interval_of(State{1.0000001}), std::out_of_range);
  CHECK_THROWS_AS(g.interval_of(State{-0.1}), std::out_of_range);
  CHECK_THROWS_AS(g.interval_of(State{0.1, 0.2}), std::out_of_range);

  const Grid g2(4, 2);
  const auto id = g2.interval_of(State{0.3, 0.8});
  CHECK(id.per_dim == std::vector<int>{1, 3});
  CHECK(id.flat_index == 1 * 4 + 3);
  CHECK(g2.interval_of(State{0.0, 0.0}).flat_index == 0);
}

TEST_CASE("grid shape and defaults") {
  CHECK(Grid(5, 1).quadrature_points() == 64);
  CHECK(Grid(5, 2).quadrature_points() == 16);
  CHECK(Grid(5, 2).cell_count() == 25);
  CHECK(Grid(5, 3, 2).cell_count() == 125);
  CHECK(Grid(8, 1).width() == 0.125);
  CHECK_THROWS_AS(Grid(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(Grid(2, 0), std::invalid_argument);
}

TEST_CASE("partition property") {
  Rng rng(1);
  for (int d : {1, 2, 3}) {
    const Grid g(5, d);
    for (int i = 0; i < 100000 / d; ++i) {
      State s(static_cast<std::size_t>(d));
      for (auto& v : s) v = rng.uniform();
      const auto id = g.interval_of(s);
      REQUIRE(id.flat_index >= 0);
      REQUIRE(id.flat_index < g.cell_count());
      REQUIRE(id.flat_index == g.flatten(id.per_dim));
      REQUIRE(g.unflatten(id.flat_index) == id.per_dim);
      // Membership: every coordinate lies in its half-open interval.
      for (int k = 0; k < d; ++k) {
        const double lo = id.per_dim[k] * g.width();
        REQUIRE((s[k] > lo || (id.per_dim[k] == 0 && s[k] >= 0.0)));
        REQUIRE(s[k] <= lo + g.width() + 1e-15);
      }
    }
    for (int c = 0; c < g.cell_count(); ++c) REQUIRE(g.flat_of(g.center_of(c)) == c);
  }
}

TEST_CASE("aggregate_reward examples") {
  const auto env = linear_reward_env();
  const Grid g(2, 1);
  CHECK(aggregate_reward(g, env, g.interval_of(State{0.1}), 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(aggregate_reward(g, env, g.interval_of(State{0.9}), 0) == doctest::Approx(0.75).epsilon(1e-14));

  const auto flat = make_constant_env(2, 2, 0.37);
  const Grid g2(3, 2);
  const auto table = aggregate_reward_table(g2, flat);
  for (double v : table.values) CHECK(v == doctest::Approx(0.37).epsilon(1e-14));

  // Exact cell means of (1 +- sin(5 pi s))/2 on n = 4, frozen from an
  // adaptive-quadrature evaluation.
  const auto sine = make_sine_1d();
  const auto dense = aggregate_reward_table(Grid(4, 1, 4096), sine);
  CHECK(std::abs(dense(0, 0) - 0.717355586089227) < 1e-8);
  CHECK(std::abs(dense(3, 1) - 0.282644413910773) < 1e-8);
  // The default m = 64 midpoint rule is within 1e-4.
  const auto t4 = aggregate_reward_table(Grid(4, 1), sine);
  CHECK(std::abs(t4(0, 0) - 0.717355586089227) < 1e-4);
  CHECK(std::abs(t4(3, 1) - 0.282644413910773) < 1e-4);
}

TEST_CASE("aggregate rewards converge when m doubles") {
  for (const auto& env : {make_sine_1d(), make_lower_bound_env(8, 4.0), make_sine_2d()}) {
    const int m = env.dimension == 1 ? 64 : 16;
    const auto coarse = aggregate_reward_table(Grid(8, env.dimension, m), env);
    const auto fine = aggregate_reward_table(Grid(8, env.dimension, 2 * m), env);
    for (std::size_t i = 0; i < coarse.values.size(); ++i) {
      CHECK(std::abs(coarse.values[i] - fine.values[i]) < 1e-4);
    }
  }
}

TEST_CASE("pointwise rewards stay within L n^-alpha of the aggregate") {
  Rng rng(9);
  for (const auto& env : {make_sine_1d(), make_lower_bound_env(8, 4.0), make_sine_2d()}) {
    for (int n : {4, 8, 16}) {
      const Grid g(n, env.dimension);
      const auto table = aggregate_reward_table(g, env);
      const double bound = env.holder.lipschitz * std::pow(n, -env.holder.alpha) + 1e-4;
      for (int i = 0; i < 2000; ++i) {
        State s(static_cast<std::size_t>(env.dimension));
        for (auto& v : s) v = rng.uniform();
        const int a = i % env.action_count;
        REQUIRE(std::abs(env.reward(s, a) - table(g.flat_of(s), a)) <= bound);
      }
    }
  }
}

TEST_CASE("aggregate_transition_matrix examples") {
  for (int n : {1, 2, 5}) {
    for (int d : {1, 2}) {
      const Grid g(n, d);
      const auto p = aggregate_transition_matrix(g, make_constant_env(d, 2, 0.5));
      const double expect = 1.0 / g.cell_count();
      for (double v : p.values) CHECK(v == doctest::Approx(expect).epsilon(1e-14));
      CHECK(p.max_raw_deviation < 1e-12);
    }
  }

  const Grid g(4, 1);
  const auto p = aggregate_transition_matrix(g, narrow_bump_env(0.625, 0.05), 64);
  for (int x = 0; x < 4; ++x)
    for (int a = 0; a < 2; ++a)
      for (int y = 0; y < 4; ++y) CHECK(std::abs(p(y, x, a) - (y == 2 ? 1.0 : 0.0)) <= 1e-6);
  CHECK(p.max_raw_deviation < 1e-4);

  auto no_density = make_sine_1d();
  no_density.density = nullptr;
  CHECK_THROWS_AS(aggregate_transition_matrix(g, no_density), std::invalid_argument);

  // A density that is far from normalized must be rejected.
  auto broken = make_sine_1d();
  broken.density = [](StateView, StateView, int) { return 1.01; };
  CHECK_THROWS_AS(aggregate_transition_matrix(g, broken), std::runtime_error);
}

TEST_CASE("aggregate transitions of smooth environments are stochastic") {
  Rng rng(4);
  for (int i = 0; i < 10; ++i) {
    const auto env = testing::make_smooth_env(testing::random_smooth_spec(rng));
    const Grid g(8, 1);
    const auto p = aggregate_transition_matrix(g, env);
    CHECK(p.max_raw_deviation < 1e-6);
    for (int x = 0; x < 8; ++x)
      for (int a = 0; a < env.action_count; ++a) {
        double sum = 0.0;
        for (double v : p.row(x, a)) {
          REQUIRE(v >= 0.0);
          sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
      }
  }
}

TEST_CASE("piecewise environments aggregate exactly on their own grid") {
  Rng rng(8);
  const auto m = testing::random_discrete_mdp(rng, 4, 2, 1);
  const auto sp = testing::to_piecewise(m);
  const auto env = make_piecewise_constant(sp.rewards, sp.transitions);
  const Grid g(4, 1);
  const auto r = aggregate_reward_table(g, env);
  const auto p = aggregate_transition_matrix(g, env);
  for (int x = 0; x < 4; ++x)
    for (int a = 0; a < 2; ++a) {
      CHECK(r(x, a) == doctest::Approx(sp.rewards[x][a]).epsilon(1e-14));
      for (int y = 0; y < 4; ++y) CHECK(p(y, x, a) == doctest::Approx(sp.transitions[x][a][y]).epsilon(1e-12));
    }
}

TEST_CASE("csv export") {
  const Grid g(2, 1);
  const auto env = make_constant_env(1, 1, 0.5);
  std::ostringstream p, r;
  write_transition_csv(p, aggregate_transition_matrix(g, env));
  write_reward_csv(r, aggregate_reward_table(g, env));
  CHECK(p.str() == "next_cell,cell,action,value\n0,0,0,0.5\n1,0,0,0.5\n0,1,0,0.5\n1,1,0,0.5\n");
  CHECK(r.str() == "cell,action,value\n0,0,0.5\n1,0,0.5\n");
}
