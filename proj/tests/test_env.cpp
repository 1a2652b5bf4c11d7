#include <cmath>
#include <numbers>

#include "doctest.h"
#include "support.hpp"
#include "ucbvi/env.hpp"
#include "ucbvi/grid.hpp"

using namespace ucbvi;

namespace {

double density_integral(const ContinuousMdp& env, StateView s, int a) {
  const int q = env.dimension == 1 ? 512 : 64;
  const Grid g(q, env.dimension, 1);
  const double volume = std::pow(1.0 / q, env.dimension);
  State y;
  double total = 0.0;
  for (int c = 0; c < g.cell_count(); ++c) {
    g.center_of(c, y);
    total += env.density(y, s, a) * volume;
  }
  return total;
}

std::vector<ContinuousMdp> builtins() {
  return {make_sine_1d(), make_sine_2d(), make_lower_bound_env(8, 4.0), make_lower_bound_env(3, 6.0)};
}

}  // namespace

TEST_CASE("sine1d examples") {
  const auto env = make_sine_1d();
  CHECK(env.dimension == 1);
  CHECK(env.action_count == 2);
  CHECK(env.raw_box[0].hi == doctest::Approx(5.0 * std::numbers::pi));
  const State s{0.1};
  CHECK(env.reward(s, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(env.reward(s, 1) == doctest::Approx(0.0).epsilon(1e-12));
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const State t{rng.uniform()};
    CHECK(env.reward(t, 0) + env.reward(t, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(env.density(State{rng.uniform()}, t, i % 2) == 1.0);
  }
}

TEST_CASE("sine2d examples") {
  const auto env = make_sine_2d();
  CHECK(env.dimension == 2);
  const State origin{0.0, 0.0};
  CHECK(env.reward(origin, 0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(env.reward(origin, 1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(env.density(State{0.3, 0.9}, State{0.1, 0.2}, 1) == 1.0);
}

TEST_CASE("lower-bound environment examples") {
  const int n = 8;
  const double L = 4.0;
  const auto env = make_lower_bound_env(n, L);
  for (int j = 0; j < n; ++j) {
    const State first{(j + 0.25) / n};
    const State second{(j + 0.75) / n};
    CHECK(env.reward(first, 0) - env.reward(first, 1) == doctest::Approx(L / (2.0 * n)).epsilon(1e-12));
    CHECK(env.reward(second, 1) - env.reward(second, 0) == doctest::Approx(L / (2.0 * n)).epsilon(1e-12));
    const State boundary{static_cast<double>(j) / n};
    CHECK(env.reward(boundary, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(env.reward(boundary, 1) == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK(env.reward(State{1.0}, 0) == doctest::Approx(0.5).epsilon(1e-12));

  // Mean of max_a r minus the mean of one action over a cell. The triangle
  // of height L/(4n) on a base of 1/(2n) averages to L/(8n) on its half;
  // 0.0625 frozen from an adaptive-quadrature evaluation at L = 4, n = 8.
  const Grid fine(n, 1, 4096);
  for (int c = 0; c < n; ++c) {
    double best = 0.0, single = 0.0;
    State s;
    for (int i = 0; i < 4096; ++i) {
      fine.sub_point(c, i, 4096, s);
      best += std::max(env.reward(s, 0), env.reward(s, 1));
      single += env.reward(s, 0);
    }
    CHECK((best - single) / 4096 == doctest::Approx(0.0625).epsilon(1e-6));
  }

  CHECK_THROWS_AS(make_lower_bound_env(2, 4.5), std::invalid_argument);
  CHECK_NOTHROW(make_lower_bound_env(2, 4.0));
  CHECK_THROWS_AS(make_lower_bound_env(0, 1.0), std::invalid_argument);
}

TEST_CASE("registry") {
  CHECK(make_env("sine1d", {}).name == "sine1d");
  CHECK(make_env("sine2d", {}).dimension == 2);
  const auto lb = make_env("lowerbound", {{"n_cells", 4}, {"L", 2.0}});
  CHECK(lb.holder.lipschitz == 2.0);
  CHECK_THROWS_AS(make_env("nope", {}), std::invalid_argument);
  CHECK_THROWS_AS(make_env("lowerbound", {{"n_cells", 2.5}}), std::invalid_argument);
}

TEST_CASE("rewards stay in [0,1] and samples stay in the box") {
  Rng rng(11);
  for (const auto& env : builtins()) {
    for (int i = 0; i < 10000; ++i) {
      State s(static_cast<std::size_t>(env.dimension));
      for (auto& v : s) v = rng.uniform();
      const int a = i % env.action_count;
      const double r = env.reward(s, a);
      REQUIRE(r >= 0.0);
      REQUIRE(r <= 1.0);
      const State next = env.sample_next(s, a, rng);
      REQUIRE(next.size() == s.size());
      for (double v : next) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
      }
    }
  }
}

TEST_CASE("densities integrate to one") {
  Rng rng(12);
  auto check = [&](const ContinuousMdp& env) {
    for (int i = 0; i < 100; ++i) {
      State s(static_cast<std::size_t>(env.dimension));
      for (auto& v : s) v = rng.uniform();
      const double total = density_integral(env, s, i % env.action_count);
      REQUIRE(total >= 1.0 - 1e-6);
      REQUIRE(total <= 1.0 + 1e-6);
    }
  };
  for (const auto& env : builtins()) check(env);
  for (int i = 0; i < 5; ++i) check(testing::make_smooth_env(testing::random_smooth_spec(rng)));
}

TEST_CASE("lower-bound rewards are Lipschitz with the declared constant") {
  Rng rng(13);
  for (int n : {1, 3, 8}) {
    const double L = 2.0 * n * rng.uniform() + 0.1;
    const auto env = make_lower_bound_env(n, std::min(L, 2.0 * n));
    for (int i = 0; i < 10000; ++i) {
      const State s{rng.uniform()};
      const State t{i % 2 ? rng.uniform() : std::clamp(s[0] + 1e-3 * (rng.uniform() - 0.5), 0.0, 1.0)};
      for (int a = 0; a < 2; ++a) {
        REQUIRE(std::abs(env.reward(s, a) - env.reward(t, a)) <=
                env.holder.lipschitz * std::abs(s[0] - t[0]) + 1e-12);
      }
    }
  }
}

TEST_CASE("piecewise-constant environment") {
  const auto env = make_piecewise_constant({{0.1, 0.9}, {0.4, 0.2}},
                                           {{{1.0, 0.0}, {0.5, 0.5}}, {{0.25, 0.75}, {0.0, 1.0}}});
  CHECK(env.reward(State{0.0}, 1) == 0.9);
  CHECK(env.reward(State{0.5}, 0) == 0.1);
  CHECK(env.reward(State{0.51}, 0) == 0.4);
  CHECK(env.density(State{0.7}, State{0.2}, 0) == 0.0);
  CHECK(env.density(State{0.2}, State{0.2}, 0) == 2.0);
  Rng rng(5);
  int second = 0;
  for (int i = 0; i < 20000; ++i) {
    const State y = env.sample_next(State{0.9}, 0, rng);
    REQUIRE(y[0] > 0.0);
    REQUIRE(y[0] < 1.0);
    REQUIRE(y[0] != 0.5);
    second += y[0] > 0.5;
  }
  CHECK(second / 20000.0 == doctest::Approx(0.75).epsilon(0.03));
  CHECK_THROWS_AS(make_piecewise_constant({{1.5}}, {{{1.0}}}), std::invalid_argument);
  CHECK_THROWS_AS(make_piecewise_constant({{0.5}}, {{{0.9}}}), std::invalid_argument);
}

TEST_CASE("estimate_holder examples") {
  const auto sine = make_sine_1d();
  const auto rep = estimate_holder(sine, 1.0, 20000, 7);
  REQUIRE(rep.reward_L_est.size() == 2);
  for (double l : rep.reward_L_est) {
    CHECK(l == doctest::Approx(5.0 * std::numbers::pi / 2.0).epsilon(0.05));
    CHECK(l <= sine.holder.lipschitz * (1.0 + 1e-9));
  }
  CHECK(rep.max_violation <= 1e-12);
  REQUIRE(rep.transition_L_est.has_value());
  for (double l : *rep.transition_L_est) CHECK(l == 0.0);

  const auto flat = estimate_holder(make_constant_env(1, 3, 0.4), 1.0, 500, 1);
  for (double l : flat.reward_L_est) CHECK(l == 0.0);

  auto no_density = make_sine_1d();
  no_density.density = nullptr;
  CHECK_FALSE(estimate_holder(no_density, 1.0, 100, 1).transition_L_est.has_value());
  CHECK_THROWS_AS(estimate_holder(sine, 1.0, 1, 1), std::invalid_argument);
}

TEST_CASE("estimate_holder respects declared constants and is deterministic") {
  Rng rng(21);
  for (int i = 0; i < 10; ++i) {
    const auto env = testing::make_smooth_env(testing::random_smooth_spec(rng));
    const auto rep = estimate_holder(env, env.holder.alpha, 2000, 99);
    CHECK(rep.max_violation <= 1e-9);
  }
  for (const auto& env : builtins()) {
    const auto a = estimate_holder(env, 1.0, 1000, 42);
    const auto b = estimate_holder(env, 1.0, 1000, 42);
    CHECK(a.reward_L_est == b.reward_L_est);
    CHECK(a.transition_L_est == b.transition_L_est);
    CHECK(a.max_violation == b.max_violation);
    CHECK(a.max_violation <= 1e-12);
  }
}

TEST_CASE("sampling is reproducible from the seed") {
  const auto env = make_lower_bound_env(4, 2.0);
  Rng a(77), b(77);
  for (int i = 0; i < 100; ++i) CHECK(env.sample_next(State{0.3}, 1, a) == env.sample_next(State{0.3}, 1, b));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
}
