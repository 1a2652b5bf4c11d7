#include "ucbvi/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ucbvi/format.hpp"

namespace ucbvi {

AgentState make_agent(const Grid& grid, RewardTable r_agg, const AgentParams& params) {
  if (params.horizon < 1) throw std::invalid_argument("agent: horizon must be >= 1");
  if (params.episodes < 1) throw std::invalid_argument("agent: episodes must be >= 1");
  if (!(params.delta > 0.0 && params.delta < 1.0)) {
    throw std::invalid_argument("agent: delta must lie in (0,1)");
  }
  if (r_agg.cell_count != grid.cell_count()) {
    throw std::invalid_argument("agent: reward table does not match the grid");
  }
  AgentState st;
  st.cells = grid.cell_count();
  st.actions = r_agg.action_count;
  st.horizon = params.horizon;
  st.n_per_dim = grid.n();
  st.total_steps = params.episodes * params.horizon;
  st.delta = params.delta;
  st.log_term = std::log(5.0 * st.cells * st.actions * static_cast<double>(st.total_steps) /
                         st.delta);

  const auto c = static_cast<std::size_t>(st.cells);
  const auto a = static_cast<std::size_t>(st.actions);
  const auto h = static_cast<std::size_t>(st.horizon);
  st.n_sas.assign(c * a * c, 0);
  st.n_sa.assign(c * a, 0);
  st.n_step.assign((h + 1) * c, 0);
  st.p_hat.assign(c * a * c, 0.0);
  st.q.assign(h * c * a, static_cast<double>(st.horizon));
  st.v.assign((h + 1) * c, 0.0);
  for (std::size_t i = 0; i < h * c; ++i) st.v[i] = static_cast<double>(st.horizon);
  st.r_agg = std::move(r_agg.values);
  return st;
}

void update_model(AgentState& st, std::span<const Transition> transitions) {
  std::vector<std::size_t> touched;
  for (const auto& t : transitions) {
    if (t.step < 1 || t.step > st.horizon) {
      throw std::invalid_argument("update_model: step " + std::to_string(t.step) +
                                  " outside [1, H]");
    }
    ++st.n_sas[st.sas(t.cell, t.action, t.next_cell)];
    ++st.n_sa[st.sa(t.cell, t.action)];
    ++st.n_step[st.hx(t.step, t.cell)];
    if (t.step == st.horizon) ++st.n_step[st.hx(st.horizon + 1, t.next_cell)];
    touched.push_back(st.sa(t.cell, t.action));
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  const auto c = static_cast<std::size_t>(st.cells);
  for (std::size_t row : touched) {
    const double n = static_cast<double>(st.n_sa[row]);
    for (std::size_t y = 0; y < c; ++y) {
      st.p_hat[row * c + y] = static_cast<double>(st.n_sas[row * c + y]) / n;
    }
  }
}

double bonus(const AgentState& st, int h, int x, int a) {
  const std::int64_t visits = st.visits(x, a);
  if (visits < 1) {
    throw std::logic_error("bonus: (x, a) has never been visited; its Q is H by definition");
  }
  const double n = static_cast<double>(visits);
  const double H = st.horizon;
  const double L = st.log_term;
  const double S = st.cells;
  const double A = st.actions;
  const std::size_t row = st.sa(x, a) * static_cast<std::size_t>(st.cells);

  double mean = 0.0;
  for (int y = 0; y < st.cells; ++y) mean += st.p_hat[row + y] * st.v_at(h + 1, y);
  double var = 0.0;
  double correction = 0.0;
  const double cap = H * H;
  const double scale = 100.0 * H * H * H * S * S * A * L * L;
  for (int y = 0; y < st.cells; ++y) {
    const double p = st.p_hat[row + y];
    if (p == 0.0) continue;
    const double dv = st.v_at(h + 1, y) - mean;
    var += p * dv * dv;
    const std::int64_t next_visits = st.step_visits(h + 1, y);
    // An unvisited next state makes the ratio infinite, so the cap applies.
    const double term = next_visits == 0 ? cap : std::min(scale / static_cast<double>(next_visits), cap);
    correction += p * term;
  }
  return std::sqrt(8.0 * L * var / n) + 14.0 * H * L / (3.0 * n) +
         std::sqrt(8.0 * correction / n);
}

void plan(AgentState& st) {
  const double H = st.horizon;
  const auto c = static_cast<std::size_t>(st.cells);
  for (int x = 0; x < st.cells; ++x) st.v[st.hx(st.horizon + 1, x)] = 0.0;
  for (int h = st.horizon; h >= 1; --h) {
    const double* next_v = st.v.data() + st.hx(h + 1, 0);
    for (int x = 0; x < st.cells; ++x) {
      double best = 0.0;
      for (int a = 0; a < st.actions; ++a) {
        double& q = st.q[st.hxa(h, x, a)];
        if (st.visits(x, a) > 0) {
          const double* row = st.p_hat.data() + st.sa(x, a) * c;
          double expected = 0.0;
          for (std::size_t y = 0; y < c; ++y) expected += row[y] * next_v[y];
          const double candidate = st.r_agg[st.sa(x, a)] + expected + bonus(st, h, x, a);
          q = std::min({q, H, candidate});
        } else {
          q = H;
        }
        best = a == 0 ? q : std::max(best, q);
      }
      st.v[st.hx(h, x)] = best;
    }
  }
}

int act(const AgentState& st, int h, int x) {
  int best = 0;
  double best_q = st.q_at(h, x, 0);
  for (int a = 1; a < st.actions; ++a) {
    const double q = st.q_at(h, x, a);
    if (q > best_q) {
      best = a;
      best_q = q;
    }
  }
  return best;
}

std::vector<int> greedy_policy(const AgentState& st) {
  std::vector<int> policy(static_cast<std::size_t>(st.horizon * st.cells));
  for (int h = 1; h <= st.horizon; ++h)
    for (int x = 0; x < st.cells; ++x) policy[st.hx(h, x)] = act(st, h, x);
  return policy;
}

EpisodeRecord run_episode(AgentState& st, const ContinuousMdp& env, const Grid& grid,
                          StateView start, Rng& rng) {
  plan(st);

  EpisodeRecord rec;
  rec.start.assign(start.begin(), start.end());
  rec.policy = greedy_policy(st);
  const auto horizon = static_cast<std::size_t>(st.horizon);
  rec.states.reserve(horizon + 1);
  rec.cells.reserve(horizon + 1);
  rec.actions.reserve(horizon);
  rec.rewards.reserve(horizon);

  std::vector<Transition> observed;
  observed.reserve(horizon);
  State s = rec.start;
  int x = grid.flat_of(s);
  rec.optimistic_start_value = st.v_at(1, x);
  rec.states.push_back(s);
  rec.cells.push_back(x);
  for (int h = 1; h <= st.horizon; ++h) {
    const int a = rec.policy[st.hx(h, x)];
    rec.actions.push_back(a);
    rec.rewards.push_back(env.reward(s, a));
    s = env.sample_next(s, a, rng);
    const int y = grid.flat_of(s);  // rejects samples outside the box
    observed.push_back({x, a, y, h});
    rec.states.push_back(s);
    rec.cells.push_back(y);
    x = y;
  }
  update_model(st, observed);
  return rec;
}

void write_agent_snapshot(std::ostream& out, const AgentState& st) {
  out << "h,cell,action,q,v,visits\n";
  for (int h = 1; h <= st.horizon; ++h)
    for (int x = 0; x < st.cells; ++x)
      for (int a = 0; a < st.actions; ++a)
        out << h << ',' << x << ',' << a << ',' << format_double(st.q_at(h, x, a)) << ','
            << format_double(st.v_at(h, x)) << ',' << st.visits(x, a) << '\n';
}

}  // namespace ucbvi
