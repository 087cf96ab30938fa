#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "hubspoke/error.hpp"
#include "hubspoke/vrptw.hpp"

namespace hubspoke {

namespace {

constexpr double kEps = 1e-9;

using Seq = std::vector<std::size_t>;  // stop indices
using Clock = std::chrono::steady_clock;

// Arrival times and forward slack per position of one route. Position 0 is
// the depot start, 1..L the stops, L + 1 the return to the depot.
struct Schedule {
  std::vector<double> departure;
  std::vector<double> arrival;
  std::vector<double> slack;
  double load = 0.0;
};

class Search {
 public:
  Search(const VrptwProblem& p, const SolveOptions& o)
      : p_(p), opt_(o), rng_(o.seed), deadline_(Clock::now() + o.time_limit) {
    symmetric_ = true;
    const std::size_t n = p_.matrix.size();
    for (std::size_t a = 0; a < n && symmetric_; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (p_.matrix.distance_km(a, b) != p_.matrix.distance_km(b, a)) {
          symmetric_ = false;
          break;
        }
      }
    }
  }

  bool exhausted() const {
    return iterations_ >= opt_.max_iterations || Clock::now() >= deadline_;
  }

  double dist(std::size_t a, std::size_t b) const { return p_.matrix.distance_km(a, b); }
  double travel(std::size_t a, std::size_t b) const { return p_.matrix.duration_min(a, b); }

  double km(const Seq& r) const {
    if (r.empty()) return 0.0;
    double total = dist(0, r.front() + 1);
    for (std::size_t i = 1; i < r.size(); ++i) total += dist(r[i - 1] + 1, r[i] + 1);
    return total + dist(r.back() + 1, 0);
  }

  double load(const Seq& r) const {
    double total = 0.0;
    for (auto s : r) total += p_.stops[s].demand;
    return total;
  }

  bool feasible(const Seq& r) const {
    if (load(r) > p_.capacity + kEps) return false;
    double t = p_.shift_start;
    std::size_t at = 0;
    for (auto s : r) {
      const auto& st = p_.stops[s];
      t += travel(at, s + 1);
      if (t > st.latest + kEps) return false;
      t = std::max(t, st.earliest) + st.service_min;
      at = s + 1;
    }
    return t + travel(at, 0) <= p_.shift_end + kEps;
  }

  double cost(const std::vector<Seq>& routes) const {
    double total = 0.0;
    for (const auto& r : routes) {
      if (!r.empty()) total += p_.fleet_cost.fixed_per_truck + p_.fleet_cost.per_km * km(r);
    }
    return total;
  }

  Schedule schedule(const Seq& r) const {
    const std::size_t L = r.size();
    Schedule s;
    s.departure.assign(L + 2, 0.0);
    s.arrival.assign(L + 2, 0.0);
    s.slack.assign(L + 2, 0.0);
    std::vector<double> wait(L + 2, 0.0);
    s.arrival[0] = s.departure[0] = p_.shift_start;
    std::size_t at = 0;
    for (std::size_t pos = 1; pos <= L; ++pos) {
      const auto& st = p_.stops[r[pos - 1]];
      s.arrival[pos] = s.departure[pos - 1] + travel(at, r[pos - 1] + 1);
      wait[pos] = std::max(0.0, st.earliest - s.arrival[pos]);
      s.departure[pos] = s.arrival[pos] + wait[pos] + st.service_min;
      s.load += st.demand;
      at = r[pos - 1] + 1;
    }
    s.arrival[L + 1] = s.departure[L] + travel(at, 0);
    s.slack[L + 1] = p_.shift_end - s.arrival[L + 1];
    for (std::size_t pos = L; pos >= 1; --pos) {
      const double own = p_.stops[r[pos - 1]].latest - s.arrival[pos];
      s.slack[pos] = std::min(own, wait[pos] + s.slack[pos + 1]);
    }
    return s;
  }

  std::size_t node_at(const Seq& r, std::size_t pos) const {
    return (pos == 0 || pos == r.size() + 1) ? 0 : r[pos - 1] + 1;
  }

  // Feasibility of inserting stop u between positions pos and pos + 1,
  // O(1) through the forward slack of the successor.
  bool can_insert(const Seq& r, const Schedule& s, std::size_t pos, std::size_t u) const {
    const auto& st = p_.stops[u];
    if (s.load + st.demand > p_.capacity + kEps) return false;
    const std::size_t prev = node_at(r, pos);
    const std::size_t next = node_at(r, pos + 1);
    const double arrive = s.departure[pos] + travel(prev, u + 1);
    if (arrive > st.latest + kEps) return false;
    const double leave = std::max(arrive, st.earliest) + st.service_min;
    const double push = leave + travel(u + 1, next) - s.arrival[pos + 1];
    return push <= s.slack[pos + 1] + kEps;
  }

  double insertion_km(const Seq& r, std::size_t pos, std::size_t u) const {
    const std::size_t prev = node_at(r, pos);
    const std::size_t next = node_at(r, pos + 1);
    return dist(prev, u + 1) + dist(u + 1, next) - dist(prev, next);
  }

  // -------------------------------------------------------------------------
  // Construction

  std::vector<Seq> savings() const {
    const std::size_t n = p_.stops.size();
    std::vector<Seq> routes(n);
    std::vector<std::size_t> route_of(n);
    for (std::size_t i = 0; i < n; ++i) {
      routes[i] = {i};
      route_of[i] = i;
    }
    struct Saving {
      double value;
      std::size_t i, j;
    };
    std::vector<Saving> list;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double s = dist(i + 1, 0) + dist(0, j + 1) - dist(i + 1, j + 1);
        if (s > kEps) list.push_back({s, i, j});
      }
    }
    std::sort(list.begin(), list.end(), [](const Saving& a, const Saving& b) {
      if (a.value != b.value) return a.value > b.value;
      if (a.i != b.i) return a.i < b.i;
      return a.j < b.j;
    });
    for (const auto& s : list) {
      const std::size_t ri = route_of[s.i];
      const std::size_t rj = route_of[s.j];
      if (ri == rj) continue;
      if (routes[ri].back() != s.i || routes[rj].front() != s.j) continue;
      Seq merged = routes[ri];
      merged.insert(merged.end(), routes[rj].begin(), routes[rj].end());
      if (!feasible(merged)) continue;
      routes[ri] = std::move(merged);
      for (auto x : routes[rj]) route_of[x] = ri;
      routes[rj].clear();
    }
    std::vector<Seq> out;
    for (auto& r : routes) {
      if (!r.empty()) out.push_back(std::move(r));
    }
    insert_singletons(out);
    return out;
  }

  // Stops the savings pass could not merge get the cheapest feasible slot
  // in another route when that beats keeping their own truck.
  void insert_singletons(std::vector<Seq>& routes) const {
    for (std::size_t idx = 0; idx < routes.size();) {
      if (routes[idx].size() != 1) {
        ++idx;
        continue;
      }
      const std::size_t u = routes[idx].front();
      const double own = p_.fleet_cost.fixed_per_truck + p_.fleet_cost.per_km * km(routes[idx]);
      double best = own - kEps;
      std::size_t best_route = routes.size(), best_pos = 0;
      for (std::size_t t = 0; t < routes.size(); ++t) {
        if (t == idx) continue;
        const Schedule s = schedule(routes[t]);
        for (std::size_t pos = 0; pos <= routes[t].size(); ++pos) {
          const double c = p_.fleet_cost.per_km * insertion_km(routes[t], pos, u);
          if (c < best && can_insert(routes[t], s, pos, u)) {
            best = c;
            best_route = t;
            best_pos = pos;
          }
        }
      }
      if (best_route == routes.size()) {
        ++idx;
        continue;
      }
      routes[best_route].insert(routes[best_route].begin() + static_cast<long>(best_pos), u);
      routes.erase(routes.begin() + static_cast<long>(idx));
    }
  }

  // -------------------------------------------------------------------------
  // Neighbourhoods; each applies the first improving move it finds.

  void tidy(std::vector<Seq>& routes) const {
    routes.erase(std::remove_if(routes.begin(), routes.end(), [](const Seq& r) { return r.empty(); }),
                 routes.end());
  }

  std::vector<std::size_t> shuffled(std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[index(i)]);
    return idx;
  }

  std::size_t index(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
  }
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  bool relocate(std::vector<Seq>& routes) {
    const double fixed = p_.fleet_cost.fixed_per_truck;
    const double per_km = p_.fleet_cost.per_km;
    std::vector<Schedule> sched;
    sched.reserve(routes.size());
    for (const auto& r : routes) sched.push_back(schedule(r));

    for (auto r : shuffled(routes.size())) {
      const Seq& R = routes[r];
      for (std::size_t i = 0; i < R.size(); ++i) {
        const std::size_t u = R[i];
        const std::size_t prev = i == 0 ? 0 : R[i - 1] + 1;
        const std::size_t next = i + 1 == R.size() ? 0 : R[i + 1] + 1;
        const double gain_km = dist(prev, u + 1) + dist(u + 1, next) - dist(prev, next);
        const double freed = R.size() == 1 ? fixed : 0.0;
        Seq without = R;
        without.erase(without.begin() + static_cast<long>(i));

        for (std::size_t t = 0; t < routes.size(); ++t) {
          if (t == r) continue;
          for (std::size_t pos = 0; pos <= routes[t].size(); ++pos) {
            const double delta = per_km * (insertion_km(routes[t], pos, u) - gain_km) - freed;
            if (delta < -kEps && can_insert(routes[t], sched[t], pos, u) && feasible(without)) {
              routes[t].insert(routes[t].begin() + static_cast<long>(pos), u);
              routes[r] = std::move(without);
              tidy(routes);
              return true;
            }
          }
        }
        const double old_km = km(R);
        for (std::size_t pos = 0; pos <= without.size(); ++pos) {
          if (pos == i) continue;
          Seq moved = without;
          moved.insert(moved.begin() + static_cast<long>(pos), u);
          if (per_km * (km(moved) - old_km) < -kEps && feasible(moved)) {
            routes[r] = std::move(moved);
            return true;
          }
        }
        if (R.size() > 1) {
          const double delta = fixed + per_km * (dist(0, u + 1) + dist(u + 1, 0) - gain_km);
          if (delta < -kEps && feasible(without) && feasible(Seq{u})) {
            routes[r] = std::move(without);
            routes.push_back(Seq{u});
            return true;
          }
        }
      }
    }
    return false;
  }

  bool swap(std::vector<Seq>& routes) {
    const double per_km = p_.fleet_cost.per_km;
    std::vector<double> loads;
    for (const auto& r : routes) loads.push_back(load(r));
    for (auto r : shuffled(routes.size())) {
      for (std::size_t t = 0; t < routes.size(); ++t) {
        if (t == r) continue;
        const Seq& R = routes[r];
        const Seq& T = routes[t];
        for (std::size_t i = 0; i < R.size(); ++i) {
          const std::size_t u = R[i];
          const std::size_t rp = i == 0 ? 0 : R[i - 1] + 1;
          const std::size_t rn = i + 1 == R.size() ? 0 : R[i + 1] + 1;
          for (std::size_t j = 0; j < T.size(); ++j) {
            const std::size_t v = T[j];
            const double du = p_.stops[u].demand, dv = p_.stops[v].demand;
            if (loads[r] - du + dv > p_.capacity + kEps || loads[t] - dv + du > p_.capacity + kEps) {
              continue;
            }
            const std::size_t tp = j == 0 ? 0 : T[j - 1] + 1;
            const std::size_t tn = j + 1 == T.size() ? 0 : T[j + 1] + 1;
            const double delta_km = dist(rp, v + 1) + dist(v + 1, rn) - dist(rp, u + 1) -
                                    dist(u + 1, rn) + dist(tp, u + 1) + dist(u + 1, tn) -
                                    dist(tp, v + 1) - dist(v + 1, tn);
            if (per_km * delta_km >= -kEps) continue;
            Seq nr = R, nt = T;
            nr[i] = v;
            nt[j] = u;
            if (feasible(nr) && feasible(nt)) {
              routes[r] = std::move(nr);
              routes[t] = std::move(nt);
              return true;
            }
          }
        }
      }
    }
    return false;
  }

  // Tail exchange between two routes; also merges a route into another.
  bool two_opt_star(std::vector<Seq>& routes) {
    const double fixed = p_.fleet_cost.fixed_per_truck;
    const double per_km = p_.fleet_cost.per_km;
    for (auto r : shuffled(routes.size())) {
      for (std::size_t t = 0; t < routes.size(); ++t) {
        if (t == r) continue;
        const Seq& R = routes[r];
        const Seq& T = routes[t];
        std::vector<double> r_prefix(R.size() + 1, 0.0), t_prefix(T.size() + 1, 0.0);
        for (std::size_t i = 0; i < R.size(); ++i) r_prefix[i + 1] = r_prefix[i] + p_.stops[R[i]].demand;
        for (std::size_t j = 0; j < T.size(); ++j) t_prefix[j + 1] = t_prefix[j] + p_.stops[T[j]].demand;
        for (std::size_t i = 0; i <= R.size(); ++i) {
          for (std::size_t j = 0; j <= T.size(); ++j) {
            if (i == R.size() && j == T.size()) continue;
            if (i == 0 && j == 0) continue;
            const double new_r_load = r_prefix[i] + (t_prefix[T.size()] - t_prefix[j]);
            const double new_t_load = t_prefix[j] + (r_prefix[R.size()] - r_prefix[i]);
            if (new_r_load > p_.capacity + kEps || new_t_load > p_.capacity + kEps) continue;
            const std::size_t a = i == 0 ? 0 : R[i - 1] + 1;
            const std::size_t b = i == R.size() ? 0 : R[i] + 1;
            const std::size_t c = j == 0 ? 0 : T[j - 1] + 1;
            const std::size_t d = j == T.size() ? 0 : T[j] + 1;
            const std::size_t new_r_size = i + (T.size() - j);
            const std::size_t new_t_size = j + (R.size() - i);
            double delta = per_km * (dist(a, d) + dist(c, b) - dist(a, b) - dist(c, d));
            if (new_r_size == 0) delta -= fixed;
            if (new_t_size == 0) delta -= fixed;
            if (delta >= -kEps) continue;
            Seq nr(R.begin(), R.begin() + static_cast<long>(i));
            nr.insert(nr.end(), T.begin() + static_cast<long>(j), T.end());
            Seq nt(T.begin(), T.begin() + static_cast<long>(j));
            nt.insert(nt.end(), R.begin() + static_cast<long>(i), R.end());
            if (feasible(nr) && feasible(nt)) {
              routes[r] = std::move(nr);
              routes[t] = std::move(nt);
              tidy(routes);
              return true;
            }
          }
        }
      }
    }
    return false;
  }

  bool two_opt(std::vector<Seq>& routes) {
    const double per_km = p_.fleet_cost.per_km;
    for (auto r : shuffled(routes.size())) {
      const Seq& R = routes[r];
      const double old_km = km(R);
      for (std::size_t i = 0; i + 1 < R.size(); ++i) {
        for (std::size_t j = i + 1; j < R.size(); ++j) {
          const std::size_t a = i == 0 ? 0 : R[i - 1] + 1;
          const std::size_t b = j + 1 == R.size() ? 0 : R[j + 1] + 1;
          Seq nr;
          double delta_km;
          if (symmetric_) {
            delta_km = dist(a, R[j] + 1) + dist(R[i] + 1, b) - dist(a, R[i] + 1) - dist(R[j] + 1, b);
            if (per_km * delta_km >= -kEps) continue;
            nr = R;
            std::reverse(nr.begin() + static_cast<long>(i), nr.begin() + static_cast<long>(j) + 1);
          } else {
            nr = R;
            std::reverse(nr.begin() + static_cast<long>(i), nr.begin() + static_cast<long>(j) + 1);
            delta_km = km(nr) - old_km;
            if (per_km * delta_km >= -kEps) continue;
          }
          if (feasible(nr)) {
            routes[r] = std::move(nr);
            return true;
          }
        }
      }
    }
    return false;
  }

  void local_search(std::vector<Seq>& routes) {
    while (!exhausted()) {
      const bool improved =
          relocate(routes) || swap(routes) || two_opt_star(routes) || two_opt(routes);
      if (!improved) break;
      ++iterations_;
    }
  }

  // Removes a few random stops and reinserts them at noisy cheapest feasible
  // positions, opening a new route when none fits.
  void perturb(std::vector<Seq>& routes) {
    const std::size_t n = p_.stops.size();
    const std::size_t upper = std::max<std::size_t>(2, std::min(n, n / 5 + 2));
    const std::size_t q = std::min(n, 2 + index(upper - 1));
    std::vector<std::size_t> removed;
    for (auto s : shuffled(n)) {
      if (removed.size() == q) break;
      removed.push_back(s);
    }
    for (auto& r : routes) {
      std::erase_if(r, [&](std::size_t s) {
        return std::find(removed.begin(), removed.end(), s) != removed.end();
      });
    }
    tidy(routes);
    for (auto u : removed) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_route = routes.size(), best_pos = 0;
      for (std::size_t t = 0; t < routes.size(); ++t) {
        const Schedule s = schedule(routes[t]);
        for (std::size_t pos = 0; pos <= routes[t].size(); ++pos) {
          const double c = insertion_km(routes[t], pos, u) * (1.0 + 0.3 * uniform());
          if (c < best && can_insert(routes[t], s, pos, u)) {
            best = c;
            best_route = t;
            best_pos = pos;
          }
        }
      }
      if (best_route == routes.size()) routes.push_back(Seq{u});
      else routes[best_route].insert(routes[best_route].begin() + static_cast<long>(best_pos), u);
    }
  }

  std::vector<Seq> run(std::vector<Seq> routes) {
    local_search(routes);
    std::vector<Seq> best = routes;
    double best_cost = cost(best);
    double current_cost = best_cost;
    for (std::size_t round = 0; round < opt_.perturbations && !exhausted(); ++round) {
      std::vector<Seq> candidate = routes;
      perturb(candidate);
      ++iterations_;
      local_search(candidate);
      const double c = cost(candidate);
      if (c <= current_cost + kEps) {
        routes = std::move(candidate);
        current_cost = c;
        if (c < best_cost - kEps) {
          best = routes;
          best_cost = c;
        }
      }
    }
    return best;
  }

 private:
  const VrptwProblem& p_;
  SolveOptions opt_;
  std::mt19937_64 rng_;
  Clock::time_point deadline_;
  std::size_t iterations_ = 0;
  bool symmetric_ = true;
};

std::vector<Seq> sequences_of(const RoutePlan& plan) {
  std::vector<Seq> out;
  for (const auto& r : plan.routes) {
    if (!r.stops.empty()) out.push_back(r.stops);
  }
  return out;
}

}  // namespace

RoutePlan solve(const VrptwProblem& problem, const SolveOptions& options) {
  validate(problem);
  if (problem.stops.empty()) return plan_from_sequences(problem, {});

  Search search(problem, options);
  std::vector<std::string> unreachable;
  for (std::size_t i = 0; i < problem.stops.size(); ++i) {
    if (!search.feasible(Seq{i})) {
      unreachable.push_back(fmt::format("{} ('{}')", i, problem.stops[i].label));
    }
  }
  if (!unreachable.empty()) {
    std::string msg = "stops unreachable within their time window even by a dedicated truck:";
    for (const auto& s : unreachable) msg += " " + s;
    fail(ErrorCode::infeasible, msg);
  }

  auto plan = plan_from_sequences(problem, search.run(search.savings()));
  if (!plan.feasible) fail(ErrorCode::internal, "solver produced an infeasible plan");
  return plan;
}

RoutePlan improve(const VrptwProblem& problem, const RoutePlan& start, const SolveOptions& options) {
  validate(problem);
  auto initial = plan_from_sequences(problem, sequences_of(start));
  if (!initial.feasible) fail(ErrorCode::validation, "warm-start plan is not feasible");
  Search search(problem, options);
  auto plan = plan_from_sequences(problem, search.run(sequences_of(initial)));
  if (plan.total_cost > initial.total_cost) return initial;
  return plan;
}

}  // namespace hubspoke
