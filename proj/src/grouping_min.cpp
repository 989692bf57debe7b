#include "grouping_min.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace dlcc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Ascending |group| quantile with linear interpolation between order stats.
double quantile_sorted(const std::vector<double>& asc, double q) {
  if (asc.empty()) return kInf;
  q = std::clamp(q, 0.0, 1.0);
  const double h = q * (asc.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, asc.size() - 1);
  return asc[lo] + (h - lo) * (asc[hi] - asc[lo]);
}
}  // namespace

std::vector<int> frequency_order(const CenterSet& cs, const std::vector<int>& positions) {
  std::vector<int> order = positions;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (cs.centers[a].frequency != cs.centers[b].frequency)
      return cs.centers[a].frequency > cs.centers[b].frequency;
    return cs.centers[a].index < cs.centers[b].index;
  });
  return order;
}

GroupingState group_by_local_depth(const std::vector<int>& ordered, const CenterSet& cs,
                                   double clamp_lo, double clamp_hi, Notes* notes) {
  if (ordered.empty()) throw Error(Errc::NoCenters, "no local centers to group");
  GroupingState st;
  st.order = ordered;
  const int t = static_cast<int>(ordered.size());
  if (t == 1) {
    st.groups = {{ordered[0]}};
    st.stable = {ordered[0]};
    return st;
  }

  // Valid neighbors: centers inside each center's top floor(s/2) similarity
  // entries (anchor excluded).
  const int top = std::max(0, cs.s / 2);
  std::vector<std::vector<int>> vn(t);
  std::vector<char> in_play(cs.centers.size(), 0);
  std::vector<int> pos_of(cs.n, -1);
  for (int a = 0; a < t; ++a) {
    in_play[ordered[a]] = 1;
    pos_of[cs.centers[ordered[a]].index] = a;
  }
  for (int a = 0; a < t; ++a) {
    const auto& members = cs.nbh(ordered[a]).members;
    for (int m = 1; m < static_cast<int>(members.size()) && m <= top; ++m) {
      const int p = pos_of[members[m]];
      if (p >= 0 && p != a) vn[a].push_back(p);
    }
  }

  std::vector<double> ms(t, 0.0);
  std::vector<int> cn(t, -1);
  for (int a = 0; a < t; ++a) {
    double sum = 0.0;
    for (int b : vn[a]) sum += cs.M(ordered[a], ordered[b]);
    ms[a] = vn[a].empty() ? 0.0 : sum / vn[a].size();
    int best = -1;
    double bestv = -1.0;
    for (int b = 0; b < t; ++b) {
      if (b == a) continue;
      const double v = cs.M(ordered[a], ordered[b]);
      if (v > bestv) {
        bestv = v;
        best = b;
      }
    }
    cn[a] = best;
  }

  std::vector<double> delta(t);
  for (int a = 0; a < t; ++a)
    delta[a] = std::clamp(std::min(ms[a], ms[cn[a]]), clamp_lo, clamp_hi);

  std::vector<int> stable;
  for (int a = 0; a < t; ++a) {
    bool ok = true;
    const double lda = cs.centers[ordered[a]].local_depth;
    for (int b : vn[a]) {
      if (cs.M(ordered[a], ordered[b]) >= delta[a] &&
          !(cs.centers[ordered[b]].local_depth < lda)) {
        ok = false;
        break;
      }
    }
    if (ok) stable.push_back(a);
  }
  if (stable.empty()) {
    int best = 0;
    for (int a = 1; a < t; ++a)
      if (cs.centers[ordered[a]].local_depth > cs.centers[ordered[best]].local_depth)
        best = a;
    stable.push_back(best);
    note(notes, "grouping: no stable centers; promoted the deepest center");
  }

  st.groups.assign(stable.size(), {});
  st.stable.resize(stable.size());
  std::vector<int> group_of(t, -1);
  for (size_t g = 0; g < stable.size(); ++g) {
    group_of[stable[g]] = static_cast<int>(g);
    st.stable[g] = ordered[stable[g]];
    st.groups[g].push_back(ordered[stable[g]]);
  }
  for (int a = 0; a < t; ++a) {
    if (group_of[a] >= 0) continue;
    int best = 0;
    double bestv = -1.0;
    for (size_t g = 0; g < stable.size(); ++g) {
      const double v = cs.M(ordered[a], ordered[stable[g]]);
      if (v > bestv) {
        bestv = v;
        best = static_cast<int>(g);
      }
    }
    st.groups[best].push_back(ordered[a]);
  }
  return st;
}

std::vector<double> cumulative_proportion(const std::vector<int>& ordered,
                                          const CenterSet& cs) {
  std::vector<char> covered(cs.n, 0);
  int count = 0;
  std::vector<double> p;
  p.reserve(ordered.size());
  for (int pos : ordered) {
    for (int m : cs.nbh(pos).members)
      if (!covered[m]) {
        covered[m] = 1;
        ++count;
      }
    p.push_back(static_cast<double>(count) / cs.n);
  }
  return p;
}

double MinChecks::mw(int pos, const std::vector<int>& group, const Eigen::MatrixXd& M) {
  double v = kInf;
  for (int other : group) v = std::min(v, M(pos, other));  // includes self (1)
  return v;
}

double MinChecks::mb(int pos, int group_idx, const std::vector<std::vector<int>>& groups,
                     const Eigen::MatrixXd& M) {
  double best = -kInf;
  for (size_t g = 0; g < groups.size(); ++g) {
    if (static_cast<int>(g) == group_idx || groups[g].empty()) continue;
    double mn = kInf;
    for (int other : groups[g]) mn = std::min(mn, M(pos, other));
    best = std::max(best, mn);
  }
  return best;
}

bool MinChecks::violates_min1(int pos, int group_idx,
                              const std::vector<std::vector<int>>& groups,
                              const Eigen::MatrixXd& M) {
  const double b = mb(pos, group_idx, groups, M);
  if (b == -kInf) return false;  // single group: vacuous
  return !(mw(pos, groups[group_idx], M) > b);
}

bool MinChecks::violates_min2(int pos, int group_idx,
                              const std::vector<std::vector<int>>& groups,
                              const Eigen::MatrixXd& M) {
  double own = -kInf;
  for (int other : groups[group_idx])
    if (other != pos) own = std::max(own, M(pos, other));
  if (own == -kInf) return false;  // singleton group: vacuous
  double cross = -kInf;
  for (size_t g = 0; g < groups.size(); ++g) {
    if (static_cast<int>(g) == group_idx) continue;
    for (int other : groups[g]) cross = std::max(cross, M(pos, other));
  }
  if (cross == -kInf) return false;
  return !(own > cross);
}

int MinChecks::count_violations(const std::vector<std::vector<int>>& groups,
                                const Eigen::MatrixXd& M) {
  int bad = 0;
  for (size_t g = 0; g < groups.size(); ++g)
    for (int pos : groups[g])
      if (violates_min1(pos, static_cast<int>(g), groups, M) ||
          violates_min2(pos, static_cast<int>(g), groups, M))
        ++bad;
  return bad;
}

std::vector<std::vector<int>> unique_neighbors(const std::vector<std::vector<int>>& groups,
                                               const CenterSet& cs) {
  const size_t g_count = groups.size();
  // owner = group covering an observation; -2 marks contested points.
  std::vector<int> owner(cs.n, -1);
  for (size_t g = 0; g < g_count; ++g)
    for (int pos : groups[g])
      for (int m : cs.nbh(pos).members) {
        if (owner[m] == -1)
          owner[m] = static_cast<int>(g);
        else if (owner[m] != static_cast<int>(g))
          owner[m] = -2;
      }
  std::vector<std::vector<int>> u(g_count);
  for (int m = 0; m < cs.n; ++m)
    if (owner[m] >= 0) u[owner[m]].push_back(m);
  return u;
}

namespace {

// Algorithm-2 high-coverage branch: drop groups dominated by overlap regions,
// then cut the frequency-ordered list at the last informative candidate.
std::vector<int> filter_min_high(std::vector<int> ordered, const CenterSet& cs,
                                 double clamp_lo, double clamp_hi, Notes* notes) {
  GroupingState st = group_by_local_depth(ordered, cs, clamp_lo, clamp_hi, notes);
  std::vector<std::vector<int>> groups = st.groups;

  while (true) {
    auto u = unique_neighbors(groups, cs);
    int di = -1;
    size_t smallest = 0;
    for (size_t g = 0; g < groups.size(); ++g) {
      if (static_cast<double>(u[g].size()) < cs.s / 10.0 &&
          (di < 0 || u[g].size() < smallest)) {
        di = static_cast<int>(g);
        smallest = u[g].size();
      }
    }
    if (di < 0) break;
    double dup_delta = kInf;  // singleton drop-group: nothing is "as similar"
    for (size_t a = 0; a < groups[di].size(); ++a)
      for (size_t b = a + 1; b < groups[di].size(); ++b)
        dup_delta = (dup_delta == kInf)
                        ? cs.M(groups[di][a], groups[di][b])
                        : std::max(dup_delta, cs.M(groups[di][a], groups[di][b]));

    std::set<int> drops(groups[di].begin(), groups[di].end());
    for (size_t g = 0; g < groups.size(); ++g) {
      if (static_cast<int>(g) == di) continue;
      for (int pos : groups[g]) {
        double mx = -kInf;
        for (int dpos : groups[di]) mx = std::max(mx, cs.M(pos, dpos));
        if (mx >= dup_delta) drops.insert(pos);
      }
    }
    note(notes, "filter: dropped a low-unique-neighbor group (" +
                    std::to_string(drops.size()) + " centers)");
    std::vector<std::vector<int>> next;
    for (size_t g = 0; g < groups.size(); ++g) {
      if (static_cast<int>(g) == di) continue;
      std::vector<int> keep;
      for (int pos : groups[g])
        if (!drops.count(pos)) keep.push_back(pos);
      if (!keep.empty()) next.push_back(std::move(keep));
    }
    groups = std::move(next);
    std::vector<int> survivors;
    for (int pos : ordered) {
      bool kept = false;
      for (const auto& g : groups) kept = kept || std::count(g.begin(), g.end(), pos);
      if (kept) survivors.push_back(pos);
    }
    ordered = std::move(survivors);
    if (ordered.empty())
      throw Error(Errc::NoCenters, "filtering removed every local center; try a different s");
  }

  const int t = static_cast<int>(ordered.size());
  std::vector<int> group_of(cs.centers.size(), -1);
  for (size_t g = 0; g < groups.size(); ++g)
    for (int pos : groups[g]) group_of[pos] = static_cast<int>(g);
  std::vector<int> order_idx(cs.centers.size(), -1);  // 1-based rank in `ordered`
  for (int a = 0; a < t; ++a) order_idx[ordered[a]] = a + 1;

  // First cutoff: reach 75% coverage and keep one center per group.
  std::vector<double> p = cumulative_proportion(ordered, cs);
  int t1 = t;
  for (int a = 0; a < t; ++a)
    if (p[a] >= 0.75) {
      t1 = a + 1;
      break;
    }
  int t2 = 1;
  for (const auto& g : groups) {
    int first = t;
    for (int pos : g) first = std::min(first, order_idx[pos]);
    t2 = std::max(t2, first);
  }
  const int cc1 = std::max(t1, t2);

  // Additional candidates: least similar within their own group prefix and no
  // more cross-similar than any earlier member of the group.
  std::vector<int> cands = {cc1};
  for (int i = cc1 + 1; i <= t; ++i) {
    const int pos_i = ordered[i - 1];
    const int gi = group_of[pos_i];
    std::vector<int> prefix;  // group members with order index <= i
    for (int l = 1; l <= i; ++l)
      if (group_of[ordered[l - 1]] == gi) prefix.push_back(ordered[l - 1]);
    auto rowsum = [&](int pos) {
      double sum = 0.0;
      for (int other : prefix)
        if (other != pos) sum += cs.M(pos, other);
      return sum;
    };
    bool cond1 = true;
    const double mine = rowsum(pos_i);
    for (int other : prefix)
      if (rowsum(other) < mine - 1e-12) {
        cond1 = false;
        break;
      }
    if (!cond1) continue;
    std::vector<int> outside;  // earlier centers in other groups
    for (int v = 1; v < i; ++v)
      if (group_of[ordered[v - 1]] != gi) outside.push_back(ordered[v - 1]);
    auto crossmax = [&](int pos) {
      double mx = 0.0;
      for (int other : outside) mx = std::max(mx, cs.M(pos, other));
      return mx;
    };
    bool cond2 = true;
    const double mine_cross = crossmax(pos_i);
    for (int other : prefix)
      if (other != pos_i && mine_cross > crossmax(other) + 1e-12) {
        cond2 = false;
        break;
      }
    if (cond2) cands.push_back(i);
  }

  // Bad points per candidate; stop before the first jump larger than one.
  std::vector<int> bp(cands.size());
  for (size_t q = 0; q < cands.size(); ++q) {
    std::vector<std::vector<int>> trimmed;
    for (const auto& g : groups) {
      std::vector<int> keep;
      for (int pos : g)
        if (order_idx[pos] <= cands[q]) keep.push_back(pos);
      if (!keep.empty()) trimmed.push_back(std::move(keep));
    }
    bp[q] = MinChecks::count_violations(trimmed, cs.M);
  }
  int cutoff = cands.back();
  for (size_t q = 0; q + 1 < cands.size(); ++q)
    if (bp[q + 1] - bp[q] > 1) {
      cutoff = cands[q];
      break;
    }

  std::vector<int> result;
  for (int a = 0; a < cutoff; ++a) result.push_back(ordered[a]);
  return result;
}

// Algorithm-2 low-coverage branch: keep centers dissimilar to other groups,
// then greedily re-add dropped centers (any rank/frequency) by coverage gain.
std::vector<int> filter_min_low(const std::vector<int>& ordered, const CenterSet& cs,
                                double clamp_lo, double clamp_hi, Notes* notes) {
  GroupingState st = group_by_local_depth(ordered, cs, clamp_lo, clamp_hi, notes);
  std::vector<int> kept;
  for (size_t g = 0; g < st.groups.size(); ++g) {
    for (int pos : st.groups[g]) {
      double within = 0.0;
      for (int other : st.groups[g])
        if (other != pos) within += cs.M(pos, other);
      const int denom = static_cast<int>(st.groups[g].size()) - 1;
      const double mean_within = denom > 0 ? within / denom : 0.0;
      double cross = 0.0;
      for (size_t h = 0; h < st.groups.size(); ++h) {
        if (h == g) continue;
        for (int other : st.groups[h]) cross = std::max(cross, cs.M(pos, other));
      }
      if (mean_within - cross > 0.0) kept.push_back(pos);
    }
  }

  std::vector<int> all_positions(cs.centers.size());
  std::iota(all_positions.begin(), all_positions.end(), 0);
  const double p_all = cumulative_proportion(frequency_order(cs, all_positions), cs).back();
  const double target = 0.9 * p_all;

  std::vector<char> covered(cs.n, 0);
  std::vector<char> in_kept(cs.centers.size(), 0);
  int count = 0;
  for (int pos : kept) {
    in_kept[pos] = 1;
    for (int m : cs.nbh(pos).members)
      if (!covered[m]) {
        covered[m] = 1;
        ++count;
      }
  }
  while (static_cast<double>(count) / cs.n < target) {
    int best = -1, best_gain = -1;
    for (int pos = 0; pos < static_cast<int>(cs.centers.size()); ++pos) {
      if (in_kept[pos]) continue;
      int gain = 0;
      for (int m : cs.nbh(pos).members)
        if (!covered[m]) ++gain;
      if (gain > best_gain ||
          (gain == best_gain && best >= 0 &&
           cs.centers[pos].index < cs.centers[best].index)) {
        best = pos;
        best_gain = gain;
      }
    }
    if (best < 0) break;
    in_kept[best] = 1;
    kept.push_back(best);
    for (int m : cs.nbh(best).members)
      if (!covered[m]) {
        covered[m] = 1;
        ++count;
      }
  }
  if (kept.empty())
    throw Error(Errc::NoCenters, "low-coverage filtering kept no centers; try a different s");
  note(notes, "filter: low-coverage branch kept " + std::to_string(kept.size()) + " centers");
  return frequency_order(cs, kept);
}

}  // namespace

std::vector<int> filter_min(const CenterSet& cs, double clamp_lo, double clamp_hi,
                            Notes* notes) {
  std::vector<int> initial;
  for (int pos = 0; pos < static_cast<int>(cs.centers.size()); ++pos)
    if (cs.centers[pos].frequency >= 2 && cs.centers[pos].self_rank <= 2)
      initial.push_back(pos);
  if (initial.empty())
    throw Error(Errc::NoCenters, "no reliable local centers (f >= 2, rank <= 2); try a different s");
  std::vector<int> ordered = frequency_order(cs, initial);
  const std::vector<double> p = cumulative_proportion(ordered, cs);
  if (p.back() >= 0.75)
    return filter_min_high(std::move(ordered), cs, clamp_lo, clamp_hi, notes);
  return filter_min_low(ordered, cs, clamp_lo, clamp_hi, notes);
}

namespace {

int first_appearance(const std::vector<int>& group, const std::vector<int>& order_idx) {
  int first = std::numeric_limits<int>::max();
  for (int pos : group) first = std::min(first, order_idx[pos]);
  return first;
}

}  // namespace

GroupingState trim_groups(GroupingState state, const CenterSet& cs,
                          std::optional<int> k, Notes* notes) {
  auto& groups = state.groups;
  std::vector<int> order_idx(cs.centers.size(), std::numeric_limits<int>::max());
  for (size_t a = 0; a < state.order.size(); ++a)
    order_idx[state.order[a]] = static_cast<int>(a) + 1;

  if (k) {
    while (static_cast<int>(groups.size()) > *k) {
      size_t worst = 0;
      int worst_first = -1;
      for (size_t g = 0; g < groups.size(); ++g) {
        const int first = first_appearance(groups[g], order_idx);
        if (first > worst_first) {
          worst_first = first;
          worst = g;
        }
      }
      note(notes, "trim: dropped a whole group to honor K");
      groups.erase(groups.begin() + worst);
      state.stable.erase(state.stable.begin() + worst);
    }
    while (static_cast<int>(groups.size()) < *k) {
      // Promote the non-stable center that is deep and far from the current
      // stable set, then re-attach everything.
      std::vector<char> is_stable(cs.centers.size(), 0);
      for (int pos : state.stable) is_stable[pos] = 1;
      int best = -1;
      double best_score = -kInf;
      for (const auto& g : groups)
        for (int pos : g) {
          if (is_stable[pos]) continue;
          double mx = 0.0;
          for (int spos : state.stable) mx = std::max(mx, cs.M(pos, spos));
          const double score = cs.centers[pos].local_depth * (1.0 - mx);
          if (score > best_score) {
            best_score = score;
            best = pos;
          }
        }
      if (best < 0)
        throw Error(Errc::UnsatisfiableK,
                    "cannot split groups up to K=" + std::to_string(*k) +
                        ": no promotable center");
      state.stable.push_back(best);
      note(notes, "trim: promoted a new stable center to reach K");
      // Re-attach all non-stable centers to their most similar stable center.
      std::vector<int> members;
      for (const auto& g : groups)
        for (int pos : g) members.push_back(pos);
      groups.assign(state.stable.size(), {});
      for (size_t g = 0; g < state.stable.size(); ++g) groups[g].push_back(state.stable[g]);
      for (int pos : members) {
        if (std::count(state.stable.begin(), state.stable.end(), pos)) continue;
        size_t bestg = 0;
        double bestv = -1.0;
        for (size_t g = 0; g < state.stable.size(); ++g) {
          const double v = cs.M(pos, state.stable[g]);
          if (v > bestv) {
            bestv = v;
            bestg = g;
          }
        }
        groups[bestg].push_back(pos);
      }
    }
  }

  // Iterate the two Definition-2 checks to a fixed point.
  while (true) {
    std::vector<size_t> bad_groups;
    for (size_t g = 0; g < groups.size(); ++g)
      for (int pos : groups[g])
        if (MinChecks::violates_min1(pos, static_cast<int>(g), groups, cs.M)) {
          bad_groups.push_back(g);
          break;
        }
    if (!bad_groups.empty()) {
      for (size_t g : bad_groups) {
        if (groups[g].size() <= 1)
          throw Error(Errc::UnsatisfiableK,
                      "group trimming emptied a group; requested K is unsatisfiable");
        // Drop the member whose removal leaves the best remaining group.
        int drop = -1;
        double best_val = -kInf;
        for (int cand : groups[g]) {
          std::vector<int> rest;
          for (int pos : groups[g])
            if (pos != cand) rest.push_back(pos);
          double sum = 0.0;
          for (int pos : rest) {
            const double w = MinChecks::mw(pos, rest, cs.M);
            const double b = MinChecks::mb(pos, static_cast<int>(g), groups, cs.M);
            sum += w - (b == -kInf ? 0.0 : b);
          }
          const double val = sum / rest.size();
          if (val > best_val ||
              (val == best_val && drop >= 0 &&
               cs.centers[cand].index < cs.centers[drop].index)) {
            best_val = val;
            drop = cand;
          }
        }
        groups[g].erase(std::find(groups[g].begin(), groups[g].end(), drop));
      }
      continue;
    }

    std::vector<std::pair<size_t, int>> min2_bad;
    for (size_t g = 0; g < groups.size(); ++g)
      for (int pos : groups[g])
        if (MinChecks::violates_min2(pos, static_cast<int>(g), groups, cs.M))
          min2_bad.emplace_back(g, pos);
    if (min2_bad.empty()) break;
    for (auto& [g, pos] : min2_bad) {
      if (groups[g].size() <= 1)
        throw Error(Errc::UnsatisfiableK,
                    "group trimming emptied a group; requested K is unsatisfiable");
      groups[g].erase(std::find(groups[g].begin(), groups[g].end(), pos));
    }
  }

  // Refresh representatives (deepest member, ties by observation index).
  state.stable.resize(groups.size());
  for (size_t g = 0; g < groups.size(); ++g) {
    int best = groups[g][0];
    for (int pos : groups[g])
      if (cs.centers[pos].local_depth > cs.centers[best].local_depth ||
          (cs.centers[pos].local_depth == cs.centers[best].local_depth &&
           cs.centers[pos].index < cs.centers[best].index))
        best = pos;
    state.stable[g] = best;
  }
  return state;
}

double score_min(int obs, int k, const std::vector<std::vector<int>>& group_center_obs,
                 const Eigen::MatrixXd& S_sym) {
  double own = 0.0, other = 0.0;
  for (size_t g = 0; g < group_center_obs.size(); ++g)
    for (int c : group_center_obs[g]) {
      const double v = S_sym(c, obs);
      if (static_cast<int>(g) == k)
        own = std::max(own, v);
      else
        other = std::max(other, v);
    }
  const double denom = std::max(own, other);
  if (denom == 0.0) return 0.0;  // unrelated to every center; stays unlabeled
  return (own - other) / denom;
}

ScorePools init_score_pools(const std::vector<std::vector<int>>& group_center_obs,
                            const std::vector<std::vector<int>>& unique_nbrs,
                            const Eigen::MatrixXd& S_sym, int n) {
  const size_t k_count = group_center_obs.size();
  ScorePools pools;
  pools.accepted.resize(k_count);
  pools.deferred.resize(k_count);
  std::vector<char> assigned(n, 0);
  for (size_t g = 0; g < k_count; ++g)
    for (int obs : unique_nbrs[g]) {
      pools.accepted[g].emplace_back(obs, score_min(obs, static_cast<int>(g),
                                                    group_center_obs, S_sym));
      assigned[obs] = 1;
    }
  for (int obs = 0; obs < n; ++obs) {
    if (assigned[obs]) continue;
    for (size_t g = 0; g < k_count; ++g) {
      const double sc = score_min(obs, static_cast<int>(g), group_center_obs, S_sym);
      if (sc > 0.0) pools.deferred[g].emplace_back(obs, sc);
    }
  }
  return pools;
}

ScorePools update_temporary_clusters(ScorePools pools, int s) {
  const size_t k_count = pools.accepted.size();
  for (size_t k = 0; k < k_count; ++k) {
    auto& acc = pools.accepted[k];
    auto& def = pools.deferred[k];

    // gamma_1: deferred mean; undefined on an empty pool, skipping demotion.
    if (!def.empty()) {
      double mean = 0.0;
      for (auto& [obs, sc] : def) mean += sc;
      mean /= def.size();
      std::vector<std::pair<int, double>> keep;
      for (auto& entry : acc) {
        if (entry.second < mean)
          def.push_back(entry);
        else
          keep.push_back(entry);
      }
      acc = std::move(keep);
    }

    // gamma_2: the largest upper-half score gap, floored by the deferred
    // quantile that would top the cluster up to s/2 members.
    std::vector<double> ss;
    ss.reserve(acc.size());
    for (auto& [obs, sc] : acc) ss.push_back(sc);
    std::sort(ss.begin(), ss.end(), std::greater<>());
    const int b = static_cast<int>(ss.size());
    double gamma2 = kInf;
    if (b >= 2) {
      int idx = std::max(b / 2, 1);
      double best_gap = -kInf;
      int best_j = idx;
      for (int j = idx; j <= b - 1; ++j) {  // 1-based positions
        const double gap = ss[j - 1] - ss[j];
        if (gap > best_gap) {
          best_gap = gap;
          best_j = j;
        }
      }
      gamma2 = ss[best_j - 1];
    }
    if (!def.empty() && s / 2.0 - b > 0.0) {
      std::vector<double> dsc;
      dsc.reserve(def.size());
      for (auto& [obs, sc] : def) dsc.push_back(sc);
      std::sort(dsc.begin(), dsc.end());
      const double q = 1.0 - (s / 2.0 - b) / static_cast<double>(def.size());
      gamma2 = std::min(gamma2, quantile_sorted(dsc, q));
    }

    if (gamma2 < kInf) {
      std::vector<std::pair<int, double>> keep;
      for (auto& entry : def) {
        if (entry.second > gamma2)
          acc.push_back(entry);
        else
          keep.push_back(entry);
      }
      def = std::move(keep);
    }
  }
  return pools;
}

}  // namespace dlcc
