#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <set>

#include "dataset.hpp"
#include "grouping_min.hpp"

using namespace dlcc;

namespace {

// Crafted center sets: neighborhoods and the overlap matrix are supplied
// directly so every Algorithm-2 quantity can be traced by hand.
struct Fixture {
  std::vector<Neighborhood> nbh;
  CenterSet cs;
  Fixture(int n, int s) {
    nbh.resize(n);
    for (int i = 0; i < n; ++i) nbh[i].anchor = i;
    cs.neighborhoods = &nbh;
    cs.s = s;
    cs.n = n;
  }
  void add_center(int obs, int f, double ld, int self_rank, std::vector<int> members) {
    nbh[obs].members = std::move(members);
    cs.centers.push_back({obs, f, ld, self_rank});
  }
  void finish() {
    const int t = static_cast<int>(cs.centers.size());
    cs.M = Eigen::MatrixXd::Identity(t, t);
  }
  void set_m(int a, int b, double v) {
    cs.M(a, b) = v;
    cs.M(b, a) = v;
  }
};

std::vector<int> survivors_obs(const std::vector<int>& positions, const CenterSet& cs) {
  std::vector<int> obs;
  for (int pos : positions) obs.push_back(cs.centers[pos].index);
  std::sort(obs.begin(), obs.end());
  return obs;
}

// Literal transcription of the two Definition-2 inequalities, independent of
// MinChecks (the implementation uses a different code path).
bool def2_satisfied(int pos, int gi, const std::vector<std::vector<int>>& groups,
                    const Eigen::MatrixXd& m) {
  double mw = 1.0;  // sim to itself
  for (int o : groups[gi]) mw = std::min(mw, m(pos, o));
  double mb = -1.0;
  bool has_other = false;
  for (size_t g = 0; g < groups.size(); ++g) {
    if (static_cast<int>(g) == gi) continue;
    has_other = true;
    double mn = 1.0;
    for (int o : groups[g]) mn = std::min(mn, m(pos, o));
    mb = std::max(mb, mn);
  }
  if (has_other && !(mw > mb)) return false;
  double own = -1.0;
  for (int o : groups[gi])
    if (o != pos) own = std::max(own, m(pos, o));
  if (own < 0.0) return true;  // singleton group
  double cross = -1.0;
  for (size_t g = 0; g < groups.size(); ++g) {
    if (static_cast<int>(g) == gi) continue;
    for (int o : groups[g]) cross = std::max(cross, m(pos, o));
  }
  if (cross < 0.0) return true;
  return own > cross;
}

}  // namespace

TEST_CASE("algorithm 1: a single center forms one stable group") {
  Fixture fx(20, 10);
  std::vector<int> members = {0};
  for (int i = 1; i < 10; ++i) members.push_back(i);
  fx.add_center(0, 5, 0.9, 1, members);
  fx.finish();
  GroupingState st = group_by_local_depth({0}, fx.cs, 0.4, 0.75, nullptr);
  CHECK(st.groups.size() == 1);
  CHECK(st.stable == std::vector<int>{0});
}

TEST_CASE("algorithm 1: zero overlap yields two singleton groups") {
  Fixture fx(20, 10);
  fx.add_center(0, 5, 0.9, 1, {0, 1, 2, 3, 4});
  fx.add_center(10, 4, 0.8, 1, {10, 11, 12, 13, 14});
  fx.finish();  // M12 = 0
  GroupingState st = group_by_local_depth({0, 1}, fx.cs, 0.4, 0.75, nullptr);
  CHECK(st.groups.size() == 2);
}

TEST_CASE("algorithm 1: three seeded blobs produce one stable center per blob") {
  Dataset ds = generate("blobs", 150, 1.1, 31);
  SimilarityMatrix s = build_sd_similarity(ds.X);
  auto nbh = build_neighborhoods(s, 25);
  CenterDetection det = detect_centers(nbh, ds.X, DepthKind::SD);
  CenterSet cs;
  cs.centers = det.centers;
  cs.M = center_similarity(det.centers, nbh, 25);
  cs.neighborhoods = &nbh;
  cs.s = 25;
  cs.n = 150;
  std::vector<int> initial;
  for (int pos = 0; pos < static_cast<int>(cs.centers.size()); ++pos)
    if (cs.centers[pos].frequency >= 2 && cs.centers[pos].self_rank <= 2)
      initial.push_back(pos);
  GroupingState st =
      group_by_local_depth(frequency_order(cs, initial), cs, 0.4, 0.75, nullptr);
  REQUIRE(st.groups.size() == 3);
  std::set<int> blob_of_stable;
  for (int pos : st.stable) blob_of_stable.insert(ds.labels[cs.centers[pos].index]);
  CHECK(blob_of_stable.size() == 3);  // each stable center in a distinct blob
}

TEST_CASE("cumulative proportion: single center and idempotent unions") {
  Fixture fx(40, 10);
  fx.add_center(0, 5, 0.9, 1, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  fx.add_center(1, 4, 0.8, 1, {1, 0, 2, 3, 4, 5, 6, 7, 8, 9});  // same coverage
  fx.finish();
  auto p = cumulative_proportion({0, 1}, fx.cs);
  CHECK(p[0] == doctest::Approx(0.25));  // s/n
  CHECK(p[1] == doctest::Approx(0.25));  // union idempotent
}

TEST_CASE("cumulative proportion matches a brute-force set union") {
  Dataset ds = generate("blobs", 80, 1.0, 17);
  SimilarityMatrix s = build_sd_similarity(ds.X);
  auto nbh = build_neighborhoods(s, 10);
  CenterDetection det = detect_centers(nbh, ds.X, DepthKind::SD);
  CenterSet cs;
  cs.centers = det.centers;
  cs.M = center_similarity(det.centers, nbh, 10);
  cs.neighborhoods = &nbh;
  cs.s = 10;
  cs.n = 80;
  std::vector<int> all(cs.centers.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<int> ordered = frequency_order(cs, all);
  auto p = cumulative_proportion(ordered, cs);
  std::set<int> covered;
  for (size_t t = 0; t < ordered.size(); ++t) {
    for (int m : nbh[cs.centers[ordered[t]].index].members) covered.insert(m);
    CHECK(p[t] == doctest::Approx(covered.size() / 80.0));
  }
}

TEST_CASE("filter_min errors out when every center has frequency 1") {
  Fixture fx(20, 10);
  fx.add_center(0, 1, 0.9, 1, {0, 1, 2});
  fx.add_center(5, 1, 0.8, 1, {5, 6, 7});
  fx.finish();
  CHECK_THROWS_AS(filter_min(fx.cs, 0.4, 0.75, nullptr), Error);
}

// Hand-traced fixture A (high-coverage branch, no bad-point jump).
// Five centers c0..c4 over n = 40, s = 10, frequencies 8,7,6,5,4.
// Overlaps: M(0,3) = M(1,4) = 0.9, everything else 0.
// Algorithm 1: c0,c1,c2 stable (empty valid-neighbor sets), c3 -> c0
// (LD 0.9 > 0.7), c4 -> c1. Coverage P = {.25,.5,.75,.8,.85} so cc1 =
// max(3, 3) = 3; both c3 and c4 qualify as candidates (tied prefix row sums,
// zero cross-similarity); no violations anywhere, so the cutoff is the last
// candidate and all five centers survive.
TEST_CASE("filter_min high branch: hand-traced fixture keeps all five centers") {
  Fixture fx(40, 10);
  fx.add_center(0, 8, 0.90, 1, {0, 10, 11, 12, 13, 14, 15, 16, 17, 18});
  fx.add_center(1, 7, 0.85, 1, {1, 19, 20, 21, 22, 23, 24, 25, 26, 27});
  fx.add_center(2, 6, 0.80, 1, {2, 28, 29, 30, 31, 32, 33, 34, 35, 36});
  fx.add_center(3, 5, 0.70, 1, {3, 10, 11, 12, 13, 0, 14, 15, 16, 17});
  fx.add_center(4, 4, 0.60, 1, {4, 19, 20, 21, 22, 1, 23, 24, 25, 26});
  fx.finish();
  fx.set_m(0, 3, 0.9);
  fx.set_m(1, 4, 0.9);
  auto out = filter_min(fx.cs, 0.4, 0.75, nullptr);
  CHECK(survivors_obs(out, fx.cs) == std::vector<int>{0, 1, 2, 3, 4});
}

// Hand-traced fixture A' (high branch, bad-point jump): same base with
// M(1,3) = 0.6, M(1,4) = 0.5, M(3,4) = 0.55. c3 fails the cross-similarity
// candidate condition (0.6 > 0), so candidates are {3, 5}. At cutoff 5 both
// c1 and c4 violate the own-vs-cross inequality (0.5 vs 0.6, 0.5 vs 0.55),
// so bad points jump 0 -> 2 and the cut stops at candidate 3.
TEST_CASE("filter_min high branch: bad-point jump cuts the list early") {
  Fixture fx(40, 10);
  fx.add_center(0, 8, 0.90, 1, {0, 10, 11, 12, 13, 14, 15, 16, 17, 18});
  fx.add_center(1, 7, 0.85, 1, {1, 19, 20, 21, 22, 23, 24, 25, 26, 27});
  fx.add_center(2, 6, 0.80, 1, {2, 28, 29, 30, 31, 32, 33, 34, 35, 36});
  fx.add_center(3, 5, 0.70, 1, {3, 10, 11, 12, 13, 0, 14, 15, 16, 17});
  fx.add_center(4, 4, 0.60, 1, {4, 19, 20, 21, 22, 1, 23, 24, 25, 26});
  fx.finish();
  fx.set_m(0, 3, 0.9);
  fx.set_m(1, 4, 0.5);
  fx.set_m(1, 3, 0.6);
  fx.set_m(3, 4, 0.55);
  auto out = filter_min(fx.cs, 0.4, 0.75, nullptr);
  CHECK(survivors_obs(out, fx.cs) == std::vector<int>{0, 1, 2});
}

// Hand-traced fixture B (low-coverage branch): two heavily overlapping
// centers cover 11/40 points, so the dissimilarity check drops both
// (singleton groups fail it vacuously; here each sees cross overlap 0.9).
// Greedy re-addition targets 0.9 * P(all) = 0.9 * 21/40; adding c0 (tie with
// c2 broken by index) then c2 reaches 20/40 >= 0.4725.
TEST_CASE("filter_min low branch: greedy re-addition hits the coverage target") {
  Fixture fx(40, 10);
  fx.add_center(0, 5, 0.9, 1, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  fx.add_center(1, 4, 0.8, 1, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  fx.add_center(20, 1, 0.7, 1, {20, 21, 22, 23, 24, 25, 26, 27, 28, 29});
  fx.finish();
  fx.set_m(0, 1, 0.9);
  auto out = filter_min(fx.cs, 0.4, 0.75, nullptr);
  CHECK(survivors_obs(out, fx.cs) == std::vector<int>{0, 20});
  // Final coverage verified by an independent union recomputation.
  std::set<int> covered;
  for (int pos : out)
    for (int m : fx.cs.nbh(pos).members) covered.insert(m);
  CHECK(covered.size() / 40.0 >= 0.9 * (21.0 / 40.0));
}

TEST_CASE("trim_groups: a state satisfying both inequalities is unchanged") {
  Fixture fx(40, 10);
  fx.add_center(0, 5, 0.9, 1, {0, 1, 2, 3, 4});
  fx.add_center(1, 4, 0.8, 1, {1, 0, 2, 3, 4});
  fx.add_center(20, 4, 0.7, 1, {20, 21, 22, 23, 24});
  fx.finish();
  fx.set_m(0, 1, 0.8);
  GroupingState st;
  st.groups = {{0, 1}, {2}};
  st.stable = {0, 2};
  st.order = {0, 1, 2};
  GroupingState out = trim_groups(st, fx.cs, std::nullopt, nullptr);
  CHECK(out.groups == st.groups);
}

TEST_CASE("trim_groups: G = K+1 drops the group appearing latest in frequency order") {
  Fixture fx(60, 10);
  fx.add_center(0, 9, 0.9, 1, {0, 1, 2});
  fx.add_center(10, 8, 0.8, 1, {10, 11, 12});
  fx.add_center(20, 2, 0.7, 1, {20, 21, 22});
  fx.finish();
  GroupingState st;
  st.groups = {{0}, {1}, {2}};
  st.stable = {0, 1, 2};
  st.order = {0, 1, 2};  // frequency order: c0, c10, c20
  GroupingState out = trim_groups(st, fx.cs, 2, nullptr);
  REQUIRE(out.groups.size() == 2);
  std::set<int> kept;
  for (const auto& g : out.groups)
    for (int pos : g) kept.insert(fx.cs.centers[pos].index);
  CHECK(kept == std::set<int>{0, 10});
}

TEST_CASE("trim_groups: violation fixture reaches a Definition-2 fixed point") {
  // Group {c0, c1} with weak internal overlap 0.5 and c1 leaking 0.8 toward
  // the other group: trimming must drop c1 and leave both inequalities
  // satisfied (verified by an independent transcription).
  Fixture fx(40, 10);
  fx.add_center(0, 5, 0.9, 1, {0, 1, 2});
  fx.add_center(1, 4, 0.8, 1, {1, 0, 3});
  fx.add_center(20, 4, 0.7, 1, {20, 21, 22});
  fx.finish();
  fx.set_m(0, 1, 0.5);
  fx.set_m(1, 2, 0.8);
  fx.set_m(0, 2, 0.1);
  GroupingState st;
  st.groups = {{0, 1}, {2}};
  st.stable = {0, 2};
  st.order = {0, 1, 2};
  GroupingState out = trim_groups(st, fx.cs, std::nullopt, nullptr);
  for (size_t g = 0; g < out.groups.size(); ++g)
    for (int pos : out.groups[g]) CHECK(def2_satisfied(pos, g, out.groups, fx.cs.M));
  std::set<int> kept;
  for (const auto& g : out.groups)
    for (int pos : g) kept.insert(fx.cs.centers[pos].index);
  CHECK(kept == std::set<int>{0, 20});
}

TEST_CASE("score_min arithmetic and the zero-denominator convention") {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(5, 5);
  std::vector<std::vector<int>> groups = {{0}, {1}};
  s(0, 2) = s(2, 0) = 0.8;
  s(1, 2) = s(2, 1) = 0.4;
  CHECK(score_min(2, 0, groups, s) == doctest::Approx(0.5));
  CHECK(score_min(2, 1, groups, s) == doctest::Approx(-0.5));
  s(0, 3) = s(3, 0) = 0.6;
  s(1, 3) = s(3, 1) = 0.6;
  CHECK(score_min(3, 0, groups, s) == doctest::Approx(0.0));  // a = b
  CHECK(score_min(4, 0, groups, s) == 0.0);                   // both maxima zero
}

TEST_CASE("update pools: no-op when bounds are inactive") {
  ScorePools pools;
  pools.accepted = {{{1, 0.9}, {2, 0.8}}};
  pools.deferred = {{{3, 0.1}}};
  ScorePools out = update_temporary_clusters(pools, 4);  // s/2 = 2 = B: skip quantile
  // gamma_1 = 0.1 demotes nothing; gaps pick idx 1 -> gamma_2 = 0.9; 0.1 stays.
  CHECK(out.accepted[0].size() == 2);
  CHECK(out.deferred[0].size() == 1);
}

// Hand trace: accepted scores {0.9, 0.5, 0.45, 0.4}, deferred {0.6, 0.2},
// s = 12. gamma_1 = 0.4 demotes nothing (strict <). SS gaps over positions
// 2..3 tie at 0.05, argmax keeps the first -> SS[2] = 0.5. B = 4 < s/2 = 6:
// quantile level 1 - 2/2 = 0 -> min deferred = 0.2; gamma_2 = 0.2. Promotion
// is strict, so 0.6 moves up and 0.2 stays deferred.
TEST_CASE("update pools: hand-traced promotion via the deferred quantile") {
  ScorePools pools;
  pools.accepted = {{{1, 0.9}, {2, 0.5}, {3, 0.45}, {4, 0.4}}};
  pools.deferred = {{{5, 0.6}, {6, 0.2}}};
  ScorePools out = update_temporary_clusters(pools, 12);
  std::set<int> acc;
  for (auto& [obs, sc] : out.accepted[0]) acc.insert(obs);
  CHECK(acc == std::set<int>{1, 2, 3, 4, 5});
  REQUIRE(out.deferred[0].size() == 1);
  CHECK(out.deferred[0][0].first == 6);
}

// Same accepted pool with B >= s/2 skips the quantile: gamma_2 = SS[idx] =
// 0.5, so only 0.6 is promoted; and gamma_1 = mean{0.6, 0.2} = 0.4 demotes
// nothing because the comparison is strict.
TEST_CASE("update pools: B >= s/2 uses the gap bound alone") {
  ScorePools pools;
  pools.accepted = {{{1, 0.9}, {2, 0.5}, {3, 0.45}, {4, 0.4}}};
  pools.deferred = {{{5, 0.6}, {6, 0.2}}};
  ScorePools out = update_temporary_clusters(pools, 6);
  std::set<int> acc;
  for (auto& [obs, sc] : out.accepted[0]) acc.insert(obs);
  CHECK(acc == std::set<int>{1, 2, 3, 4, 5});
  CHECK(out.deferred[0].size() == 1);
}

TEST_CASE("update pools: empty deferred pool skips demotion") {
  ScorePools pools;
  pools.accepted = {{{1, 0.9}, {2, -0.5}}};
  pools.deferred = {{}};
  ScorePools out = update_temporary_clusters(pools, 8);
  CHECK(out.accepted[0].size() == 2);  // gamma_1 undefined: nothing demoted
}

TEST_CASE("update pools: demotion below the deferred mean") {
  ScorePools pools;
  pools.accepted = {{{1, 0.9}, {2, 0.05}}};
  pools.deferred = {{{3, 0.5}, {4, 0.3}}};  // gamma_1 = 0.4
  ScorePools out = update_temporary_clusters(pools, 4);
  std::set<int> acc;
  for (auto& [obs, sc] : out.accepted[0]) acc.insert(obs);
  CHECK(acc.count(1) == 1);
  CHECK(acc.count(2) == 0);  // 0.05 < 0.4 demoted
}

TEST_CASE("pools on a seeded 10-cluster 20-d fixture keep accepted sets disjoint") {
  Rng rng(77);
  const int k = 10, per = 20, d = 20, n = k * per;
  Eigen::MatrixXd x(n, d);
  for (int c = 0; c < k; ++c)
    for (int i = 0; i < per; ++i)
      for (int j = 0; j < d; ++j)
        x(c * per + i, j) = (j == c % d ? 12.0 * (c + 1) : 0.0) + rng.gaussian();
  SimilarityMatrix sim = build_sd_similarity(DataMatrix{x});
  const int s = 12;
  auto nbh = build_neighborhoods(sim, s);
  CenterDetection det = detect_centers(nbh, DataMatrix{x}, DepthKind::SD);
  CenterSet cs;
  cs.centers = det.centers;
  cs.M = center_similarity(det.centers, nbh, s);
  cs.neighborhoods = &nbh;
  cs.s = s;
  cs.n = n;
  auto survivors = filter_min(cs, 0.4, 0.75, nullptr);
  GroupingState st = group_by_local_depth(survivors, cs, 0.4, 0.75, nullptr);
  std::vector<std::vector<int>> group_obs;
  for (const auto& g : st.groups) {
    std::vector<int> obs;
    for (int pos : g) obs.push_back(cs.centers[pos].index);
    group_obs.push_back(obs);
  }
  auto u = unique_neighbors(st.groups, cs);
  Eigen::MatrixXd s_sym = symmetrize(sim).values;
  ScorePools pools = init_score_pools(group_obs, u, s_sym, n);
  pools = update_temporary_clusters(pools, s);
  std::set<int> seen;
  for (const auto& pool : pools.accepted)
    for (auto& [obs, sc] : pool) {
      CHECK(seen.count(obs) == 0);
      seen.insert(obs);
    }
}
