#pragma once

#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dlcc {

enum class Errc {
  InvalidArgument,
  Io,
  Parse,
  DuplicateRows,
  SingularCovariance,
  NoCenters,
  UnsatisfiableK,
  UndersizedCluster,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

/// Raised when spatial-depth similarity meets identical observations; carries
/// the offending row pairs so the caller can dedupe or jitter.
class DuplicateRowsError : public Error {
 public:
  DuplicateRowsError(std::vector<std::pair<int, int>> pairs, const std::string& msg)
      : Error(Errc::DuplicateRows, msg), pairs_(std::move(pairs)) {}
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }

 private:
  std::vector<std::pair<int, int>> pairs_;
};

/// Diagnostic messages accumulated by fallbacks and warnings along a run.
using Notes = std::vector<std::string>;

inline void note(Notes* notes, const std::string& msg) {
  if (notes) notes->push_back(msg);
}

uint64_t splitmix64(uint64_t x);

/// Deterministic RNG: mt19937_64 stream with portable uniform/gaussian
/// helpers (the std distributions are implementation-defined, so we avoid
/// them).
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}
  uint64_t next() { return engine_(); }
  double uniform() {  // [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  double gaussian();
  size_t index(size_t n);  // [0, n)

 private:
  std::mt19937_64 engine_;
  double cached_gauss_ = 0.0;
  bool has_cached_ = false;
};

int thread_budget();  // respects DLCC_THREADS

/// Runs fn(i) for i in [begin, end) on up to thread_budget() threads.
/// Work is split into contiguous chunks; bodies must write disjoint state.
void parallel_for(size_t begin, size_t end, const std::function<void(size_t)>& fn);

struct UnionFind {
  std::vector<int> parent, size;
  explicit UnionFind(int n) : parent(n), size(n, 1) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  // Returns true when two components merged.
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size[a] < size[b]) std::swap(a, b);
    parent[b] = a;
    size[a] += size[b];
    return true;
  }
};

uint64_t hash_labels(const std::vector<int>& labels);

}  // namespace dlcc
