#pragma once

#include <optional>
#include <string>
#include <vector>

#include "common.hpp"
#include "data_matrix.hpp"

namespace dlcc {

struct Dataset {
  DataMatrix X;
  std::vector<int> labels;               // 1..L when present, else empty
  std::vector<std::string> label_names;  // label id -> original token
  std::vector<std::string> columns;      // feature column names (may be empty)

  bool has_labels() const { return !labels.empty(); }
};

/// CSV loader: header auto-detected (first row non-numeric); the optional
/// label column is matched by header name, or treated as a 0-based column
/// index when it parses as an integer.
Dataset load_csv(const std::string& path, const std::optional<std::string>& label_column);

void save_csv(const Dataset& ds, const std::string& path, bool include_labels);

/// Writes/reads the run's label output ("index,label" with a header line).
void save_labels_csv(const std::vector<int>& labels, const std::string& path);
std::vector<int> load_labels_csv(const std::string& path);

/// Seeded synthetic generators (all two-dimensional):
///   blobs       - three Gaussian blobs (noise 0 degenerates to point masses)
///   moons       - two interleaved half circles
///   spirals     - a dense core plus two interleaved spiral arms wrapping it
///                 (core = cluster 1, spiral region = cluster 2)
///   mixed_sizes - three Gaussian blobs with strongly different sizes
Dataset generate(const std::string& kind, size_t n, double noise, uint64_t seed);

/// Column-wise z-score standardization.
DataMatrix standardize(const DataMatrix& X);

}  // namespace dlcc
