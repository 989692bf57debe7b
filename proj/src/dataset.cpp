#include "dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace dlcc {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  for (auto& f : fields) {
    const size_t a = f.find_first_not_of(" \t");
    const size_t b = f.find_last_not_of(" \t");
    f = a == std::string::npos ? "" : f.substr(a, b - a + 1);
  }
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

Dataset load_csv(const std::string& path, const std::optional<std::string>& label_column) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::Io, "cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  size_t lineno = 0;
  std::vector<size_t> linenos;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    rows.push_back(split_csv_line(line));
    linenos.push_back(lineno);
  }
  if (rows.empty()) throw Error(Errc::Parse, path + ": no rows");

  const size_t cols = rows[0].size();
  for (size_t r = 0; r < rows.size(); ++r)
    if (rows[r].size() != cols)
      throw Error(Errc::Parse, path + ": ragged row at line " + std::to_string(linenos[r]));

  // Header detection: any non-numeric field in the first row.
  bool header = false;
  for (const auto& field : rows[0]) {
    double v;
    if (!parse_double(field, v)) {
      header = true;
      break;
    }
  }

  Dataset ds;
  int label_idx = -1;
  if (label_column) {
    if (header) {
      for (size_t c = 0; c < cols; ++c)
        if (rows[0][c] == *label_column) label_idx = static_cast<int>(c);
    }
    if (label_idx < 0) {
      int idx;
      const auto& s = *label_column;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), idx);
      if (ec == std::errc() && ptr == s.data() + s.size() && idx >= 0 &&
          idx < static_cast<int>(cols))
        label_idx = idx;
    }
    if (label_idx < 0)
      throw Error(Errc::InvalidArgument, path + ": label column '" + *label_column +
                                             "' not found");
  }

  if (header)
    for (size_t c = 0; c < cols; ++c)
      if (static_cast<int>(c) != label_idx) ds.columns.push_back(rows[0][c]);

  const size_t first = header ? 1 : 0;
  const size_t n = rows.size() - first;
  if (n < 2) throw Error(Errc::Parse, path + ": need at least 2 data rows");
  const size_t d = cols - (label_idx >= 0 ? 1 : 0);
  if (d < 1) throw Error(Errc::Parse, path + ": no feature columns");

  Eigen::MatrixXd values(n, d);
  std::map<std::string, int> label_ids;
  for (size_t r = first; r < rows.size(); ++r) {
    size_t out_c = 0;
    for (size_t c = 0; c < cols; ++c) {
      if (static_cast<int>(c) == label_idx) {
        const std::string& token = rows[r][c];
        auto [it, inserted] = label_ids.emplace(token, static_cast<int>(label_ids.size()) + 1);
        if (inserted) ds.label_names.push_back(token);
        ds.labels.push_back(it->second);
        continue;
      }
      double v;
      if (!parse_double(rows[r][c], v))
        throw Error(Errc::Parse, path + ": non-numeric value '" + rows[r][c] +
                                     "' at line " + std::to_string(linenos[r]) +
                                     ", column " + std::to_string(c + 1));
      values(r - first, out_c++) = v;
    }
  }
  ds.X = DataMatrix::validated(std::move(values));
  return ds;
}

void save_csv(const Dataset& ds, const std::string& path, bool include_labels) {
  std::ofstream f(path);
  if (!f) throw Error(Errc::Io, "cannot write " + path);
  f.precision(17);
  const Eigen::Index d = ds.X.dim();
  for (Eigen::Index c = 0; c < d; ++c) {
    if (c) f << ',';
    if (static_cast<size_t>(c) < ds.columns.size())
      f << ds.columns[c];
    else
      f << 'x' << (c + 1);
  }
  if (include_labels && ds.has_labels()) f << ",label";
  f << '\n';
  for (Eigen::Index r = 0; r < ds.X.n(); ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      if (c) f << ',';
      f << ds.X.values(r, c);
    }
    if (include_labels && ds.has_labels()) f << ',' << ds.labels[r];
    f << '\n';
  }
}

void save_labels_csv(const std::vector<int>& labels, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(Errc::Io, "cannot write " + path);
  f << "index,label\n";
  for (size_t i = 0; i < labels.size(); ++i) f << i << ',' << labels[i] << '\n';
}

std::vector<int> load_labels_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::Io, "cannot open " + path);
  std::vector<int> labels;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (first) {
      first = false;
      double v;
      if (!parse_double(fields[0], v)) continue;  // header
    }
    if (fields.size() < 2) throw Error(Errc::Parse, path + ": expected index,label rows");
    labels.push_back(std::stoi(fields[1]));
  }
  if (labels.empty()) throw Error(Errc::Parse, path + ": no label rows");
  return labels;
}

namespace {

Dataset make_dataset(Eigen::MatrixXd values, std::vector<int> labels) {
  Dataset ds;
  ds.X = DataMatrix::validated(std::move(values));
  ds.labels = std::move(labels);
  int maxl = 0;
  for (int l : ds.labels) maxl = std::max(maxl, l);
  for (int l = 1; l <= maxl; ++l) ds.label_names.push_back(std::to_string(l));
  return ds;
}

Dataset gen_blobs(size_t n, double noise, Rng& rng) {
  const double cx[3] = {0.0, 10.0, 5.0};
  const double cy[3] = {0.0, 0.0, 8.0};
  Eigen::MatrixXd values(n, 2);
  std::vector<int> labels(n);
  for (size_t i = 0; i < n; ++i) {
    const int k = static_cast<int>(i % 3);
    values(i, 0) = cx[k] + noise * rng.gaussian();
    values(i, 1) = cy[k] + noise * rng.gaussian();
    labels[i] = k + 1;
  }
  return make_dataset(std::move(values), std::move(labels));
}

Dataset gen_moons(size_t n, double noise, Rng& rng) {
  const double pi = 3.14159265358979323846;
  Eigen::MatrixXd values(n, 2);
  std::vector<int> labels(n);
  const size_t n1 = n / 2;
  // Mid-weighted arc sampling: dense bodies with tapered tips.
  auto warp = [&](double u) { return u + 0.7 * std::sin(2.0 * pi * u) / (2.0 * pi); };
  for (size_t i = 0; i < n; ++i) {
    if (i < n1) {
      const double u = static_cast<double>(i) / std::max<size_t>(1, n1 - 1);
      const double t = pi * warp(u);
      values(i, 0) = std::cos(t);
      values(i, 1) = std::sin(t);
      labels[i] = 1;
    } else {
      const size_t j = i - n1;
      const double u = static_cast<double>(j) / std::max<size_t>(1, n - n1 - 1);
      const double t = pi * warp(u);
      values(i, 0) = 1.0 - std::cos(t);
      values(i, 1) = 0.05 - std::sin(t);
      labels[i] = 2;
    }
    values(i, 0) += noise * rng.gaussian();
    values(i, 1) += noise * rng.gaussian();
  }
  return make_dataset(std::move(values), std::move(labels));
}

Dataset gen_spirals(size_t n, double noise, Rng& rng) {
  const double pi = 3.14159265358979323846;
  const size_t n_core = n / 5;
  const size_t n_spiral = n - n_core;
  Eigen::MatrixXd values(n, 2);
  std::vector<int> labels(n);
  for (size_t i = 0; i < n_core; ++i) {
    values(i, 0) = 0.45 * rng.gaussian();
    values(i, 1) = 0.45 * rng.gaussian();
    labels[i] = 1;
  }
  // Two interleaved arms starting well outside the core; together they form
  // one ring-shaped cluster wrapping it.
  for (size_t i = 0; i < n_spiral; ++i) {
    const int arm = static_cast<int>(i % 2);
    const double u = static_cast<double>(i / 2) /
                     std::max<size_t>(1, (n_spiral + 1) / 2 - 1);
    const double r = 2.6 + 3.2 * u;
    const double a = 3.0 * pi * u + arm * pi;
    const size_t row = n_core + i;
    values(row, 0) = r * std::cos(a) + noise * rng.gaussian();
    values(row, 1) = r * std::sin(a) + noise * rng.gaussian();
    labels[row] = 2;
  }
  return make_dataset(std::move(values), std::move(labels));
}

Dataset gen_mixed_sizes(size_t n, double noise, Rng& rng) {
  const size_t n1 = (7 * n) / 10;
  const size_t n2 = n / 5;
  const size_t n3 = n - n1 - n2;
  Eigen::MatrixXd values(n, 2);
  std::vector<int> labels(n);
  size_t row = 0;
  for (size_t i = 0; i < n1; ++i, ++row) {
    values(row, 0) = 0.8 * noise * rng.gaussian();
    values(row, 1) = 0.8 * noise * rng.gaussian();
    labels[row] = 1;
  }
  for (size_t i = 0; i < n2; ++i, ++row) {
    values(row, 0) = 6.0 + 0.35 * noise * rng.gaussian();
    values(row, 1) = 0.75 + 0.35 * noise * rng.gaussian();
    labels[row] = 2;
  }
  for (size_t i = 0; i < n3; ++i, ++row) {
    values(row, 0) = 6.0 + 0.35 * noise * rng.gaussian();
    values(row, 1) = -0.75 + 0.35 * noise * rng.gaussian();
    labels[row] = 3;
  }
  return make_dataset(std::move(values), std::move(labels));
}

}  // namespace

Dataset generate(const std::string& kind, size_t n, double noise, uint64_t seed) {
  if (n < 10) throw Error(Errc::InvalidArgument, "generator needs n >= 10");
  Rng rng(splitmix64(seed ^ 0xD1CCULL));
  if (kind == "blobs") return gen_blobs(n, noise, rng);
  if (kind == "moons") return gen_moons(n, noise, rng);
  if (kind == "spirals") return gen_spirals(n, noise, rng);
  if (kind == "mixed" || kind == "mixed_sizes") return gen_mixed_sizes(n, noise, rng);
  throw Error(Errc::InvalidArgument, "unknown generator kind: " + kind);
}

DataMatrix standardize(const DataMatrix& X) {
  Eigen::MatrixXd out = X.values;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const double mean = out.col(c).mean();
    out.col(c).array() -= mean;
    const double sd = std::sqrt(out.col(c).squaredNorm() /
                                std::max<Eigen::Index>(1, out.rows() - 1));
    if (sd > 0) out.col(c) /= sd;
  }
  return DataMatrix{std::move(out)};
}

}  // namespace dlcc
