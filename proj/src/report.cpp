#include "report.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace dlcc {

namespace {

using nlohmann::json;

const char* depth_name(DepthKind d) { return d == DepthKind::MD ? "md" : "sd"; }
const char* strategy_name(Strategy s) { return s == Strategy::Min ? "min" : "max"; }

json config_json(const DlccConfig& cfg) {
  json j;
  j["depth"] = depth_name(cfg.depth);
  j["strategy"] = strategy_name(cfg.strategy);
  j["s"] = cfg.s;
  if (cfg.delta) j["delta"] = *cfg.delta;
  if (cfg.k) j["k"] = *cfg.k;
  j["classifier"] = cfg.classifier == Classifier::MDC   ? "mdc"
                    : cfg.classifier == Classifier::KNN ? "knn"
                                                        : "rf";
  j["maxdepth"] = cfg.maxdepth;
  j["ifloop"] = cfg.ifloop;
  j["knn_k"] = cfg.knn_k;
  j["rf"] = {{"trees", cfg.rf.trees},
             {"max_features", cfg.rf.max_features},
             {"seed", cfg.rf.seed}};
  j["iteration_cap"] = cfg.iteration_cap;
  j["seed"] = cfg.seed;
  j["ntilde"] = cfg.ntilde;
  return j;
}

json nan_safe(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace

std::string report_json(const RunReport& report, bool stable_output) {
  json j;
  j["schema"] = "dlcc-report/1";
  j["config"] = config_json(report.config);

  const auto& r = report.result;
  json res;
  res["k"] = r.k;
  res["n"] = r.labels.size();
  res["labels"] = r.labels;
  json diag;
  diag["s"] = r.diag.s;
  if (r.diag.delta) diag["delta"] = *r.diag.delta;
  diag["classifier"] = r.diag.classifier;
  diag["covariance_model"] = r.diag.covariance_model;
  diag["refine_iterations"] = r.diag.refine_iterations;
  diag["converged"] = r.diag.converged;
  diag["dc"] = nan_safe(r.diag.dc);
  diag["notes"] = r.diag.notes;
  res["diagnostics"] = diag;
  j["result"] = res;

  json metrics;
  metrics["dc"] = nan_safe(r.diag.dc);
  if (report.ari_value) metrics["ari"] = *report.ari_value;
  if (report.ce_value) metrics["ce"] = *report.ce_value;
  j["metrics"] = metrics;

  if (!report.leaderboard.empty()) {
    json board = json::array();
    for (const auto& cell : report.leaderboard) {
      json c;
      c["s"] = cell.s;
      if (cell.delta) c["delta"] = *cell.delta;
      c["k"] = cell.k;
      c["dc"] = nan_safe(cell.dc);
      if (cell.ari) c["ari"] = *cell.ari;
      c["status"] = cell.status;
      board.push_back(c);
    }
    j["sweep"] = {{"leaderboard", board}};
  }

  if (!stable_output) {
    json timing;
    for (const auto& [stage, ms] : r.diag.timing_ms) timing[stage] = ms;
    j["timing_ms"] = timing;
  }
  return j.dump(2) + "\n";
}

std::string labels_csv_string(const std::vector<int>& labels) {
  std::ostringstream out;
  out << "index,label\n";
  for (size_t i = 0; i < labels.size(); ++i) out << i << ',' << labels[i] << '\n';
  return out.str();
}

std::string svg_scatter(const DataMatrix& X, const std::vector<int>& labels) {
  static const char* palette[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44",
                                  "#66ccee", "#aa3377", "#bbbbbb", "#000000",
                                  "#e07b39", "#6a3d9a"};
  Eigen::MatrixXd pts;
  std::string caption;
  if (X.dim() == 2) {
    pts = X.values;
    caption = "x1 vs x2";
  } else {
    // First two principal components.
    Eigen::RowVectorXd mean = X.values.colwise().mean();
    Eigen::MatrixXd centered = X.values.rowwise() - mean;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    pts = centered * svd.matrixV().leftCols(2);
    caption = "PC1 vs PC2 projection of " + std::to_string(X.dim()) + "-d data";
  }
  const double min_x = pts.col(0).minCoeff(), max_x = pts.col(0).maxCoeff();
  const double min_y = pts.col(1).minCoeff(), max_y = pts.col(1).maxCoeff();
  const double span_x = std::max(max_x - min_x, 1e-9);
  const double span_y = std::max(max_y - min_y, 1e-9);
  const int w = 640, h = 640, pad = 32;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
      << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg.precision(6);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const double px = pad + (pts(i, 0) - min_x) / span_x * (w - 2 * pad);
    const double py = h - pad - (pts(i, 1) - min_y) / span_y * (h - 2 * pad);
    const int lab = labels.empty() ? 0 : labels[i];
    const char* color = palette[((lab % 10) + 10) % 10];
    svg << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"3\" fill=\"" << color
        << "\" fill-opacity=\"0.75\"/>\n";
  }
  svg << "<text x=\"" << pad << "\" y=\"" << (h - 8)
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << caption << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace dlcc
