#include "core/metrics.hpp"

#include "core/csv.hpp"
#include "core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace driftlens::metrics {

namespace {

double diagonal_mean(const cka::CkaMap& map, const char* what) {
  if (map.values.rows() != map.values.cols()) {
    raise(ErrorCode::size_mismatch,
          std::string(what) + ": map is " + std::to_string(map.values.rows()) + "x" +
              std::to_string(map.values.cols()) + ", layer counts must match");
  }
  return map.values.diagonal().mean();
}

}  // namespace

const char* metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::ds_diff: return "ds_diff";
    case MetricKind::ds_sim: return "ds_sim";
    case MetricKind::model_sim: return "model_sim";
    case MetricKind::mae: return "mae";
  }
  return "unknown";
}

MetricKind parse_metric(const std::string& name) {
  if (name == "ds_diff" || name == "ds-diff") return MetricKind::ds_diff;
  if (name == "ds_sim" || name == "ds-sim") return MetricKind::ds_sim;
  if (name == "model_sim" || name == "model-sim") return MetricKind::model_sim;
  if (name == "mae") return MetricKind::mae;
  raise(ErrorCode::config, "unknown metric '" + name + "'");
}

double ds_diff(const cka::CkaMap& self_map_x, const cka::CkaMap& self_map_y) {
  if (self_map_x.values.rows() != self_map_y.values.rows() ||
      self_map_x.values.cols() != self_map_y.values.cols()) {
    raise(ErrorCode::size_mismatch,
          "ds_diff: the two self-similarity maps have different dimensions");
  }
  return (self_map_x.values - self_map_y.values).cwiseAbs().mean();
}

double ds_sim(const cka::CkaMap& cross_map) {
  return diagonal_mean(cross_map, "ds_sim");
}

double model_sim(const cka::CkaMap& pair_map) {
  return diagonal_mean(pair_map, "model_sim");
}

MetricTable::MetricTable(MetricKind kind, std::vector<std::string> domains,
                         int fold_count)
    : kind_(kind), domains_(std::move(domains)), fold_count_(fold_count) {
  if (domains_.empty() || fold_count_ < 1) {
    raise(ErrorCode::invalid_argument, "metric table: needs >= 1 domain and >= 1 fold");
  }
  values_.assign(domains_.size() * domains_.size() * static_cast<std::size_t>(fold_count_),
                 std::numeric_limits<double>::quiet_NaN());
}

std::size_t MetricTable::domain_index(const std::string& domain_id) const {
  for (std::size_t i = 0; i < domains_.size(); ++i) {
    if (domains_[i] == domain_id) return i;
  }
  raise(ErrorCode::lookup, "metric table: unknown domain '" + domain_id + "'");
}

std::size_t MetricTable::index(std::size_t train, std::size_t test, int fold) const {
  if (train >= domains_.size() || test >= domains_.size() || fold < 0 ||
      fold >= fold_count_) {
    raise(ErrorCode::invalid_argument, "metric table: cell index out of range");
  }
  return (train * domains_.size() + test) * static_cast<std::size_t>(fold_count_) +
         static_cast<std::size_t>(fold);
}

double& MetricTable::at(std::size_t train, std::size_t test, int fold) {
  return values_[index(train, test, fold)];
}

double MetricTable::at(std::size_t train, std::size_t test, int fold) const {
  return values_[index(train, test, fold)];
}

bool MetricTable::complete() const {
  for (const double v : values_) {
    if (std::isnan(v)) return false;
  }
  return true;
}

std::vector<std::string> MetricTable::missing_cells() const {
  std::vector<std::string> missing;
  for (std::size_t x = 0; x < domains_.size(); ++x) {
    for (std::size_t y = 0; y < domains_.size(); ++y) {
      for (int f = 0; f < fold_count_; ++f) {
        if (std::isnan(at(x, y, f))) {
          missing.push_back("(" + domains_[x] + "->" + domains_[y] + ", fold " +
                            std::to_string(f) + ")");
        }
      }
    }
  }
  return missing;
}

Matrix MetricTable::fold_mean() const {
  if (!complete()) {
    const auto missing = missing_cells();
    raise(ErrorCode::coverage, "metric table '" + std::string(metric_name(kind_)) +
                                   "': " + std::to_string(missing.size()) +
                                   " cells unset, first: " + missing.front());
  }
  Matrix means(domains_.size(), domains_.size());
  for (std::size_t x = 0; x < domains_.size(); ++x) {
    for (std::size_t y = 0; y < domains_.size(); ++y) {
      double acc = 0.0;
      for (int f = 0; f < fold_count_; ++f) acc += at(x, y, f);
      means(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) =
          acc / fold_count_;
    }
  }
  return means;
}

void MetricTable::write_long_csv(std::ostream& out) const {
  out << "train_domain,test_domain,fold,value\n";
  for (std::size_t x = 0; x < domains_.size(); ++x) {
    for (std::size_t y = 0; y < domains_.size(); ++y) {
      for (int f = 0; f < fold_count_; ++f) {
        out << domains_[x] << ',' << domains_[y] << ',' << f << ','
            << csv::format_value(at(x, y, f)) << '\n';
      }
    }
  }
}

MetricTable MetricTable::read_long_csv(std::istream& in, MetricKind kind) {
  const csv::Table raw = csv::read(in);
  if (raw.header != std::vector<std::string>{"train_domain", "test_domain", "fold", "value"}) {
    raise(ErrorCode::format, "metric table csv: unexpected header");
  }
  std::vector<std::string> domains;
  int max_fold = -1;
  for (const auto& row : raw.rows) {
    if (std::find(domains.begin(), domains.end(), row[0]) == domains.end()) {
      domains.push_back(row[0]);
    }
    max_fold = std::max(max_fold, csv::to_int(row[2]));
  }
  MetricTable table(kind, domains, max_fold + 1);
  for (const auto& row : raw.rows) {
    table.at(table.domain_index(row[0]), table.domain_index(row[1]),
             csv::to_int(row[2])) = csv::to_double(row[3]);
  }
  if (!table.complete()) {
    const auto missing = table.missing_cells();
    raise(ErrorCode::coverage, "metric table csv: incomplete grid, first missing " +
                                   missing.front());
  }
  return table;
}

void MetricTable::write_fold_mean_csv(std::ostream& out) const {
  const Matrix means = fold_mean();
  out << "train_domain";
  for (const auto& d : domains_) out << ',' << d;
  out << '\n';
  for (std::size_t x = 0; x < domains_.size(); ++x) {
    out << domains_[x];
    for (std::size_t y = 0; y < domains_.size(); ++y) {
      out << ',' << csv::format_value(means(static_cast<Eigen::Index>(x),
                                            static_cast<Eigen::Index>(y)));
    }
    out << '\n';
  }
}

}  // namespace driftlens::metrics
