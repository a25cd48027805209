#pragma once

#include "core/cka.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace driftlens::metrics {

enum class MetricKind { ds_diff, ds_sim, model_sim, mae };

const char* metric_name(MetricKind kind);
MetricKind parse_metric(const std::string& name);

// Mean absolute cell difference between two self-similarity maps of the same
// model. Zero when the maps are identical; requires matching dimensions.
double ds_diff(const cka::CkaMap& self_map_x, const cka::CkaMap& self_map_y);

// Mean of the same-layer diagonal of one cross-dataset map (single model,
// two datasets). Requires a square map.
double ds_sim(const cka::CkaMap& cross_map);

// Mean of the same-layer diagonal of a two-model map over one dataset.
// Requires a square map (same architecture).
double model_sim(const cka::CkaMap& pair_map);

// Values on a (train_domain x test_domain x fold) grid.
class MetricTable {
public:
  MetricTable(MetricKind kind, std::vector<std::string> domains, int fold_count);

  MetricKind kind() const { return kind_; }
  const std::vector<std::string>& domains() const { return domains_; }
  int fold_count() const { return fold_count_; }
  std::size_t domain_index(const std::string& domain_id) const;

  double& at(std::size_t train, std::size_t test, int fold);
  double at(std::size_t train, std::size_t test, int fold) const;

  bool complete() const;  // no unset (NaN) cells
  // Lists "(domain, fold)" style labels of unset cells.
  std::vector<std::string> missing_cells() const;

  // Averaged over folds; requires a complete table.
  Matrix fold_mean() const;

  // Long form: train_domain,test_domain,fold,value.
  void write_long_csv(std::ostream& out) const;
  static MetricTable read_long_csv(std::istream& in, MetricKind kind);

  // Fold-mean matrix with domain ids as header row and first column
  // (rows = train domain, columns = test domain).
  void write_fold_mean_csv(std::ostream& out) const;

private:
  std::size_t index(std::size_t train, std::size_t test, int fold) const;

  MetricKind kind_;
  std::vector<std::string> domains_;
  int fold_count_;
  std::vector<double> values_;
};

}  // namespace driftlens::metrics
