#pragma once

#include "core/activations.hpp"

#include <string>
#include <vector>

namespace driftlens::cka {

enum class Estimator { biased, unbiased };

const char* estimator_name(Estimator e);
Estimator parse_estimator(const std::string& name);

struct CkaOptions {
  Estimator estimator = Estimator::unbiased;
  // Samples are split into consecutive batches of this size; a trailing
  // batch shorter than the estimator's minimum sample count is dropped.
  // batch_size >= n gives a single full batch.
  Eigen::Index batch_size = 64;
};

struct CkaValue {
  double value = 0.0;
  // Set when a constant (or near-constant) layer makes the normalization
  // meaningless; the value is forced to 0 so downstream means stay finite.
  bool degenerate = false;
};

// Layer-pair CKA map: cell (i, j) compares layer i of the x set against
// layer j of the y set.
struct CkaMap {
  std::string x_model_id, y_model_id;
  std::string x_dataset_id, y_dataset_id;
  std::vector<std::string> x_layer_names, y_layer_names;
  Matrix values;
  std::vector<std::uint8_t> degenerate;  // row-major L_x * L_y
  Estimator estimator = Estimator::unbiased;
  Eigen::Index batch_size = 0;

  bool cell_degenerate(Eigen::Index i, Eigen::Index j) const {
    return degenerate[static_cast<std::size_t>(i * values.cols() + j)] != 0;
  }
};

// G = X Xt (linear kernel). Requires n >= 1 and finite entries.
Matrix gram_linear(const Eigen::Ref<const Matrix>& x);

// Double centering H G H with H = I - 11t/n. Requires n >= 2.
Matrix center_gram(const Eigen::Ref<const Matrix>& g);

// <center(Gx), center(Gy)> / (n-1)^2. Nonnegative up to rounding for PSD
// inputs. Requires matching n >= 2.
double hsic_biased(const Eigen::Ref<const Matrix>& gx,
                   const Eigen::Ref<const Matrix>& gy);

// Unbiased estimator over Gram matrices with zeroed diagonals:
//   [tr(KL) + sum(K) sum(L)/((n-1)(n-2)) - 2/(n-2) rK . rL] / (n(n-3)),
// where rK, rL are row sums. May be negative. Requires n >= 4.
double hsic_unbiased(const Eigen::Ref<const Matrix>& kx,
                     const Eigen::Ref<const Matrix>& ky);

// Full-sample scalar CKA between two feature matrices with equal n.
CkaValue cka_pair(const Eigen::Ref<const Matrix>& x,
                  const Eigen::Ref<const Matrix>& y, Estimator estimator);

// Layer-pair map. Per batch, every HSIC term is accumulated, the three
// accumulators are averaged over batches, and only then normalized:
//   cell = mean_b HSIC(Kb, Lb) / sqrt(mean_b HSIC(Kb, Kb) mean_b HSIC(Lb, Lb)).
// Requires equal sample counts between the two sets.
CkaMap cka_map(const ActivationSet& acts_x, const ActivationSet& acts_y,
               const CkaOptions& options = {});

// CSV with layer names as header row and first column.
void write_csv(const CkaMap& map, std::ostream& out);

}  // namespace driftlens::cka
