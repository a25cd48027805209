#include "core/cka.hpp"

#include "core/errors.hpp"

#include <cmath>
#include <ostream>

namespace driftlens::cka {

namespace {

constexpr double kDegenerateEps = 1e-12;

Eigen::Index estimator_min_samples(Estimator e) {
  return e == Estimator::unbiased ? 4 : 2;
}

double hsic(Estimator e, const Matrix& a, const Matrix& b) {
  return e == Estimator::unbiased ? hsic_unbiased(a, b) : hsic_biased(a, b);
}

CkaValue normalize(double xy, double xx, double yy) {
  if (xx < kDegenerateEps || yy < kDegenerateEps) {
    return {0.0, true};
  }
  return {xy / std::sqrt(xx * yy), false};
}

}  // namespace

const char* estimator_name(Estimator e) {
  return e == Estimator::unbiased ? "unbiased" : "biased";
}

Estimator parse_estimator(const std::string& name) {
  if (name == "unbiased") return Estimator::unbiased;
  if (name == "biased") return Estimator::biased;
  raise(ErrorCode::config, "unknown estimator '" + name + "' (expected biased|unbiased)");
}

Matrix gram_linear(const Eigen::Ref<const Matrix>& x) {
  if (x.rows() < 1 || x.cols() < 1) {
    raise(ErrorCode::size_mismatch, "gram_linear: matrix must be at least 1x1");
  }
  if (!x.allFinite()) {
    raise(ErrorCode::validation, "gram_linear: input contains NaN or Inf");
  }
  Matrix g = x * x.transpose();
  // Force exact symmetry; rounding in the product can leave ~1e-16 skew.
  g = ((g + g.transpose()) * 0.5).eval();
  return g;
}

Matrix center_gram(const Eigen::Ref<const Matrix>& g) {
  const Eigen::Index n = g.rows();
  if (n != g.cols()) {
    raise(ErrorCode::size_mismatch, "center_gram: matrix must be square");
  }
  if (n < 2) {
    raise(ErrorCode::size_mismatch, "center_gram: needs n >= 2 samples");
  }
  const Eigen::VectorXd row_means = g.rowwise().mean();
  const Eigen::VectorXd col_means = g.colwise().mean();
  const double total_mean = g.mean();
  Matrix centered = g;
  centered.colwise() -= row_means;
  centered.rowwise() -= col_means.transpose();
  centered.array() += total_mean;
  return centered;
}

double hsic_biased(const Eigen::Ref<const Matrix>& gx,
                   const Eigen::Ref<const Matrix>& gy) {
  if (gx.rows() != gy.rows() || gx.cols() != gy.cols() || gx.rows() != gx.cols()) {
    raise(ErrorCode::size_mismatch, "hsic_biased: Gram matrices must be square with equal n");
  }
  const Eigen::Index n = gx.rows();
  if (n < 2) {
    raise(ErrorCode::size_mismatch, "hsic_biased: needs n >= 2 samples");
  }
  const Matrix cx = center_gram(gx);
  const Matrix cy = center_gram(gy);
  const double denom = static_cast<double>(n - 1) * static_cast<double>(n - 1);
  return cx.cwiseProduct(cy).sum() / denom;
}

double hsic_unbiased(const Eigen::Ref<const Matrix>& kx,
                     const Eigen::Ref<const Matrix>& ky) {
  if (kx.rows() != ky.rows() || kx.cols() != ky.cols() || kx.rows() != kx.cols()) {
    raise(ErrorCode::size_mismatch, "hsic_unbiased: Gram matrices must be square with equal n");
  }
  const Eigen::Index n = kx.rows();
  if (n < 4) {
    raise(ErrorCode::math_domain, "hsic_unbiased: estimator undefined for n < 4");
  }
  Matrix kt = kx;
  Matrix lt = ky;
  kt.diagonal().setZero();
  lt.diagonal().setZero();

  const double nd = static_cast<double>(n);
  const double trace_kl = kt.cwiseProduct(lt).sum();
  const double sum_k = kt.sum();
  const double sum_l = lt.sum();
  const Eigen::VectorXd row_k = kt.rowwise().sum();
  const Eigen::VectorXd row_l = lt.rowwise().sum();
  const double cross = row_k.dot(row_l);

  return (trace_kl + sum_k * sum_l / ((nd - 1.0) * (nd - 2.0)) -
          2.0 * cross / (nd - 2.0)) /
         (nd * (nd - 3.0));
}

CkaValue cka_pair(const Eigen::Ref<const Matrix>& x,
                  const Eigen::Ref<const Matrix>& y, Estimator estimator) {
  if (x.rows() != y.rows()) {
    raise(ErrorCode::size_mismatch,
          "cka_pair: sample counts differ (" + std::to_string(x.rows()) + " vs " +
              std::to_string(y.rows()) + ")");
  }
  const Matrix gx = gram_linear(x);
  const Matrix gy = gram_linear(y);
  const double xy = hsic(estimator, gx, gy);
  const double xx = hsic(estimator, gx, gx);
  const double yy = hsic(estimator, gy, gy);
  return normalize(xy, xx, yy);
}

CkaMap cka_map(const ActivationSet& acts_x, const ActivationSet& acts_y,
               const CkaOptions& options) {
  acts_x.validate();
  acts_y.validate();
  const Eigen::Index n = acts_x.sample_count();
  if (n != acts_y.sample_count()) {
    raise(ErrorCode::size_mismatch,
          "cka_map: sample pairing requires equal counts, got " + std::to_string(n) +
              " vs " + std::to_string(acts_y.sample_count()));
  }
  const Eigen::Index min_batch = estimator_min_samples(options.estimator);
  if (options.batch_size < min_batch) {
    raise(ErrorCode::invalid_argument,
          "cka_map: batch_size must be >= " + std::to_string(min_batch) +
              " for the " + std::string(estimator_name(options.estimator)) +
              " estimator");
  }

  std::vector<std::pair<Eigen::Index, Eigen::Index>> batches;
  for (Eigen::Index start = 0; start < n; start += options.batch_size) {
    const Eigen::Index size = std::min(options.batch_size, n - start);
    if (size < min_batch) break;  // drop trailing short batch
    batches.emplace_back(start, size);
  }
  if (batches.empty()) {
    raise(ErrorCode::validation,
          "cka_map: insufficient samples (" + std::to_string(n) +
              ") — every batch was dropped");
  }

  const Eigen::Index lx = static_cast<Eigen::Index>(acts_x.layers.size());
  const Eigen::Index ly = static_cast<Eigen::Index>(acts_y.layers.size());
  Matrix acc_xy = Matrix::Zero(lx, ly);
  Eigen::VectorXd acc_xx = Eigen::VectorXd::Zero(lx);
  Eigen::VectorXd acc_yy = Eigen::VectorXd::Zero(ly);

  std::vector<Matrix> grams_x(static_cast<std::size_t>(lx));
  std::vector<Matrix> grams_y(static_cast<std::size_t>(ly));
  for (const auto& [start, size] : batches) {
    for (Eigen::Index i = 0; i < lx; ++i) {
      grams_x[static_cast<std::size_t>(i)] =
          gram_linear(acts_x.layers[static_cast<std::size_t>(i)].data.middleRows(start, size));
    }
    for (Eigen::Index j = 0; j < ly; ++j) {
      grams_y[static_cast<std::size_t>(j)] =
          gram_linear(acts_y.layers[static_cast<std::size_t>(j)].data.middleRows(start, size));
    }
    for (Eigen::Index i = 0; i < lx; ++i) {
      const Matrix& gi = grams_x[static_cast<std::size_t>(i)];
      acc_xx(i) += hsic(options.estimator, gi, gi);
      for (Eigen::Index j = 0; j < ly; ++j) {
        acc_xy(i, j) += hsic(options.estimator, gi, grams_y[static_cast<std::size_t>(j)]);
      }
    }
    for (Eigen::Index j = 0; j < ly; ++j) {
      const Matrix& gj = grams_y[static_cast<std::size_t>(j)];
      acc_yy(j) += hsic(options.estimator, gj, gj);
    }
  }

  const double batch_count = static_cast<double>(batches.size());
  acc_xy /= batch_count;
  acc_xx /= batch_count;
  acc_yy /= batch_count;

  CkaMap map;
  map.x_model_id = acts_x.model_id;
  map.y_model_id = acts_y.model_id;
  map.x_dataset_id = acts_x.dataset_id;
  map.y_dataset_id = acts_y.dataset_id;
  for (const auto& layer : acts_x.layers) map.x_layer_names.push_back(layer.name);
  for (const auto& layer : acts_y.layers) map.y_layer_names.push_back(layer.name);
  map.values.resize(lx, ly);
  map.degenerate.assign(static_cast<std::size_t>(lx * ly), 0);
  map.estimator = options.estimator;
  map.batch_size = options.batch_size;
  for (Eigen::Index i = 0; i < lx; ++i) {
    for (Eigen::Index j = 0; j < ly; ++j) {
      const CkaValue cell = normalize(acc_xy(i, j), acc_xx(i), acc_yy(j));
      map.values(i, j) = cell.value;
      map.degenerate[static_cast<std::size_t>(i * ly + j)] = cell.degenerate ? 1 : 0;
    }
  }
  return map;
}

void write_csv(const CkaMap& map, std::ostream& out) {
  out << "layer";
  for (const auto& name : map.y_layer_names) out << ',' << name;
  out << '\n';
  for (Eigen::Index i = 0; i < map.values.rows(); ++i) {
    out << map.x_layer_names[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < map.values.cols(); ++j) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.9g", map.values(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace driftlens::cka
