#include "core/toy_model.hpp"

#include "core/errors.hpp"
#include "core/rng.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace driftlens::synth {

namespace {

Matrix random_weights(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix w(rows, cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      w(r, c) = rng.gaussian() * scale;
    }
  }
  return w;
}

// Stacks each frame with its preceding context_frames-1 frames (clip start
// padded by repeating the first frame), giving frames x (dim*context).
Matrix stack_context(const Matrix& features, int context_frames) {
  const Eigen::Index frames = features.rows();
  const Eigen::Index dim = features.cols();
  Matrix stacked(frames, dim * context_frames);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int k = 0; k < context_frames; ++k) {
      const Eigen::Index src = std::max<Eigen::Index>(0, t - k);
      stacked.block(t, k * dim, 1, dim) = features.row(src);
    }
  }
  return stacked;
}

std::vector<std::string> sorted_subjects(const SyntheticDataset& dataset,
                                         const std::vector<std::string>& subjects) {
  std::vector<std::string> ids = subjects;
  std::sort(ids.begin(), ids.end());
  for (const auto& id : ids) dataset.subject(id);  // raises lookup error
  return ids;
}

// Hidden activations for one subject: layer l output is frames x width_l.
std::vector<Matrix> forward_layers(const ToyModel& model, const Matrix& features) {
  std::vector<Matrix> outputs;
  outputs.reserve(model.layer_count());
  Matrix current = stack_context(features, model.context_frames);
  for (const auto& w : model.weights) {
    current = (current * w.transpose()).array().tanh().matrix();
    outputs.push_back(current);
  }
  return outputs;
}

}  // namespace

ToyModel build_toy_model(const std::vector<int>& layer_widths, int feature_dim,
                         std::uint64_t seed, const std::string& model_id,
                         int context_frames) {
  if (layer_widths.size() < 2) {
    raise(ErrorCode::config, "toy model: needs at least 2 layers");
  }
  for (const int width : layer_widths) {
    if (width < 1) raise(ErrorCode::config, "toy model: layer width must be >= 1");
  }
  if (feature_dim < 1) raise(ErrorCode::config, "toy model: feature_dim must be >= 1");
  if (context_frames < 1) raise(ErrorCode::config, "toy model: context_frames must be >= 1");

  ToyModel model;
  model.model_id = model_id;
  model.layer_widths = layer_widths;
  model.feature_dim = feature_dim;
  model.context_frames = context_frames;
  model.seed = seed;
  int fan_in = feature_dim * context_frames;
  for (std::size_t l = 0; l < layer_widths.size(); ++l) {
    model.weights.push_back(random_weights(
        layer_widths[l], fan_in, mix_seed(seed, static_cast<std::uint64_t>(l) + 1)));
    fan_in = layer_widths[l];
  }
  return model;
}

ToyModel fit_readout(ToyModel model, const SyntheticDataset& dataset,
                     const std::vector<std::string>& train_subjects,
                     double ridge_lambda) {
  if (train_subjects.empty()) {
    raise(ErrorCode::invalid_argument, "fit_readout: empty training subject list");
  }
  if (!(ridge_lambda > 0.0)) {
    raise(ErrorCode::invalid_argument, "fit_readout: ridge_lambda must be > 0");
  }
  const std::vector<std::string> ids = sorted_subjects(dataset, train_subjects);

  // Ridge over [activations, 1]; the trailing coordinate is a bias soaking
  // up the activation mean induced by illumination offsets.
  const int width = model.layer_widths.back() + 1;
  Matrix normal = Matrix::Zero(width, width);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(width);
  for (const auto& id : ids) {
    const auto& record = dataset.subject(id);
    const Matrix last = forward_layers(model, record.features).back();
    Matrix design(last.rows(), width);
    design << last, Eigen::VectorXd::Ones(last.rows());
    const Eigen::Map<const Eigen::VectorXd> target(record.bvp.data(),
                                                   static_cast<Eigen::Index>(record.bvp.size()));
    normal.noalias() += design.transpose() * design;
    rhs.noalias() += design.transpose() * target;
  }
  normal.diagonal().array() += ridge_lambda;
  model.readout = Eigen::LDLT<Matrix>(normal).solve(rhs);
  model.train_domain_id = dataset.domain_id;
  return model;
}

ForwardResult forward_collect(const ToyModel& model,
                              const SyntheticDataset& dataset,
                              const std::vector<std::string>& subjects) {
  const std::vector<std::string> ids = sorted_subjects(dataset, subjects);
  if (ids.empty()) {
    raise(ErrorCode::invalid_argument, "forward_collect: empty subject list");
  }

  Eigen::Index total_frames = 0;
  for (const auto& id : ids) total_frames += dataset.subject(id).features.rows();

  ForwardResult result;
  result.activations.model_id = model.model_id;
  result.activations.dataset_id = dataset.domain_id;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    LayerActivations layer;
    layer.name = "layer" + std::to_string(l + 1);
    layer.data.resize(total_frames, model.layer_widths[l]);
    result.activations.layers.push_back(std::move(layer));
  }

  Eigen::Index row = 0;
  for (const auto& id : ids) {
    const auto& record = dataset.subject(id);
    const std::vector<Matrix> layers = forward_layers(model, record.features);
    const Eigen::Index frames = record.features.rows();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      result.activations.layers[l].data.middleRows(row, frames) = layers[l];
    }
    if (model.trained()) {
      const Eigen::Index width = layers.back().cols();
      const Eigen::VectorXd prediction =
          layers.back() * model.readout.head(width) +
          Eigen::VectorXd::Constant(frames, model.readout(width));
      result.predicted_bvp[id] =
          std::vector<double>(prediction.data(), prediction.data() + prediction.size());
    }
    row += frames;
  }
  return result;
}

}  // namespace driftlens::synth
