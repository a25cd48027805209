#pragma once

#include "core/activations.hpp"
#include "core/synth.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace driftlens::synth {

// Layered stand-in for a small video network: every hidden layer is a fixed
// seeded random linear map followed by tanh. The first layer reads a short
// causal window of frames, so activations and readout quality are sensitive
// to the temporal structure (heart rate range) of a domain, not only to its
// instantaneous feature distribution. Only the readout is trained.
struct ToyModel {
  std::string model_id;
  std::vector<int> layer_widths;
  int feature_dim = 0;
  int context_frames = 9;
  std::uint64_t seed = 0;
  std::vector<Matrix> weights;      // weights[l]: width_l x fan_in_l
  Eigen::VectorXd readout;          // empty until fit_readout succeeds
  std::string train_domain_id;      // empty until trained

  bool trained() const { return readout.size() > 0; }
  std::size_t layer_count() const { return layer_widths.size(); }
};

// Deterministic given seed. Requires >= 2 layers and all widths >= 1.
ToyModel build_toy_model(const std::vector<int>& layer_widths, int feature_dim,
                         std::uint64_t seed, const std::string& model_id,
                         int context_frames = 9);

// Ridge regression from last-layer activations to ground-truth BVP over the
// given training subjects, solved in closed form. ridge_lambda must be > 0.
ToyModel fit_readout(ToyModel model, const SyntheticDataset& dataset,
                     const std::vector<std::string>& train_subjects,
                     double ridge_lambda);

struct ForwardResult {
  // Predicted BVP per subject; empty when the model has no readout yet.
  std::map<std::string, std::vector<double>> predicted_bvp;
  ActivationSet activations;  // one layer entry per hidden layer
};

// Runs the model over the listed subjects. Samples are frames aggregated in
// (subject_id, frame) order; activations keep sample count equal to the
// total frame count (the temporal window is padded at clip start).
ForwardResult forward_collect(const ToyModel& model,
                              const SyntheticDataset& dataset,
                              const std::vector<std::string>& subjects);

}  // namespace driftlens::synth
