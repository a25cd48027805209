#pragma once

#include "core/cka.hpp"
#include "core/hr.hpp"
#include "core/synth.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace driftlens {

// Whole-pipeline configuration, loaded from a JSON document. Domain entries
// omit most knobs in practice; per-domain seeds default to values derived
// from the global seed and the domain's position.
struct RunConfig {
  std::uint64_t seed = 42;
  int fold_count = 5;
  cka::Estimator estimator = cka::Estimator::unbiased;
  Eigen::Index batch_size = 64;
  double ridge_lambda = 0.01;
  hr::StftParams stft;
  std::vector<int> arch = {32, 32, 32, 32, 32, 32};
  int context_frames = 9;
  // Correlation rows include the ds_y == ds_x point by default.
  bool include_self_pairs = true;
  // Model selection excludes candidates trained on the target domain by
  // default (a self-trained model wins trivially with a zero metric).
  bool include_self_candidates = false;
  // Choose per fold from that fold's DS-diff values; false selects once per
  // domain from the fold-mean table.
  bool selection_per_fold = true;
  std::vector<synth::DomainSpec> domains;

  void validate() const;
  const synth::DomainSpec& domain(const std::string& domain_id) const;
  std::vector<std::string> domain_ids() const;

  // Replaces the global seed and re-derives every domain seed that was not
  // given explicitly in the document.
  void set_global_seed(std::uint64_t new_seed);
  // Parallel to `domains`: true where the document pinned the seed.
  std::vector<bool> domain_seed_explicit;

  // Fold plan and per-(domain, fold) model seeds are pure functions of the
  // config, so every command recomputes them identically.
  std::uint64_t fold_seed(const std::string& domain_id) const;
  std::uint64_t model_seed(const std::string& domain_id, int fold) const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

}  // namespace driftlens
