#pragma once

#include "core/activations.hpp"
#include "core/hr.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace driftlens::synth {

// Knobs controlling one synthetic rPPG-like domain. Shift severity between
// two domains is driven by how far these knobs differ.
struct DomainSpec {
  std::string domain_id;
  int subjects = 20;                 // >= 5
  double clip_seconds = 30.0;
  double fps = 30.0;
  double hr_mean = 90.0;             // BPM, in [40, 180]
  double hr_stddev = 5.0;            // BPM, >= 0
  double noise_level = 0.0;          // >= 0
  double illumination_offset = 0.0;
  int feature_dim = 12;              // >= 4
  std::uint64_t seed = 0;

  void validate() const;
};

struct SubjectRecord {
  std::string subject_id;
  Matrix features;               // frames x feature_dim
  std::vector<double> bvp;       // ground truth waveform
  std::vector<double> hr_bpm;    // ground truth HR per frame, in [40, 180]
};

struct SyntheticDataset {
  std::string domain_id;
  double fps = 30.0;
  std::vector<SubjectRecord> subjects;  // sorted by subject_id

  const SubjectRecord& subject(const std::string& subject_id) const;
  std::vector<std::string> subject_ids() const;
};

// Deterministic given spec (bitwise). Per subject: a mean-reverting Gaussian
// HR walk (stationary stddev = hr_stddev, clamped to [40, 180]), phase
// integration into BVP = sin(phase) + 0.5 sin(2 phase), and features from a
// fixed random linear mixing of [bvp, bvp^2, distractor sinusoids, white
// noise * noise_level] plus illumination_offset. The mixing matrix depends
// only on feature_dim, so domains with equal feature_dim share feature
// geometry and differ exactly by their shift knobs.
SyntheticDataset generate_domain(const DomainSpec& spec);

// Subject-disjoint k-fold split; deterministic given seed.
struct FoldPlan {
  int fold_count = 0;
  std::vector<std::vector<std::string>> test_subjects;   // one list per fold
  std::vector<std::vector<std::string>> train_subjects;
};

FoldPlan make_fold_plan(const std::vector<std::string>& subject_ids,
                        int fold_count, std::uint64_t seed);

// Table-style roll-up of ground truth: per-clip duration, mean HR and HR
// standard deviation aggregated across subjects.
hr::SummaryStats summarize(const SyntheticDataset& dataset);

}  // namespace driftlens::synth
