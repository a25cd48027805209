#include "core/synth.hpp"

#include "core/errors.hpp"
#include "core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace driftlens::synth {

namespace {

constexpr double kHrFloor = 40.0;
constexpr double kHrCeil = 180.0;

// HR walk mean-reversion time constant, seconds.
constexpr double kHrReversionTau = 10.0;

// Signal sources mixed into features: bvp, bvp^2, three distractor
// sinusoids, three white-noise channels.
constexpr int kDistractorCount = 3;
constexpr int kNoiseChannels = 3;
constexpr int kSourceDim = 2 + kDistractorCount + kNoiseChannels;
constexpr double kDistractorHz[kDistractorCount] = {0.25, 0.09, 4.3};

// The feature mixing is shared by all domains of a given feature_dim; domain
// seeds drive only subject-level randomness.
constexpr std::uint64_t kMixingSeed = 0x6d69786d61747269ULL;

Matrix mixing_matrix(int feature_dim) {
  Rng rng(mix_seed(kMixingSeed, static_cast<std::uint64_t>(feature_dim)));
  Matrix m(feature_dim, kSourceDim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(kSourceDim));
  for (int r = 0; r < feature_dim; ++r) {
    for (int c = 0; c < kSourceDim; ++c) {
      m(r, c) = rng.gaussian() * scale;
    }
  }
  return m;
}

std::string subject_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "s%03d", index);
  return buf;
}

}  // namespace

void DomainSpec::validate() const {
  if (domain_id.empty()) raise(ErrorCode::config, "domain spec: empty domain_id");
  if (subjects < 5) {
    raise(ErrorCode::config, "domain '" + domain_id + "': needs >= 5 subjects");
  }
  if (clip_seconds <= 0.0 || fps <= 0.0) {
    raise(ErrorCode::config, "domain '" + domain_id + "': clip_seconds and fps must be > 0");
  }
  if (hr_mean < kHrFloor || hr_mean > kHrCeil) {
    raise(ErrorCode::config, "domain '" + domain_id + "': hr_mean outside [40, 180]");
  }
  if (hr_stddev < 0.0) {
    raise(ErrorCode::config, "domain '" + domain_id + "': hr_stddev must be >= 0");
  }
  if (hr_mean - 3.0 * hr_stddev < kHrFloor || hr_mean + 3.0 * hr_stddev > kHrCeil) {
    raise(ErrorCode::config,
          "domain '" + domain_id + "': hr_mean ± 3·hr_stddev leaves [40, 180]");
  }
  if (noise_level < 0.0) {
    raise(ErrorCode::config, "domain '" + domain_id + "': noise_level must be >= 0");
  }
  if (feature_dim < 4) {
    raise(ErrorCode::config, "domain '" + domain_id + "': feature_dim must be >= 4");
  }
}

const SubjectRecord& SyntheticDataset::subject(const std::string& subject_id) const {
  for (const auto& record : subjects) {
    if (record.subject_id == subject_id) return record;
  }
  raise(ErrorCode::lookup,
        "dataset '" + domain_id + "': unknown subject '" + subject_id + "'");
}

std::vector<std::string> SyntheticDataset::subject_ids() const {
  std::vector<std::string> ids;
  ids.reserve(subjects.size());
  for (const auto& record : subjects) ids.push_back(record.subject_id);
  return ids;
}

SyntheticDataset generate_domain(const DomainSpec& spec) {
  spec.validate();
  const auto frames = static_cast<int>(spec.clip_seconds * spec.fps);
  if (frames < 2) {
    raise(ErrorCode::config, "domain '" + spec.domain_id + "': clip too short");
  }

  const Matrix mixing = mixing_matrix(spec.feature_dim);
  // Mean-reverting walk coefficients: stationary stddev equals hr_stddev.
  const double rho = std::exp(-1.0 / (spec.fps * kHrReversionTau));
  const double step_sd = spec.hr_stddev * std::sqrt(1.0 - rho * rho);

  SyntheticDataset dataset;
  dataset.domain_id = spec.domain_id;
  dataset.fps = spec.fps;
  dataset.subjects.resize(static_cast<std::size_t>(spec.subjects));

  for (int s = 0; s < spec.subjects; ++s) {
    Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(s) + 1));
    SubjectRecord record;
    record.subject_id = subject_name(s);
    record.bvp.resize(static_cast<std::size_t>(frames));
    record.hr_bpm.resize(static_cast<std::size_t>(frames));
    record.features.resize(frames, spec.feature_dim);

    double distractor_phase[kDistractorCount];
    for (double& phase : distractor_phase) phase = 2.0 * M_PI * rng.uniform();

    double hr = std::clamp(spec.hr_mean + spec.hr_stddev * rng.gaussian(),
                           kHrFloor, kHrCeil);
    double phase = 2.0 * M_PI * rng.uniform();
    Eigen::VectorXd source(kSourceDim);
    for (int t = 0; t < frames; ++t) {
      record.hr_bpm[static_cast<std::size_t>(t)] = hr;
      const double bvp = std::sin(phase) + 0.5 * std::sin(2.0 * phase);
      record.bvp[static_cast<std::size_t>(t)] = bvp;

      source(0) = bvp;
      source(1) = bvp * bvp;
      for (int d = 0; d < kDistractorCount; ++d) {
        source(2 + d) = std::sin(2.0 * M_PI * kDistractorHz[d] *
                                     static_cast<double>(t) / spec.fps +
                                 distractor_phase[d]);
      }
      for (int w = 0; w < kNoiseChannels; ++w) {
        source(2 + kDistractorCount + w) = spec.noise_level * rng.gaussian();
      }
      record.features.row(t) =
          (mixing * source).transpose().array() + spec.illumination_offset;

      phase += 2.0 * M_PI * (hr / 60.0) / spec.fps;
      hr = std::clamp(spec.hr_mean + rho * (hr - spec.hr_mean) + step_sd * rng.gaussian(),
                      kHrFloor, kHrCeil);
    }
    dataset.subjects[static_cast<std::size_t>(s)] = std::move(record);
  }
  return dataset;
}

FoldPlan make_fold_plan(const std::vector<std::string>& subject_ids,
                        int fold_count, std::uint64_t seed) {
  if (fold_count < 1) {
    raise(ErrorCode::config, "fold plan: fold_count must be >= 1");
  }
  if (static_cast<int>(subject_ids.size()) < fold_count) {
    raise(ErrorCode::config,
          "fold plan: " + std::to_string(subject_ids.size()) +
              " subjects cannot fill " + std::to_string(fold_count) + " folds");
  }
  std::vector<std::string> shuffled = subject_ids;
  std::sort(shuffled.begin(), shuffled.end());
  Rng rng(mix_seed(seed, 0xf01df01dULL));
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(shuffled[i - 1], shuffled[j]);
  }

  FoldPlan plan;
  plan.fold_count = fold_count;
  plan.test_subjects.resize(static_cast<std::size_t>(fold_count));
  plan.train_subjects.resize(static_cast<std::size_t>(fold_count));
  for (std::size_t i = 0; i < shuffled.size(); ++i) {
    plan.test_subjects[i % static_cast<std::size_t>(fold_count)].push_back(shuffled[i]);
  }
  for (int f = 0; f < fold_count; ++f) {
    auto& test = plan.test_subjects[static_cast<std::size_t>(f)];
    std::sort(test.begin(), test.end());
    auto& train = plan.train_subjects[static_cast<std::size_t>(f)];
    for (const auto& id : shuffled) {
      if (std::find(test.begin(), test.end(), id) == test.end()) train.push_back(id);
    }
    std::sort(train.begin(), train.end());
  }
  return plan;
}

hr::SummaryStats summarize(const SyntheticDataset& dataset) {
  std::vector<hr::ClipSummary> clips;
  clips.reserve(dataset.subjects.size());
  for (const auto& record : dataset.subjects) {
    hr::ClipSummary clip;
    clip.clip_id = record.subject_id;
    clip.duration_s = static_cast<double>(record.hr_bpm.size()) / dataset.fps;
    double mean = 0.0;
    for (const double v : record.hr_bpm) mean += v;
    mean /= static_cast<double>(record.hr_bpm.size());
    double ss = 0.0;
    for (const double v : record.hr_bpm) ss += (v - mean) * (v - mean);
    clip.avg_hr_bpm = mean;
    clip.hr_stddev_bpm =
        record.hr_bpm.size() > 1
            ? std::sqrt(ss / static_cast<double>(record.hr_bpm.size() - 1))
            : 0.0;
    clips.push_back(clip);
  }
  return hr::summary_stats(clips);
}

}  // namespace driftlens::synth
