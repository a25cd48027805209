#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace driftlens::hr {

inline constexpr double kBandLowBpm = 40.0;
inline constexpr double kBandHighBpm = 180.0;
// Spectrum length is this multiple of the window length (zero padding).
inline constexpr int kZeroPadFactor = 4;
// Window peaks weaker than this are flagged low-confidence.
inline constexpr double kLowConfidenceMagnitude = 1e-9;

struct BvpSeries {
  std::string subject_id;
  double fps = 30.0;
  std::vector<double> samples;
};

struct HrSeries {
  std::vector<double> time_s;   // window centers
  std::vector<double> hr_bpm;   // always within [40, 180]
  std::vector<std::uint8_t> low_confidence;
};

struct StftParams {
  double window_s = 10.0;
  double hop_s = 1.0;
};

// Per window: periodic Hann weighting, mean removal, zero padding to
// kZeroPadFactor times the window length, magnitude spectrum, then
// HR = 60 * argmax frequency restricted to [40/60, 180/60] Hz.
// Frequency resolution is 60 * fps / (kZeroPadFactor * window_samples) BPM.
HrSeries stft_hr(const BvpSeries& bvp, const StftParams& params = {});

// Ground-truth companion to stft_hr: averages a per-frame HR series over the
// same windows so predicted and true series share timestamps.
HrSeries window_mean_hr(const std::vector<double>& hr_per_frame, double fps,
                        const StftParams& params = {});

// Mean absolute error in BPM; requires identical timestamp grids.
double mae(const HrSeries& predicted, const HrSeries& truth);

// time_s,value CSV for heart-rate and waveform series.
void write_csv(const HrSeries& series, std::ostream& out);
void write_csv(const BvpSeries& series, std::ostream& out);

struct MeanCi {
  double mean = 0.0;
  double ci95_halfwidth = 0.0;
};

struct ClipSummary {
  std::string clip_id;
  double duration_s = 0.0;
  double avg_hr_bpm = 0.0;
  double hr_stddev_bpm = 0.0;
};

// Per-dataset roll-up: clip time, average HR and HR standard deviation, each
// with a 95% confidence interval across clips. With a single clip the means
// are still reported and ci_defined is false.
struct SummaryStats {
  std::size_t clip_count = 0;
  bool ci_defined = false;
  MeanCi time_s;
  MeanCi avg_hr_bpm;
  MeanCi hr_stddev_bpm;
};

SummaryStats summary_stats(const std::vector<ClipSummary>& clips);

// "69.200 ± 6.026" (three decimals).
std::string format_mean_ci(double mean, double ci_halfwidth);

}  // namespace driftlens::hr
