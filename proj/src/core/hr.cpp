#include "core/hr.hpp"

#include "core/errors.hpp"
#include "core/stats.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace driftlens::hr {

namespace {

std::vector<std::size_t> window_starts(std::size_t total, std::size_t window,
                                       std::size_t hop) {
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + window <= total; s += hop) starts.push_back(s);
  return starts;
}

}  // namespace

HrSeries stft_hr(const BvpSeries& bvp, const StftParams& params) {
  if (bvp.fps <= 0.0) raise(ErrorCode::invalid_argument, "stft_hr: fps must be > 0");
  if (params.window_s <= 0.0 || params.hop_s <= 0.0) {
    raise(ErrorCode::invalid_argument, "stft_hr: window and hop must be > 0");
  }
  const auto window = static_cast<std::size_t>(std::llround(params.window_s * bvp.fps));
  const auto hop = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(params.hop_s * bvp.fps)));
  if (bvp.samples.size() < window) {
    raise(ErrorCode::size_mismatch,
          "stft_hr: series of " + std::to_string(bvp.samples.size()) +
              " samples is shorter than the required minimum of " +
              std::to_string(window));
  }

  const std::size_t padded = window * static_cast<std::size_t>(kZeroPadFactor);
  // Band limits as inclusive spectrum bin indices: bin k is k*fps/padded Hz.
  const double bins_per_hz = static_cast<double>(padded) / bvp.fps;
  auto k_low = static_cast<std::size_t>(
      std::ceil(kBandLowBpm / 60.0 * bins_per_hz - 1e-9));
  auto k_high = static_cast<std::size_t>(
      std::floor(kBandHighBpm / 60.0 * bins_per_hz + 1e-9));
  k_low = std::max<std::size_t>(k_low, 1);
  k_high = std::min(k_high, padded / 2);
  if (k_high < k_low) {
    raise(ErrorCode::math_domain, "stft_hr: sampling rate too low for the 40-180 BPM band");
  }

  // Periodic Hann window.
  std::vector<double> hann(window);
  for (std::size_t t = 0; t < window; ++t) {
    hann[t] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(t) /
                                   static_cast<double>(window));
  }

  HrSeries out;
  std::vector<double> weighted(window);
  for (const std::size_t start : window_starts(bvp.samples.size(), window, hop)) {
    double mean = 0.0;
    for (std::size_t t = 0; t < window; ++t) mean += bvp.samples[start + t];
    mean /= static_cast<double>(window);
    for (std::size_t t = 0; t < window; ++t) {
      weighted[t] = (bvp.samples[start + t] - mean) * hann[t];
    }

    // Zero padding only adds spectrum grid density, so the magnitude at bin k
    // is evaluated directly over the window samples.
    double best_mag2 = -1.0;
    std::size_t best_k = k_low;
    for (std::size_t k = k_low; k <= k_high; ++k) {
      const double angle = -2.0 * M_PI * static_cast<double>(k) /
                           static_cast<double>(padded);
      const std::complex<double> rotor(std::cos(angle), std::sin(angle));
      std::complex<double> phase(1.0, 0.0);
      std::complex<double> acc(0.0, 0.0);
      for (std::size_t t = 0; t < window; ++t) {
        acc += weighted[t] * phase;
        phase *= rotor;
      }
      const double mag2 = std::norm(acc);
      if (mag2 > best_mag2) {
        best_mag2 = mag2;
        best_k = k;
      }
    }

    out.time_s.push_back((static_cast<double>(start) + static_cast<double>(window) / 2.0) /
                         bvp.fps);
    out.hr_bpm.push_back(60.0 * static_cast<double>(best_k) / bins_per_hz);
    out.low_confidence.push_back(std::sqrt(std::max(best_mag2, 0.0)) <
                                         kLowConfidenceMagnitude
                                     ? 1
                                     : 0);
  }
  return out;
}

HrSeries window_mean_hr(const std::vector<double>& hr_per_frame, double fps,
                        const StftParams& params) {
  if (fps <= 0.0) raise(ErrorCode::invalid_argument, "window_mean_hr: fps must be > 0");
  const auto window = static_cast<std::size_t>(std::llround(params.window_s * fps));
  const auto hop = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(params.hop_s * fps)));
  if (hr_per_frame.size() < window) {
    raise(ErrorCode::size_mismatch,
          "window_mean_hr: series shorter than one window (" +
              std::to_string(window) + " frames)");
  }
  HrSeries out;
  for (const std::size_t start : window_starts(hr_per_frame.size(), window, hop)) {
    const double sum = std::accumulate(hr_per_frame.begin() + static_cast<long>(start),
                                       hr_per_frame.begin() + static_cast<long>(start + window),
                                       0.0);
    out.time_s.push_back((static_cast<double>(start) + static_cast<double>(window) / 2.0) / fps);
    out.hr_bpm.push_back(sum / static_cast<double>(window));
    out.low_confidence.push_back(0);
  }
  return out;
}

double mae(const HrSeries& predicted, const HrSeries& truth) {
  if (predicted.time_s.size() != truth.time_s.size() || predicted.time_s.empty()) {
    raise(ErrorCode::size_mismatch,
          "mae: series have different window counts (" +
              std::to_string(predicted.time_s.size()) + " vs " +
              std::to_string(truth.time_s.size()) + ")");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.time_s.size(); ++i) {
    if (std::abs(predicted.time_s[i] - truth.time_s[i]) > 1e-9) {
      raise(ErrorCode::size_mismatch,
            "mae: timestamps misaligned at window " + std::to_string(i));
    }
    acc += std::abs(predicted.hr_bpm[i] - truth.hr_bpm[i]);
  }
  return acc / static_cast<double>(predicted.time_s.size());
}

namespace {

void write_time_value_rows(std::ostream& out, const std::vector<double>& time_s,
                           const std::vector<double>& values) {
  out << "time_s,value\n";
  char buf[64];
  for (std::size_t i = 0; i < time_s.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", time_s[i], values[i]);
    out << buf;
  }
}

}  // namespace

void write_csv(const HrSeries& series, std::ostream& out) {
  write_time_value_rows(out, series.time_s, series.hr_bpm);
}

void write_csv(const BvpSeries& series, std::ostream& out) {
  std::vector<double> time_s(series.samples.size());
  for (std::size_t t = 0; t < time_s.size(); ++t) {
    time_s[t] = static_cast<double>(t) / series.fps;
  }
  write_time_value_rows(out, time_s, series.samples);
}

SummaryStats summary_stats(const std::vector<ClipSummary>& clips) {
  if (clips.empty()) {
    raise(ErrorCode::invalid_argument, "summary_stats: no clips");
  }
  SummaryStats out;
  out.clip_count = clips.size();
  std::vector<double> times, avgs, stddevs;
  times.reserve(clips.size());
  for (const auto& clip : clips) {
    times.push_back(clip.duration_s);
    avgs.push_back(clip.avg_hr_bpm);
    stddevs.push_back(clip.hr_stddev_bpm);
  }
  auto mean_of = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  if (clips.size() == 1) {
    out.ci_defined = false;
    out.time_s = {mean_of(times), 0.0};
    out.avg_hr_bpm = {mean_of(avgs), 0.0};
    out.hr_stddev_bpm = {mean_of(stddevs), 0.0};
    return out;
  }
  out.ci_defined = true;
  const auto t = stats::ci95(times);
  const auto a = stats::ci95(avgs);
  const auto s = stats::ci95(stddevs);
  out.time_s = {t.mean, t.halfwidth};
  out.avg_hr_bpm = {a.mean, a.halfwidth};
  out.hr_stddev_bpm = {s.mean, s.halfwidth};
  return out;
}

std::string format_mean_ci(double mean, double ci_halfwidth) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f ± %.3f", mean, ci_halfwidth);
  return buf;
}

}  // namespace driftlens::hr
