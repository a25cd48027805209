#include "core/config.hpp"

#include "core/errors.hpp"
#include "core/rng.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <unordered_set>

namespace driftlens {

namespace {

using nlohmann::json;

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    raise(ErrorCode::config, std::string("config key '") + key + "': " + e.what());
  }
}

synth::DomainSpec parse_domain(const json& j, std::uint64_t global_seed,
                               std::size_t index) {
  if (!j.contains("domain_id")) {
    raise(ErrorCode::config, "config: domain entry without domain_id");
  }
  synth::DomainSpec spec;
  spec.domain_id = j.at("domain_id").get<std::string>();
  spec.subjects = get_or(j, "subjects", spec.subjects);
  spec.clip_seconds = get_or(j, "clip_seconds", spec.clip_seconds);
  spec.fps = get_or(j, "fps", spec.fps);
  spec.hr_mean = get_or(j, "hr_mean", spec.hr_mean);
  spec.hr_stddev = get_or(j, "hr_stddev", spec.hr_stddev);
  spec.noise_level = get_or(j, "noise_level", spec.noise_level);
  spec.illumination_offset = get_or(j, "illumination_offset", spec.illumination_offset);
  spec.feature_dim = get_or(j, "feature_dim", spec.feature_dim);
  spec.seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>()
                                 : mix_seed(global_seed, index + 1);
  return spec;
}

}  // namespace

void RunConfig::validate() const {
  if (fold_count < 1) raise(ErrorCode::config, "config: fold_count must be >= 1");
  if (batch_size < 2) raise(ErrorCode::config, "config: batch_size must be >= 2");
  if (estimator == cka::Estimator::unbiased && batch_size < 4) {
    raise(ErrorCode::config, "config: unbiased estimator needs batch_size >= 4");
  }
  if (!(ridge_lambda > 0.0)) raise(ErrorCode::config, "config: ridge_lambda must be > 0");
  if (stft.window_s <= 0.0 || stft.hop_s <= 0.0) {
    raise(ErrorCode::config, "config: stft window_s and hop_s must be > 0");
  }
  if (arch.size() < 2) raise(ErrorCode::config, "config: arch needs >= 2 layers");
  for (const int w : arch) {
    if (w < 1) raise(ErrorCode::config, "config: arch widths must be >= 1");
  }
  if (context_frames < 1) raise(ErrorCode::config, "config: context_frames must be >= 1");
  if (domains.empty()) raise(ErrorCode::config, "config: no domains");
  std::unordered_set<std::string> ids;
  for (const auto& spec : domains) {
    spec.validate();
    if (!ids.insert(spec.domain_id).second) {
      raise(ErrorCode::config, "config: duplicate domain_id '" + spec.domain_id + "'");
    }
    if (spec.feature_dim != domains.front().feature_dim) {
      raise(ErrorCode::config, "config: all domains must share feature_dim");
    }
    const double min_clip_s = stft.window_s;
    if (spec.clip_seconds < min_clip_s) {
      raise(ErrorCode::config, "config: domain '" + spec.domain_id +
                                   "' clip shorter than one STFT window");
    }
  }
}

const synth::DomainSpec& RunConfig::domain(const std::string& domain_id) const {
  for (const auto& spec : domains) {
    if (spec.domain_id == domain_id) return spec;
  }
  raise(ErrorCode::lookup, "config: unknown domain '" + domain_id + "'");
}

std::vector<std::string> RunConfig::domain_ids() const {
  std::vector<std::string> ids;
  ids.reserve(domains.size());
  for (const auto& spec : domains) ids.push_back(spec.domain_id);
  return ids;
}

void RunConfig::set_global_seed(std::uint64_t new_seed) {
  seed = new_seed;
  for (std::size_t i = 0; i < domains.size(); ++i) {
    if (domain_seed_explicit.size() <= i || !domain_seed_explicit[i]) {
      domains[i].seed = mix_seed(seed, i + 1);
    }
  }
}

std::uint64_t RunConfig::fold_seed(const std::string& domain_id) const {
  return mix_seed(mix_seed(seed, hash64(domain_id)), 0x666f6c64ULL);
}

std::uint64_t RunConfig::model_seed(const std::string& domain_id, int fold) const {
  return mix_seed(mix_seed(seed, hash64(domain_id)),
                  0x6d6f64656cULL + static_cast<std::uint64_t>(fold));
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    raise(ErrorCode::config, std::string("config: invalid JSON: ") + e.what());
  }
  RunConfig config;
  config.seed = get_or(j, "seed", config.seed);
  config.fold_count = get_or(j, "fold_count", config.fold_count);
  if (j.contains("estimator")) {
    config.estimator = cka::parse_estimator(j.at("estimator").get<std::string>());
  }
  config.batch_size = get_or<Eigen::Index>(j, "batch_size", config.batch_size);
  config.ridge_lambda = get_or(j, "ridge_lambda", config.ridge_lambda);
  if (j.contains("stft")) {
    const auto& s = j.at("stft");
    config.stft.window_s = get_or(s, "window_s", config.stft.window_s);
    config.stft.hop_s = get_or(s, "hop_s", config.stft.hop_s);
  }
  config.arch = get_or(j, "arch", config.arch);
  config.context_frames = get_or(j, "context_frames", config.context_frames);
  config.include_self_pairs = get_or(j, "include_self_pairs", config.include_self_pairs);
  config.include_self_candidates =
      get_or(j, "include_self_candidates", config.include_self_candidates);
  config.selection_per_fold = get_or(j, "selection_per_fold", config.selection_per_fold);
  if (!j.contains("domains") || !j.at("domains").is_array()) {
    raise(ErrorCode::config, "config: 'domains' array is required");
  }
  std::size_t index = 0;
  for (const auto& entry : j.at("domains")) {
    config.domain_seed_explicit.push_back(entry.contains("seed"));
    config.domains.push_back(parse_domain(entry, config.seed, index++));
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::io, "cannot open config '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace driftlens
