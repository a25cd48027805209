#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace driftlens {

using Matrix = Eigen::MatrixXd;

// Per-layer activations: n samples (rows) by p features (columns).
struct LayerActivations {
  std::string name;
  Matrix data;
};

// Activations produced by one model over one dataset, one entry per layer.
// Layer order is meaningful: it defines axis order in CKA maps.
struct ActivationSet {
  std::string model_id;
  std::string dataset_id;
  std::vector<LayerActivations> layers;

  Eigen::Index sample_count() const {
    return layers.empty() ? 0 : layers.front().data.rows();
  }

  // Throws Error(validation) unless: the layer list is non-empty, layer names
  // are unique, every layer has the same sample count n >= 1, feature counts
  // are >= 1 and all entries are finite.
  void validate() const;
};

// Binary ".actv" dump, format version 1. Fixed little-endian layout:
//   magic "ACTV" | u32 version | (u16 len, bytes) model_id |
//   (u16 len, bytes) dataset_id | u32 layer_count |
//   per layer: (u16 len, bytes) name | u32 rows | u32 cols |
//              rows*cols float32, row-major.
// Values are stored at float32 precision; in-memory math is double.
inline constexpr char kActivationMagic[4] = {'A', 'C', 'T', 'V'};
inline constexpr std::uint32_t kActivationFormatVersion = 1;

// Returns the number of bytes written. Validates the set first.
std::uint64_t write_activation_dump(const ActivationSet& set, std::ostream& sink);
std::uint64_t write_activation_dump(const ActivationSet& set, const std::string& path);

// Validates magic, version, structure and value finiteness. Truncation is
// reported as ErrorCode::corrupt naming the 0-based layer index reached.
ActivationSet read_activation_dump(std::istream& source);
ActivationSet read_activation_dump(const std::string& path);

}  // namespace driftlens
