#include "core/activations.hpp"

#include "core/errors.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace driftlens {

namespace {

void put_bytes(std::ostream& sink, const void* data, std::size_t size,
               std::uint64_t& written) {
  sink.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!sink) {
    raise(ErrorCode::io, "activation dump: write failed after " +
                             std::to_string(written) + " bytes");
  }
  written += size;
}

void put_u16(std::ostream& sink, std::uint16_t v, std::uint64_t& written) {
  const unsigned char bytes[2] = {static_cast<unsigned char>(v & 0xff),
                                  static_cast<unsigned char>(v >> 8)};
  put_bytes(sink, bytes, 2, written);
}

void put_u32(std::ostream& sink, std::uint32_t v, std::uint64_t& written) {
  unsigned char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(sink, bytes, 4, written);
}

void put_string(std::ostream& sink, const std::string& s, std::uint64_t& written) {
  if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
    raise(ErrorCode::invalid_argument,
          "activation dump: identifier longer than 65535 bytes");
  }
  put_u16(sink, static_cast<std::uint16_t>(s.size()), written);
  put_bytes(sink, s.data(), s.size(), written);
}

bool get_bytes(std::istream& source, void* data, std::size_t size) {
  source.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  return static_cast<std::size_t>(source.gcount()) == size;
}

bool get_u16(std::istream& source, std::uint16_t& v) {
  unsigned char bytes[2];
  if (!get_bytes(source, bytes, 2)) return false;
  v = static_cast<std::uint16_t>(bytes[0] | (bytes[1] << 8));
  return true;
}

bool get_u32(std::istream& source, std::uint32_t& v) {
  unsigned char bytes[4];
  if (!get_bytes(source, bytes, 4)) return false;
  v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return true;
}

[[noreturn]] void raise_truncated(std::size_t layer_index) {
  raise(ErrorCode::corrupt, "activation dump: stream truncated in layer " +
                                std::to_string(layer_index));
}

}  // namespace

void ActivationSet::validate() const {
  if (layers.empty()) {
    raise(ErrorCode::validation, "activation set '" + model_id + "/" +
                                     dataset_id + "': layer list is empty");
  }
  std::unordered_set<std::string> names;
  const Eigen::Index n = layers.front().data.rows();
  for (const auto& layer : layers) {
    if (!names.insert(layer.name).second) {
      raise(ErrorCode::validation,
            "activation set: duplicate layer name '" + layer.name + "'");
    }
    if (layer.data.rows() < 1 || layer.data.cols() < 1) {
      raise(ErrorCode::validation,
            "layer '" + layer.name + "': needs n >= 1 samples and p >= 1 features");
    }
    if (layer.data.rows() != n) {
      raise(ErrorCode::validation,
            "layer '" + layer.name + "': sample count " +
                std::to_string(layer.data.rows()) + " != " + std::to_string(n));
    }
    if (!layer.data.allFinite()) {
      raise(ErrorCode::validation,
            "layer '" + layer.name + "': contains NaN or Inf values");
    }
  }
}

std::uint64_t write_activation_dump(const ActivationSet& set, std::ostream& sink) {
  set.validate();
  std::uint64_t written = 0;
  put_bytes(sink, kActivationMagic, 4, written);
  put_u32(sink, kActivationFormatVersion, written);
  put_string(sink, set.model_id, written);
  put_string(sink, set.dataset_id, written);
  put_u32(sink, static_cast<std::uint32_t>(set.layers.size()), written);
  std::vector<unsigned char> row_buffer;
  for (const auto& layer : set.layers) {
    put_string(sink, layer.name, written);
    const auto rows = static_cast<std::uint32_t>(layer.data.rows());
    const auto cols = static_cast<std::uint32_t>(layer.data.cols());
    put_u32(sink, rows, written);
    put_u32(sink, cols, written);
    row_buffer.resize(static_cast<std::size_t>(cols) * 4);
    for (std::uint32_t r = 0; r < rows; ++r) {
      for (std::uint32_t c = 0; c < cols; ++c) {
        const float value = static_cast<float>(layer.data(r, c));
        std::uint32_t bits;
        std::memcpy(&bits, &value, 4);
        for (int i = 0; i < 4; ++i) {
          row_buffer[static_cast<std::size_t>(c) * 4 + i] =
              static_cast<unsigned char>(bits >> (8 * i));
        }
      }
      put_bytes(sink, row_buffer.data(), row_buffer.size(), written);
    }
  }
  sink.flush();
  if (!sink) {
    raise(ErrorCode::io, "activation dump: flush failed after " +
                             std::to_string(written) + " bytes");
  }
  return written;
}

std::uint64_t write_activation_dump(const ActivationSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::io, "cannot open '" + path + "' for writing");
  return write_activation_dump(set, out);
}

ActivationSet read_activation_dump(std::istream& source) {
  char magic[4];
  if (!get_bytes(source, magic, 4)) {
    raise(ErrorCode::format, "activation dump: stream shorter than magic");
  }
  if (std::memcmp(magic, kActivationMagic, 4) != 0) {
    raise(ErrorCode::format, "activation dump: bad magic, not an ACTV stream");
  }
  std::uint32_t version = 0;
  if (!get_u32(source, version)) {
    raise(ErrorCode::corrupt, "activation dump: stream truncated in header");
  }
  if (version != kActivationFormatVersion) {
    raise(ErrorCode::unsupported_version,
          "activation dump: unsupported format version " + std::to_string(version));
  }

  auto read_string = [&source](std::string& out) {
    std::uint16_t len = 0;
    if (!get_u16(source, len)) return false;
    out.resize(len);
    return len == 0 || get_bytes(source, out.data(), len);
  };

  ActivationSet set;
  if (!read_string(set.model_id) || !read_string(set.dataset_id)) {
    raise(ErrorCode::corrupt, "activation dump: stream truncated in header");
  }
  std::uint32_t layer_count = 0;
  if (!get_u32(source, layer_count)) {
    raise(ErrorCode::corrupt, "activation dump: stream truncated in header");
  }
  if (layer_count == 0) {
    raise(ErrorCode::validation, "activation dump: declares zero layers");
  }

  set.layers.reserve(layer_count);
  std::vector<unsigned char> row_buffer;
  for (std::uint32_t li = 0; li < layer_count; ++li) {
    LayerActivations layer;
    if (!read_string(layer.name)) raise_truncated(li);
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    if (!get_u32(source, rows) || !get_u32(source, cols)) raise_truncated(li);
    if (rows == 0 || cols == 0) {
      raise(ErrorCode::validation, "activation dump: layer '" + layer.name +
                                       "' declares an empty matrix");
    }
    layer.data.resize(rows, cols);
    row_buffer.resize(static_cast<std::size_t>(cols) * 4);
    for (std::uint32_t r = 0; r < rows; ++r) {
      if (!get_bytes(source, row_buffer.data(), row_buffer.size())) {
        raise_truncated(li);
      }
      for (std::uint32_t c = 0; c < cols; ++c) {
        std::uint32_t bits = 0;
        for (int i = 0; i < 4; ++i) {
          bits |= static_cast<std::uint32_t>(row_buffer[static_cast<std::size_t>(c) * 4 + i])
                  << (8 * i);
        }
        float value;
        std::memcpy(&value, &bits, 4);
        if (!std::isfinite(value)) {
          raise(ErrorCode::validation, "activation dump: non-finite value in layer '" +
                                           layer.name + "'");
        }
        layer.data(r, c) = static_cast<double>(value);
      }
    }
    set.layers.push_back(std::move(layer));
  }
  set.validate();
  return set;
}

ActivationSet read_activation_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::io, "cannot open '" + path + "' for reading");
  return read_activation_dump(in);
}

}  // namespace driftlens
