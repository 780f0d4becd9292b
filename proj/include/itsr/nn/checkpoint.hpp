#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "itsr/nn/network.hpp"

namespace itsr::nn {

// Binary layout, all integers little-endian:
//   "ITSRCKPT"                      8-byte magic
//   u32 version                     kCheckpointVersion
//   u32 stage, u32 epoch, u64 seed  training metadata
//   u32 tensor count
//   per tensor: u32 name length, name bytes, u32 rank, u32 dims[rank],
//               f32 data (column-major, little-endian IEEE-754)
// Parameters use their layer name ("backbone.0.weight"); optimizer momentum
// buffers use "momentum/<parameter name>".
inline constexpr char kCheckpointMagic[8] = {'I', 'T', 'S', 'R', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointMetadata {
  std::uint32_t stage = 0;
  std::uint32_t epoch = 0;
  std::uint64_t seed = 0;
};

struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> shape;
  std::vector<float> data;
};

struct CheckpointData {
  CheckpointMetadata metadata;
  std::vector<NamedTensor> tensors;
};

std::string encode_checkpoint(const CheckpointData& data);
CheckpointData decode_checkpoint(const std::string& bytes);
void write_checkpoint(const CheckpointData& data, const std::filesystem::path& path);
CheckpointData read_checkpoint(const std::filesystem::path& path);

template <typename Scalar>
CheckpointData to_checkpoint(const PolicyValueNet<Scalar>& net, const CheckpointMetadata& meta) {
  CheckpointData data;
  data.metadata = meta;
  auto pack = [](std::string name, const Matrix<Scalar>& m) {
    NamedTensor t;
    t.name = std::move(name);
    t.shape = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
    t.data.resize(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.size(); ++i) t.data[static_cast<std::size_t>(i)] = static_cast<float>(m.data()[i]);
    return t;
  };
  const auto params = net.parameters();
  for (const auto* p : params) data.tensors.push_back(pack(p->name, p->value));
  for (const auto* p : params) data.tensors.push_back(pack("momentum/" + p->name, p->momentum));
  return data;
}

/// Copies parameters and momentum buffers into `net`; throws ShapeError on any name or shape mismatch.
template <typename Scalar>
void restore_checkpoint(const CheckpointData& data, PolicyValueNet<Scalar>& net) {
  auto params = net.parameters();
  if (data.tensors.size() != 2 * params.size()) {
    throw ShapeError("checkpoint has " + std::to_string(data.tensors.size()) + " tensors, network expects " +
                     std::to_string(2 * params.size()));
  }
  auto unpack = [](const NamedTensor& t, const std::string& name, Matrix<Scalar>& m) {
    if (t.name != name) throw ShapeError("expected tensor '" + name + "', found '" + t.name + "'");
    if (t.shape.size() != 2 || t.shape[0] != m.rows() || t.shape[1] != m.cols()) {
      throw ShapeError("shape mismatch for tensor '" + name + "'");
    }
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(t.data[static_cast<std::size_t>(i)]);
  };
  for (std::size_t i = 0; i < params.size(); ++i) {
    unpack(data.tensors[i], params[i]->name, params[i]->value);
    unpack(data.tensors[params.size() + i], "momentum/" + params[i]->name, params[i]->momentum);
  }
}

template <typename Scalar>
void save(const PolicyValueNet<Scalar>& net, const std::filesystem::path& path, const CheckpointMetadata& meta = {}) {
  write_checkpoint(to_checkpoint(net, meta), path);
}

template <typename Scalar>
CheckpointMetadata load(const std::filesystem::path& path, PolicyValueNet<Scalar>& net) {
  const auto data = read_checkpoint(path);
  restore_checkpoint(data, net);
  return data.metadata;
}

}  // namespace itsr::nn
