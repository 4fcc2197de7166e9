#include "tudiff/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace tudiff {

namespace {

constexpr char kMagic[4] = {'T', 'U', 'D', 'M'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    T out{};
    auto* src = reinterpret_cast<const unsigned char*>(&v);
    auto* dst = reinterpret_cast<unsigned char*>(&out);
    for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = src[sizeof(T) - 1 - i];
    return out;
  } else {
    return v;
  }
}

void write_u32(std::ostream& out, std::uint32_t v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u8(std::ostream& out, std::uint8_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_f64(std::ostream& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof(bits));
  bits = to_little(bits);
  out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw CheckpointError("checkpoint truncated while reading u32");
  return to_little(v);
}

std::uint8_t read_u8(std::istream& in) {
  std::uint8_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw CheckpointError("checkpoint truncated while reading u8");
  return v;
}

double read_f64(std::istream& in) {
  std::uint64_t bits = 0;
  in.read(reinterpret_cast<char*>(&bits), sizeof(bits));
  if (!in) throw CheckpointError("checkpoint truncated while reading f64");
  bits = to_little(bits);
  double d;
  std::memcpy(&d, &bits, sizeof(d));
  return d;
}

std::uint32_t kind_tag(ScheduleKind kind) { return static_cast<std::uint32_t>(kind); }

ScheduleKind kind_from_tag(std::uint32_t tag) {
  if (tag > 3) throw CheckpointError("checkpoint has unknown schedule kind tag " +
                                     std::to_string(tag));
  return static_cast<ScheduleKind>(tag);
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open checkpoint for write: " + path);

  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(ckpt.ambient.D));
  write_u32(out, static_cast<std::uint32_t>(ckpt.ambient.d_prime));
  write_u32(out, kind_tag(ckpt.schedule.kind));
  write_f64(out, ckpt.schedule.conventional.beta_min);
  write_f64(out, ckpt.schedule.conventional.beta_max);
  write_u32(out, static_cast<std::uint32_t>(ckpt.schedule.T));

  write_u8(out, ckpt.ortho.has_value() ? 1 : 0);
  if (ckpt.ortho.has_value()) {
    for (int d = 0; d < ckpt.ambient.D; ++d) write_f64(out, ckpt.ortho->direction[d]);
    write_f64(out, ckpt.ortho->delta);
    write_u32(out, static_cast<std::uint32_t>(ckpt.ortho->class_directions.size()));
    for (const auto& dir : ckpt.ortho->class_directions) {
      for (int d = 0; d < ckpt.ambient.D; ++d) write_f64(out, dir[d]);
    }
  }

  write_u32(out, static_cast<std::uint32_t>(ckpt.model.layer_sizes.size()));
  for (int w : ckpt.model.layer_sizes) write_u32(out, static_cast<std::uint32_t>(w));
  for (std::size_t l = 0; l < ckpt.model.weights.size(); ++l) {
    const auto& w = ckpt.model.weights[l];
    for (long r = 0; r < w.rows(); ++r) {
      for (long c = 0; c < w.cols(); ++c) write_f64(out, w(r, c));
    }
    for (long i = 0; i < ckpt.model.biases[l].size(); ++i) {
      write_f64(out, ckpt.model.biases[l][i]);
    }
  }
  if (!out) throw CheckpointError("write failure on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint for read: " + path);

  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw CheckpointError("bad checkpoint magic: expected \"TUDM\", got \"" +
                          std::string(magic, in ? 4 : 0) + "\"");
  }
  const std::uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw CheckpointError("unsupported checkpoint format version " +
                          std::to_string(version) + " (expected " +
                          std::to_string(kVersion) + ")");
  }

  Checkpoint ckpt;
  ckpt.ambient.D = static_cast<int>(read_u32(in));
  ckpt.ambient.d_prime = static_cast<int>(read_u32(in));
  const ScheduleKind kind = kind_from_tag(read_u32(in));
  ConventionalParams params;
  params.beta_min = read_f64(in);
  params.beta_max = read_f64(in);
  const int T = static_cast<int>(read_u32(in));
  ckpt.schedule = make_schedule(kind, T, params);

  if (read_u8(in)) {
    OrthoTimeConfig o;
    o.direction.resize(ckpt.ambient.D);
    for (int d = 0; d < ckpt.ambient.D; ++d) o.direction[d] = read_f64(in);
    o.delta = read_f64(in);
    const std::uint32_t n_classes = read_u32(in);
    for (std::uint32_t c = 0; c < n_classes; ++c) {
      Eigen::VectorXd dir(ckpt.ambient.D);
      for (int d = 0; d < ckpt.ambient.D; ++d) dir[d] = read_f64(in);
      o.class_directions.push_back(std::move(dir));
    }
    ckpt.ortho = std::move(o);
  }

  const std::uint32_t n_sizes = read_u32(in);
  if (n_sizes < 2 || n_sizes > 64) {
    throw CheckpointError("checkpoint layer count " + std::to_string(n_sizes) +
                          " is implausible");
  }
  ckpt.model.layer_sizes.resize(n_sizes);
  for (auto& w : ckpt.model.layer_sizes) w = static_cast<int>(read_u32(in));
  for (std::size_t l = 0; l + 1 < n_sizes; ++l) {
    const int fan_in = ckpt.model.layer_sizes[l];
    const int fan_out = ckpt.model.layer_sizes[l + 1];
    Eigen::MatrixXd w(fan_in, fan_out);
    for (int r = 0; r < fan_in; ++r) {
      for (int c = 0; c < fan_out; ++c) w(r, c) = read_f64(in);
    }
    Eigen::VectorXd b(fan_out);
    for (int i = 0; i < fan_out; ++i) b[i] = read_f64(in);
    ckpt.model.weights.push_back(std::move(w));
    ckpt.model.biases.push_back(std::move(b));
  }
  return ckpt;
}

}  // namespace tudiff
