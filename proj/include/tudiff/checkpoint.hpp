#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "tudiff/diffusion.hpp"
#include "tudiff/geometry.hpp"
#include "tudiff/model.hpp"
#include "tudiff/schedule.hpp"

namespace tudiff {

class CheckpointError : public std::runtime_error {
 public:
  explicit CheckpointError(const std::string& what) : std::runtime_error(what) {}
};

// Everything sampling needs, reconstructed bit-exactly from disk.
struct Checkpoint {
  AmbientConfig ambient;
  ScheduleSpec schedule;
  std::optional<OrthoTimeConfig> ortho;
  DenoiserModel model;
};

// Binary layout (all multi-byte values little-endian):
//   magic "TUDM", u32 version (=1),
//   u32 D, u32 d_prime,
//   u32 schedule kind, f64 beta_min, f64 beta_max, u32 T,
//   u8 ortho flag; if set: D f64 direction, f64 delta,
//                          u32 class count, count*D f64 class directions,
//   u32 layer count, layer count u32 layer sizes,
//   per layer: fan_in*fan_out f64 weights (row-major), fan_out f64 biases.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);

/// Throws CheckpointError with a magic/version diagnostic on corrupt input.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace tudiff
