#pragma once

#include <cstdint>
#include <string>

#include "msa/regnet.hpp"

namespace msa {

// Trained-control checkpoint. Binary layout, all integers little-endian:
//   magic "MSAC", u32 version, u32 l, u32 d, u32 iteration, u64 config digest,
//   then each weight tensor as (u32 rank, u32 extents..., f64 payload).
struct Checkpoint {
  std::uint32_t version = 1;
  std::uint32_t layers = 0;
  std::uint32_t channels = 0;
  std::uint32_t iteration = 0;
  std::uint64_t config_digest = 0;
  RegularizerParams params;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace msa
