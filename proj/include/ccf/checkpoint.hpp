#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "ccf/training.hpp"

namespace ccf {

// Binary layout, little-endian throughout:
//   "CCF1" | u32 version
//   then seven sections, each u64 byte length + payload, in this order:
//   config (canonical key = value text), classes, subnet A, subnet B, DNet,
//   optimizer (step, epoch, moments), rng (shuffle and noise streams).
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const TrainingState& state);
TrainingState deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const TrainingState& state, const std::filesystem::path& path);
TrainingState load_checkpoint(const std::filesystem::path& path);

// Digest of every parameter value of the state (A, B, DNet).
std::string weights_digest(const TrainingState& state);

}  // namespace ccf
