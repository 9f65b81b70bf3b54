#pragma once

#include <cstdint>
#include <filesystem>

#include "moransac/voting_net.hpp"

namespace moransac {

/// On-disk model: magic "MORN", u32 format version, epoch counter, a
/// layer-shape table, then the little-endian float32 parameter blob followed
/// by the batch-norm running statistics.
struct ModelFile {
  VotingNet net;
  std::uint32_t epochs_trained = 0;
};

void save_model(const std::filesystem::path& file, const ModelFile& model);

/// Throws FormatError on bad magic, unsupported version, or truncation.
ModelFile load_model(const std::filesystem::path& file);

}  // namespace moransac
