#ifndef SMNAE_SERIALIZE_HPP
#define SMNAE_SERIALIZE_HPP

#include <string>

#include "smnae/pipeline.hpp"

namespace smnae {

// Versioned binary model container. Layout: magic "SMNAE1", format version,
// fusion rule, z, the three stacked autoencoders (explicit dimensions per
// matrix, little-endian 64-bit floats), a tagged classifier section, and a
// trailing CRC-32 of everything before it. Round trips are bit-exact.
void save_model(const PipelineModel& model, const std::string& path);
PipelineModel load_model(const std::string& path);

}  // namespace smnae

#endif
