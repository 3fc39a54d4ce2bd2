#pragma once

#include <string>

#include "adrl/nd/param_store.hpp"

namespace adrl::nd {

// Binary checkpoint: versioned header, free-form metadata string (callers
// store config echoes and trainer state as JSON), then every parameter
// slice by name and shape with raw little-endian doubles. Values round-trip
// bit-exactly within one build.
void save_checkpoint(const std::string& path, const ParamStore& store,
                     const std::string& metadata);

// Loads into an already-constructed store: the file must contain exactly
// the store's slice names with matching shapes (NumericError otherwise).
// Returns the metadata string.
std::string load_checkpoint(const std::string& path, ParamStore& store);

// Reads only the metadata (for inspection tools).
std::string read_checkpoint_metadata(const std::string& path);

}  // namespace adrl::nd
