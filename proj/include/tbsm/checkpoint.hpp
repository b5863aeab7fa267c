#pragma once

// Binary model checkpoints: the model configuration followed by every
// trainable tensor in collect_params order.

#include <string>

#include "tbsm/model.hpp"

namespace tbsm {

void save_checkpoint(const std::string& path, const TbsmParams& model);

// Rebuilds the model from the stored configuration, then overwrites the
// freshly initialized parameters with the stored values. Shape or count
// mismatches raise IoError.
TbsmParams load_checkpoint(const std::string& path);

}  // namespace tbsm
