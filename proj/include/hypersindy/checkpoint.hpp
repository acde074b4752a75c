// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hypersindy/dynamics.hpp"
#include "hypersindy/model.hpp"
#include "hypersindy/training.hpp"

#include <iosfwd>
#include <string>

namespace hypersindy {

// Everything needed to reload a trained model: the library spec, the full
// training configuration (with its seed), the data scaling, every layer, the
// mask state, and the system the model was fit to.
struct Checkpoint {
    SystemSpec system;
    TrainConfig config;
    HyperSindyModel model;
};

void save_checkpoint(std::ostream& os, const Checkpoint& ckpt);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);

Checkpoint load_checkpoint(std::istream& is);
Checkpoint load_checkpoint(const std::string& path);

} // namespace hypersindy
