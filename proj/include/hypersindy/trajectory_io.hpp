// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hypersindy/dynamics.hpp"

#include <iosfwd>
#include <string>

namespace hypersindy {

// Trajectory CSV: header `t,x1,...,xn[,dx1,...,dxn]`, one row per timestep,
// values printed with 17 significant digits so doubles round-trip exactly.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

Trajectory read_trajectory_csv(std::istream& is);
Trajectory read_trajectory_csv(const std::string& path);

// Shared formatting helper: shortest text that parses back to the same double
// is not required; a fixed "%.17g" keeps every writer byte-deterministic.
std::string format_double(double value);

} // namespace hypersindy
