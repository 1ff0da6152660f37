#pragma once

#include <string>

#include "trunckern/evolve.hpp"

namespace trunckern {

/// Shortest representation that round-trips a double exactly (17 significant
/// digits).
std::string format_g17(double v);

/// Writes one run's snapshots: a self-describing header (grid, params, dt)
/// followed by one `t, x_1..x_d, u` row per node per snapshot.
void write_snapshots(const SpaceTimeField& field, const std::string& path);

/// Reads a snapshot dump back; values round-trip bit-exactly.
SpaceTimeField read_snapshots(const std::string& path);

}  // namespace trunckern
