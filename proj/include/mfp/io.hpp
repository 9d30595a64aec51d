#pragma once

#include <string>

#include "mfp/evolution.hpp"

namespace mfp {

/// Trajectory as plot-ready CSV: t, mass, one column per recorded norm.
/// Formatting is locale-free %.17g, so identical runs are bit-identical.
void write_trajectory_csv(const TrajectoryRecord& traj, const std::string& path);

/// Coefficient dump: <prefix>.json header (grid, frame) + <prefix>.csv rows
/// xi_1..xi_dx, alpha_1..alpha_dv, re, im.
void save_field(const FieldState& state, const std::string& prefix);
FieldState load_field(const std::string& prefix);

/// Sparse operator in coordinate text (row col re im) with a JSON header.
void export_operator(const LinearOperatorRep& op, const std::string& prefix);

std::string fnv1a64_hex(const std::string& bytes);
std::string file_hash(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace mfp
