#pragma once

#include <string>
#include <vector>

#include "popovdae/mild.hpp"
#include "popovdae/pencil.hpp"
#include "popovdae/popov.hpp"

namespace popovdae::io {

// Shortest text form with up to 17 significant digits ("%.17g"): enough to
// round-trip any double, and byte-stable for identical values.
std::string format_double(double v);

// System files: JSON object with row-major numeric matrices "E", "A", "B",
// "C" and an optional "labels" array of state names. Ragged rows, missing
// keys and non-finite entries raise InvalidInput; shape inconsistencies
// raise DimensionMismatch.
DescriptorSystem parse_system_json(const std::string& text);
DescriptorSystem read_system_json(const std::string& path);
std::string system_to_json(const DescriptorSystem& sys);
void write_system_json(const std::string& path, const DescriptorSystem& sys);

// Weight files: JSON object {"Q", "N" (optional), "R", "t_f", "steps"}.
// Each weight is either one matrix (held constant) or an array of `steps`
// matrices (one per interval); a missing "N" means no cross weight.
WeightSchedule parse_weights_json(const std::string& text);
WeightSchedule read_weights_json(const std::string& path);

// Trajectory CSV: header "t,<label_1>,...", one row per grid node, every
// number written by format_double.
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::vector<std::string>& labels);

// Signal CSV: header "t,<base>_1,...", one row per interval, the time column
// holding the interval midpoints.
void write_signal_csv(const std::string& path, const Signal& s, const std::string& base);

// Reads a signal CSV for the given grid: one header line, then exactly
// grid.m rows "t,v_1,...,v_dim". The time column is ignored (values are
// taken to be the per-interval constants in row order).
Signal read_signal_csv(const std::string& path, const TimeGrid& grid);

}  // namespace popovdae::io
