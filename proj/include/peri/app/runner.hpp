#pragma once

#include "peri/app/config.hpp"

#include <filesystem>

namespace peri::app {

/// Runs the configured route(s), writes the requested artifacts into out_dir and
/// returns the summary document. A detected blowup is a successful run.
json run(const SimConfig& cfg, const std::filesystem::path& out_dir);

/// Builds the initial field for a preset on the given grid.
Vector<double> make_field(const FieldConfig& f, const Grid<double>& grid, std::uint64_t seed);

std::string format_number(double v);

}  // namespace peri::app
