#pragma once

#include <filesystem>
#include <string>

#include "boxqp/problem.hpp"

namespace boxqp {

/// Plain-text instance format:
///
///   BOXQP 1
///   N <n> DENSITY <d|-> SEED <s|->
///   <n rows of Q>
///   <V>
///   <lower bounds>
///   <upper bounds>
///   [OPT <value>]
///
/// Reals are written in shortest round-trip decimal form.
std::string format_instance(const BoxQPInstance& inst);
BoxQPInstance parse_instance(const std::string& text);

void save_instance(const BoxQPInstance& inst, const std::filesystem::path& path);
BoxQPInstance load_instance(const std::filesystem::path& path);

// Round-trip decimal representation of a double.
std::string format_real(double value);

// Writes `contents` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace boxqp
