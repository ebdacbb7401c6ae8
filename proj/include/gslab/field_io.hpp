#pragma once

#include <string>

#include "gslab/field.hpp"

namespace gslab {

/// Writes <stem>.json (header: dim, lo, hi, n_nodes, name) and <stem>.bin
/// (flat little-endian float64 payload, row-major).
void save_field(const ScalarField& f, const std::string& stem, const std::string& name);

/// Reads a field written by save_field.  Returns the field and its name.
ScalarField load_field(const std::string& stem, std::string* name = nullptr);

/// Lossless CSV alternative: a '#' metadata line, then one
/// "x[,y],value" row per node with round-trip-exact decimal formatting.
void save_field_csv(const ScalarField& f, const std::string& path, const std::string& name);
ScalarField load_field_csv(const std::string& path, std::string* name = nullptr);

}  // namespace gslab
