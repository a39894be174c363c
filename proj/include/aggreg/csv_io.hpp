#pragma once

// CSV layouts.
//
//   design:  header "j0,j1,...,j{M-1}", then n rows; row i holds f_0(X_i)..f_{M-1}(X_i)
//   targets: header "f,y", then n rows
//
// Numbers are written in the shortest form that parses back exactly.

#include <iosfwd>
#include <optional>
#include <string>

#include "aggreg/core.hpp"

namespace aggreg::io {

struct CsvError : InvalidInput {
  using InvalidInput::InvalidInput;
};

// A missing bound means bound_l is inferred from the data.
DesignMatrix read_design_csv(std::istream& in, std::optional<double> bound_l = std::nullopt);
DesignMatrix read_design_csv(const std::string& path, std::optional<double> bound_l = std::nullopt);
void write_design_csv(std::ostream& out, const DesignMatrix& d);
void write_design_csv(const std::string& path, const DesignMatrix& d);

TargetVector read_targets_csv(std::istream& in);
TargetVector read_targets_csv(const std::string& path);
void write_targets_csv(std::ostream& out, const TargetVector& t);
void write_targets_csv(const std::string& path, const TargetVector& t);

// Shortest representation that parses back to the same double.
std::string format_double(double v);

}  // namespace aggreg::io
