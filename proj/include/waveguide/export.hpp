#pragma once

#include <string>
#include <vector>

#include "waveguide/scattering.hpp"

namespace wg {

/// Shortest locale-independent text for x with at most `precision` significant digits.
std::string format_number(double x, int precision);
/// x rounded to `precision` significant digits.
double round_to(double x, int precision);

/// Structured-text (JSON) document with k, dimension, truncation, rcond,
/// residuals, row/column metadata and entries as [re, im] pairs.
std::string smatrix_to_json(const ScatteringMatrix& s, int precision);
/// Reads a document written by smatrix_to_json; throws DomainError on malformed input.
ScatteringMatrix smatrix_from_json(const std::string& text);

/// One CSV line "k,i,j,re,im" per entry (no header).
std::string smatrix_to_csv_rows(const ScatteringMatrix& s, int precision);

Family family_from_string(const std::string& s);

}  // namespace wg
