#pragma once

#include "gml/histogram.hpp"

#include <iosfwd>
#include <string>

namespace gml {

/// Formats with 12 significant digits (%.12g), the precision of every CSV
/// the tools emit.
std::string format_sig(double x);

/// Writes rows of comma-separated %.12g values, "\n" line endings.
void write_csv_matrix(std::ostream& os, const Matrix& m);

/// Parses a rectangular comma-separated block of reals. Blank lines and
/// lines starting with '#' are skipped. Throws on ragged rows or non-numeric
/// fields.
Matrix read_csv_matrix(std::istream& is);

Matrix read_matrix_file(const std::string& path);
void write_matrix_file(const std::string& path, const Matrix& m);

/// Reads a histogram as a one-row (or one-column) CSV file.
Histogram read_histogram_file(const std::string& path);

}  // namespace gml
