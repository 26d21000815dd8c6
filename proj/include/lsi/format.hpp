#pragma once

#include <string>

#include "json.hpp"
#include "lsi/matfun.hpp"

namespace lsi {

using Json = nlohmann::ordered_json;

/// 17 significant digits, scientific, exponent without padding: 1.6460905349794239e-3.
std::string format_real(double x);

/// JSON text with every floating-point value written by format_real; non-finite values become null.
std::string dump_json(const Json& doc, int indent = 2);

/// Row-major array of rows of [re, im] pairs.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& doc);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace lsi
