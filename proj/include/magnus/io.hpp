#pragma once

#include <filesystem>
#include <iosfwd>

#include "magnus/sparse.hpp"

namespace magnus {

/// Reads a Matrix Market coordinate file. real, integer, complex (real part
/// kept) and pattern (value 1.0) fields are accepted; symmetric,
/// skew-symmetric and hermitian files are expanded to full storage. Array
/// (dense) files are rejected. Errors carry the offending line number.
CsrMatrix read_matrix_market(std::istream& in);
CsrMatrix read_matrix_market(const std::filesystem::path& path);

/// Writes "coordinate real general" with 1-based indices and values printed
/// to round-trip exactly.
void write_matrix_market(const CsrMatrix& m, std::ostream& out);
void write_matrix_market(const CsrMatrix& m, const std::filesystem::path& path);

/// Binary cache, see docs/binary_format.md.
void write_binary(const CsrMatrix& m, std::ostream& out);
void write_binary(const CsrMatrix& m, const std::filesystem::path& path);
CsrMatrix read_binary(std::istream& in);
CsrMatrix read_binary(const std::filesystem::path& path);

/// Dispatches on the file contents: binary cache magic or Matrix Market.
CsrMatrix read_matrix(const std::filesystem::path& path);

}  // namespace magnus
