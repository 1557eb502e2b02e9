#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "magnus/errors.hpp"
#include "magnus/io.hpp"

namespace magnus {
namespace {

enum class Field { Real, Integer, Complex, Pattern };
enum class Symmetry { General, Symmetric, SkewSymmetric, Hermitian };

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

CsrMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty input", 1);
  ++line_no;

  std::istringstream header(line);
  std::string banner, object, format, field_s, symmetry_s;
  header >> banner >> object >> format >> field_s >> symmetry_s;
  if (banner != "%%MatrixMarket") throw ParseError("missing %%MatrixMarket banner", line_no);
  if (lower(object) != "matrix") throw ParseError("unsupported object '" + object + "'", line_no);
  if (lower(format) == "array") throw ParseError("dense array format is not supported", line_no);
  if (lower(format) != "coordinate") throw ParseError("unknown format '" + format + "'", line_no);

  Field field;
  const auto f = lower(field_s);
  if (f == "real" || f == "double") field = Field::Real;
  else if (f == "integer") field = Field::Integer;
  else if (f == "complex") field = Field::Complex;
  else if (f == "pattern") field = Field::Pattern;
  else throw ParseError("unknown field '" + field_s + "'", line_no);

  Symmetry symmetry;
  const auto s = lower(symmetry_s);
  if (s == "general") symmetry = Symmetry::General;
  else if (s == "symmetric") symmetry = Symmetry::Symmetric;
  else if (s == "skew-symmetric") symmetry = Symmetry::SkewSymmetric;
  else if (s == "hermitian") symmetry = Symmetry::Hermitian;
  else throw ParseError("unknown symmetry '" + symmetry_s + "'", line_no);

  // Skip comments up to the size line.
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line[0] == '%') continue;
    if (blank(line)) continue;
    break;
  }
  if (!in && line.empty()) throw ParseError("missing size line", line_no + 1);

  Index n_rows = 0, n_cols = 0, declared = 0;
  {
    std::istringstream size_line(line);
    if (!(size_line >> n_rows >> n_cols >> declared)) throw ParseError("malformed size line", line_no);
    std::string extra;
    if (size_line >> extra) throw ParseError("unexpected token '" + extra + "' on size line", line_no);
  }
  if (symmetry != Symmetry::General && n_rows != n_cols) {
    throw ParseError("symmetric storage requires a square matrix", line_no);
  }

  std::vector<Triplet> triplets;
  triplets.reserve(symmetry == Symmetry::General ? declared : 2 * declared);
  Index read = 0;
  while (read < declared) {
    if (!std::getline(in, line)) {
      throw ParseError("expected " + std::to_string(declared) + " entries, found " + std::to_string(read),
                       line_no + 1);
    }
    ++line_no;
    if (blank(line) || line[0] == '%') continue;
    std::istringstream entry(line);
    Index r = 0, c = 0;
    double v = 1.0;
    if (!(entry >> r >> c)) throw ParseError("malformed entry", line_no);
    if (field != Field::Pattern && !(entry >> v)) throw ParseError("missing value", line_no);
    if (r < 1 || r > n_rows || c < 1 || c > n_cols) throw ParseError("index out of range", line_no);
    triplets.push_back({r - 1, c - 1, v});
    if (symmetry != Symmetry::General && r != c) {
      const double mirrored = symmetry == Symmetry::SkewSymmetric ? -v : v;
      triplets.push_back({c - 1, r - 1, mirrored});
    }
    ++read;
  }
  return csr_from_triplets(triplets, n_rows, n_cols);
}

CsrMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return read_matrix_market(in);
}

void write_matrix_market(const CsrMatrix& m, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.n_rows << ' ' << m.n_cols << ' ' << m.nnz() << '\n';
  char buf[32];
  for (Index i = 0; i < m.n_rows; ++i) {
    for (Offset k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
      auto res = std::to_chars(buf, buf + sizeof(buf), m.val[k]);
      out << i + 1 << ' ' << m.col[k] + 1 << ' ' << std::string_view(buf, res.ptr - buf) << '\n';
    }
  }
}

void write_matrix_market(const CsrMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_matrix_market(m, out);
}

}  // namespace magnus
