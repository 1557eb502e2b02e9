#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "magnus/errors.hpp"
#include "magnus/io.hpp"

namespace magnus {
namespace {

constexpr std::array<char, 8> kMagic{'M', 'G', 'N', 'S', 'C', 'S', 'R', '\0'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw InputError("binary cache truncated");
  return v;
}

}  // namespace

void write_binary(const CsrMatrix& m, std::ostream& out) {
  const auto col_bytes = static_cast<std::uint8_t>(m.col_index_bytes());
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kVersion);
  put<std::uint8_t>(out, 8);  // row_ptr width
  put<std::uint8_t>(out, col_bytes);
  put<std::uint8_t>(out, 8);  // value width (IEEE-754 binary64)
  put<std::uint8_t>(out, 0);
  put<std::uint64_t>(out, m.n_rows);
  put<std::uint64_t>(out, m.n_cols);
  put<std::uint64_t>(out, m.nnz());
  out.write(reinterpret_cast<const char*>(m.row_ptr.data()),
            static_cast<std::streamsize>(m.row_ptr.size() * sizeof(Offset)));
  if (col_bytes == 8) {
    out.write(reinterpret_cast<const char*>(m.col.data()),
              static_cast<std::streamsize>(m.col.size() * sizeof(Index)));
  } else {
    std::vector<std::uint32_t> narrow(m.col.begin(), m.col.end());
    out.write(reinterpret_cast<const char*>(narrow.data()),
              static_cast<std::streamsize>(narrow.size() * sizeof(std::uint32_t)));
  }
  out.write(reinterpret_cast<const char*>(m.val.data()), static_cast<std::streamsize>(m.val.size() * sizeof(Real)));
  if (!out) throw InputError("binary cache write failed");
}

void write_binary(const CsrMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  write_binary(m, out);
}

CsrMatrix read_binary(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw InputError("not a binary CSR cache");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw InputError("unsupported binary cache version " + std::to_string(version));
  const auto row_ptr_bytes = get<std::uint8_t>(in);
  const auto col_bytes = get<std::uint8_t>(in);
  const auto val_bytes = get<std::uint8_t>(in);
  get<std::uint8_t>(in);
  if (row_ptr_bytes != 8 || (col_bytes != 4 && col_bytes != 8) || val_bytes != 8) {
    throw InputError("unsupported binary cache widths");
  }
  CsrMatrix m(get<std::uint64_t>(in), 0);
  m.n_cols = get<std::uint64_t>(in);
  const auto nnz = get<std::uint64_t>(in);

  auto read_raw = [&](void* dst, std::size_t bytes) {
    if (!in.read(static_cast<char*>(dst), static_cast<std::streamsize>(bytes))) {
      throw InputError("binary cache truncated");
    }
  };
  read_raw(m.row_ptr.data(), m.row_ptr.size() * sizeof(Offset));
  m.col.resize(nnz);
  if (col_bytes == 8) {
    read_raw(m.col.data(), nnz * sizeof(Index));
  } else {
    std::vector<std::uint32_t> narrow(nnz);
    read_raw(narrow.data(), nnz * sizeof(std::uint32_t));
    std::copy(narrow.begin(), narrow.end(), m.col.begin());
  }
  m.val.resize(nnz);
  read_raw(m.val.data(), nnz * sizeof(Real));

  if (auto report = validate_csr(m, false); !report) throw InputError("binary cache invalid: " + report.message);
  return m;
}

CsrMatrix read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return read_binary(in);
}

CsrMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  in.clear();
  in.seekg(0);
  if (magic == kMagic) return read_binary(in);
  return read_matrix_market(in);
}

}  // namespace magnus
