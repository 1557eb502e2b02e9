#pragma once

#include <array>
#include <string>
#include <string_view>

#include "magnus/gustavson.hpp"
#include "magnus/magnus.hpp"

namespace magnus {

enum class Algorithm { Reference, GustavsonDense, Esc, Magnus, MagnusFineOnly };

inline constexpr std::array<Algorithm, 5> kAllAlgorithms = {
    Algorithm::Reference, Algorithm::GustavsonDense, Algorithm::Esc, Algorithm::Magnus, Algorithm::MagnusFineOnly};

/// "reference", "gustavson-dense", "esc", "magnus", "magnus-fine-only".
std::string_view algorithm_name(Algorithm algo);

/// Inverse of algorithm_name; throws InputError on an unknown name.
Algorithm parse_algorithm(std::string_view name);

/// Runs one algorithm. options.threads applies to every algorithm; the rest
/// of options only affects the MAGNUS variants. The reference result carries
/// a single "numeric" timing.
SpgemmResult run_spgemm(Algorithm algo, const CsrMatrix& a, const CsrMatrix& b, const MagnusOptions& options = {});

}  // namespace magnus
