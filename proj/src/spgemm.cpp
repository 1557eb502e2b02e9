#include "magnus/spgemm.hpp"

#include "magnus/errors.hpp"
#include "timer.hpp"

namespace magnus {

std::string_view algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::Reference:
      return "reference";
    case Algorithm::GustavsonDense:
      return "gustavson-dense";
    case Algorithm::Esc:
      return "esc";
    case Algorithm::Magnus:
      return "magnus";
    case Algorithm::MagnusFineOnly:
      return "magnus-fine-only";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : kAllAlgorithms) {
    if (algorithm_name(a) == name) return a;
  }
  throw InputError("unknown algorithm '" + std::string(name) +
                   "' (expected reference, gustavson-dense, esc, magnus or magnus-fine-only)");
}

SpgemmResult run_spgemm(Algorithm algo, const CsrMatrix& a, const CsrMatrix& b, const MagnusOptions& options) {
  switch (algo) {
    case Algorithm::Reference: {
      detail::Stopwatch sw;
      SpgemmResult r;
      r.c = spgemm_reference(a, b);
      r.phase_seconds["numeric"] = sw.seconds();
      r.counters["inter_prod_size"] = row_intermediate_stats(a, b).total();
      r.counters["nnz_c"] = r.c.nnz();
      return r;
    }
    case Algorithm::GustavsonDense:
      return spgemm_gustavson_dense(a, b, options.threads);
    case Algorithm::Esc:
      return spgemm_esc(a, b, options.threads);
    case Algorithm::Magnus:
      return spgemm_magnus(a, b, options);
    case Algorithm::MagnusFineOnly: {
      MagnusOptions o = options;
      o.force_fine_only = true;
      return spgemm_magnus(a, b, o);
    }
  }
  throw InputError("unknown algorithm");
}

}  // namespace magnus
