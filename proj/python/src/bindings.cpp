#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "magnus/bench.hpp"
#include "magnus/errors.hpp"
#include "magnus/generators.hpp"
#include "magnus/planner.hpp"
#include "magnus/spgemm.hpp"
#include "magnus/system.hpp"

namespace py = pybind11;
using namespace magnus;

namespace {

template <class T>
py::array_t<T> to_numpy(std::vector<T>&& v) {
  auto* heap = new std::vector<T>(std::move(v));
  py::capsule owner(heap, [](void* p) { delete static_cast<std::vector<T>*>(p); });
  return py::array_t<T>({heap->size()}, {sizeof(T)}, heap->data(), owner);
}

template <class T>
std::vector<T> from_numpy(const py::array_t<T, py::array::c_style | py::array::forcecast>& a, const char* name) {
  if (a.ndim() != 1) throw InputError(std::string(name) + " must be one-dimensional");
  return std::vector<T>(a.data(), a.data() + a.size());
}

CsrMatrix make_csr(py::array_t<Offset, py::array::c_style | py::array::forcecast> indptr,
                   py::array_t<Index, py::array::c_style | py::array::forcecast> indices,
                   py::array_t<Real, py::array::c_style | py::array::forcecast> data, Index n_rows, Index n_cols) {
  CsrMatrix m;
  m.n_rows = n_rows;
  m.n_cols = n_cols;
  m.row_ptr = from_numpy(indptr, "indptr");
  m.col = from_numpy(indices, "indices");
  m.val = from_numpy(data, "data");
  // unsorted rows are accepted and sorted here; everything else must hold
  auto report = validate_csr(m, false);
  if (!report) throw InputError("invalid CSR input: " + report.message);
  if (!has_sorted_rows(m)) sort_rows(m);
  return m;
}

py::tuple csr_tuple(CsrMatrix&& m) {
  Index rows = m.n_rows, cols = m.n_cols;
  return py::make_tuple(to_numpy(std::move(m.row_ptr)), to_numpy(std::move(m.col)), to_numpy(std::move(m.val)),
                        py::make_tuple(rows, cols));
}

SystemParams system_from(std::optional<std::uint64_t> l2, std::optional<std::uint64_t> line,
                         std::optional<std::uint64_t> budget) {
  SystemParams sys = detect_system().params;
  if (l2) sys.l2_bytes = *l2;
  if (line) sys.cache_line_bytes = *line;
  if (budget) sys.memory_budget_bytes = *budget;
  sys.validate();
  return sys;
}

py::dict system_dict(const SystemParams& s) {
  py::dict d;
  d["cache_line_bytes"] = s.cache_line_bytes;
  d["l2_bytes"] = s.l2_bytes;
  d["memory_budget_bytes"] = s.memory_budget_bytes;
  d["histo_type_bytes"] = s.histo_type_bytes;
  d["prefix_sum_type_bytes"] = s.prefix_sum_type_bytes;
  d["val_bytes"] = s.val_bytes;
  return d;
}

py::dict plan_dict(const ChunkPlan& p) {
  py::dict d;
  d["s_dense_accum"] = p.s_dense_accum;
  d["s_chunk_fine"] = p.s_chunk_fine;
  d["padded_cols"] = p.padded_cols;
  d["n_chunks_fine"] = p.n_chunks_fine;
  d["chunk_len_fine"] = p.chunk_len_fine;
  d["m_c_max_l2"] = p.m_c_max_l2;
  d["use_coarse"] = p.use_coarse;
  d["n_chunks_coarse"] = p.n_chunks_coarse;
  d["chunk_len_coarse"] = p.chunk_len_coarse;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "MAGNUS sparse matrix-matrix multiplication";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<BudgetError>(m, "BudgetError", PyExc_MemoryError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_RuntimeError);

  m.attr("ALGORITHMS") = [] {
    py::list names;
    for (auto a : kAllAlgorithms) names.append(std::string(algorithm_name(a)));
    return names;
  }();

  m.def(
      "spgemm",
      [](py::array_t<Offset, py::array::c_style | py::array::forcecast> a_indptr,
         py::array_t<Index, py::array::c_style | py::array::forcecast> a_indices,
         py::array_t<Real, py::array::c_style | py::array::forcecast> a_data, std::pair<Index, Index> a_shape,
         py::array_t<Offset, py::array::c_style | py::array::forcecast> b_indptr,
         py::array_t<Index, py::array::c_style | py::array::forcecast> b_indices,
         py::array_t<Real, py::array::c_style | py::array::forcecast> b_data, std::pair<Index, Index> b_shape,
         const std::string& algorithm, int threads, std::optional<std::uint64_t> l2_bytes,
         std::optional<std::uint64_t> cache_line, std::optional<std::uint64_t> memory_budget,
         bool force_fine_only, std::size_t sort_dense_crossover, std::size_t sort_sweet_spot) {
        CsrMatrix a = make_csr(a_indptr, a_indices, a_data, a_shape.first, a_shape.second);
        CsrMatrix b = make_csr(b_indptr, b_indices, b_data, b_shape.first, b_shape.second);
        MagnusOptions opt;
        opt.threads = threads;
        opt.force_fine_only = force_fine_only;
        opt.thresholds = {sort_dense_crossover, sort_sweet_spot};
        if (l2_bytes || cache_line || memory_budget) opt.system = system_from(l2_bytes, cache_line, memory_budget);
        Algorithm algo = parse_algorithm(algorithm);
        SpgemmResult r;
        {
          py::gil_scoped_release release;
          r = run_spgemm(algo, a, b, opt);
        }
        py::dict info;
        info["phase_seconds"] = r.phase_seconds;
        info["counters"] = r.counters;
        info["warnings"] = r.warnings;
        info["total_seconds"] = r.total_seconds();
        return py::make_tuple(csr_tuple(std::move(r.c)), info);
      },
      py::arg("a_indptr"), py::arg("a_indices"), py::arg("a_data"), py::arg("a_shape"), py::arg("b_indptr"),
      py::arg("b_indices"), py::arg("b_data"), py::arg("b_shape"), py::kw_only(), py::arg("algorithm") = "magnus",
      py::arg("threads") = 0, py::arg("l2_bytes") = py::none(), py::arg("cache_line") = py::none(),
      py::arg("memory_budget") = py::none(), py::arg("force_fine_only") = false,
      py::arg("sort_dense_crossover") = 256, py::arg("sort_sweet_spot") = 32,
      "C = A * B on raw CSR arrays. Returns ((indptr, indices, data, shape), info).");

  m.def(
      "gen_rmat",
      [](unsigned scale, Index edge_factor, double a, double b, double c, std::uint64_t seed, bool random_values,
         int threads) {
        RmatParams p{scale, edge_factor, a, b, c, seed, random_values};
        CsrMatrix mat;
        {
          py::gil_scoped_release release;
          mat = gen_rmat(p, threads);
        }
        return csr_tuple(std::move(mat));
      },
      py::arg("scale"), py::arg("edge_factor") = 16, py::arg("a") = 0.57, py::arg("b") = 0.19, py::arg("c") = 0.19,
      py::arg("seed") = 1, py::arg("random_values") = false, py::arg("threads") = 0);

  m.def(
      "gen_uniform_random",
      [](Index n_rows, Index n_cols, Index nnz_per_row, std::uint64_t seed, bool random_values, int threads) {
        ErParams p{n_rows, n_cols, nnz_per_row, seed, random_values};
        CsrMatrix mat;
        {
          py::gil_scoped_release release;
          mat = gen_uniform_random(p, threads);
        }
        return csr_tuple(std::move(mat));
      },
      py::arg("n_rows"), py::arg("n_cols"), py::arg("nnz_per_row"), py::arg("seed") = 1,
      py::arg("random_values") = false, py::arg("threads") = 0);

  m.def(
      "gen_banded",
      [](Index n, Index half_width, std::uint64_t seed, bool random_values) {
        return csr_tuple(gen_banded(BandedParams{n, half_width, seed, random_values}));
      },
      py::arg("n"), py::arg("half_width"), py::arg("seed") = 1, py::arg("random_values") = false);

  m.def("detect_system", [] {
    auto d = detect_system();
    py::dict out = system_dict(d.params);
    out["warnings"] = d.warnings;
    return out;
  });

  m.def(
      "chunk_plans",
      [](Index m_c, std::optional<std::uint64_t> l2_bytes, std::optional<std::uint64_t> cache_line,
         bool allow_coarse) {
        SystemParams sys = system_from(l2_bytes, cache_line, std::nullopt);
        auto plans = compute_phase_plans(sys, m_c, allow_coarse);
        py::dict d;
        d["symbolic"] = plan_dict(plans.symbolic);
        d["numeric"] = plan_dict(plans.numeric);
        d["system"] = system_dict(sys);
        return d;
      },
      py::arg("m_c"), py::kw_only(), py::arg("l2_bytes") = py::none(), py::arg("cache_line") = py::none(),
      py::arg("allow_coarse") = true, "Chunk geometry of both phases for a product with m_c columns.");

  m.def(
      "ideal_bound",
      [](std::uint64_t n_a, std::uint64_t nnz_a, std::uint64_t n_inter_prod, std::uint64_t n_c,
         std::uint64_t nnz_c, double bandwidth, std::uint64_t s_row_ptr, std::uint64_t s_col_idx,
         std::uint64_t s_val) {
        auto b = ideal_bound({n_a, nnz_a, n_inter_prod, n_c, nnz_c, s_row_ptr, s_col_idx, s_val, bandwidth});
        py::dict d;
        d["read_bytes"] = b.read_bytes;
        d["write_bytes"] = b.write_bytes;
        d["seconds"] = b.seconds;
        return d;
      },
      py::arg("n_a"), py::arg("nnz_a"), py::arg("n_inter_prod"), py::arg("n_c"), py::arg("nnz_c"),
      py::arg("bandwidth") = 1.0, py::arg("s_row_ptr") = 8, py::arg("s_col_idx") = 4, py::arg("s_val") = 8);

  m.def(
      "measure_bandwidth",
      [](std::uint64_t bytes, std::size_t reps, int threads) {
        BandwidthResult r;
        {
          py::gil_scoped_release release;
          r = measure_bandwidth(bytes, reps, threads);
        }
        py::dict d;
        d["bytes_per_second"] = r.bytes_per_second;
        d["bytes_moved"] = r.bytes_moved;
        d["best_seconds"] = r.best_seconds;
        d["rep_seconds"] = r.rep_seconds;
        return d;
      },
      py::arg("bytes") = std::uint64_t{1} << 28, py::arg("reps") = 5, py::arg("threads") = 1);
}
