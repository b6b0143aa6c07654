#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qembed/audit.hpp"
#include "qembed/holonomy.hpp"
#include "qembed/lattice.hpp"
#include "qembed/pipelines.hpp"

namespace py = pybind11;
using namespace qe;

namespace {

// Thin handles so Python never sees shared_ptr<const T> directly.
struct PySpace {
  SpacePtr ptr;
};
struct PyEmbedding {
  EmbPtr ptr;
};

PySpace space_from_spec(const std::string& spec) {
  json j;
  try {
    j = json::parse(spec);
  } catch (const json::exception& e) {
    throw InputError(std::string("space spec is not JSON: ") + e.what());
  }
  return {construct_space(j)};
}

}  // namespace

PYBIND11_MODULE(_qembed, m) {
  m.doc() = "Bi-Lipschitz embeddings of quotient metric spaces (native core)";
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<InvariantError>(m, "InvariantError", PyExc_RuntimeError);

  py::class_<PySpace>(m, "Space")
      .def_static("from_spec", &space_from_spec, py::arg("spec"))
      .def_property_readonly("dim", [](const PySpace& s) { return s.ptr->dim(); })
      .def("spec", [](const PySpace& s) { return s.ptr->spec().dump(); })
      .def("distance", [](const PySpace& s, const Vec& a, const Vec& b) { return s.ptr->distance(a, b); })
      .def("sample",
           [](const PySpace& s, std::uint64_t seed, int count) {
             Rng rng(seed);
             std::vector<Vec> out;
             for (int i = 0; i < count; ++i) out.push_back(s.ptr->sample(rng));
             return out;
           },
           py::arg("seed"), py::arg("count") = 1);

  py::class_<PyEmbedding>(m, "Embedding")
      .def("__call__", [](const PyEmbedding& e, const Vec& x) { return e.ptr->eval(x); })
      .def_property_readonly("target_dim", [](const PyEmbedding& e) { return e.ptr->target_dim(); })
      .def_property_readonly("claimed", [](const PyEmbedding& e) { return e.ptr->claimed(); })
      .def_property_readonly("upper", [](const PyEmbedding& e) { return e.ptr->bounds().upper; })
      .def_property_readonly("lower", [](const PyEmbedding& e) { return e.ptr->bounds().lower; })
      .def_property_readonly("op", [](const PyEmbedding& e) { return e.ptr->op(); })
      .def("serialize", [](const PyEmbedding& e, const PySpace& s) { return serialize_embedding(e.ptr, s.ptr); });

  m.def("load_artifact", [](const std::string& bytes) {
    const LoadedEmbedding le = deserialize_embedding(bytes);
    return py::make_tuple(PyEmbedding{le.embedding}, PySpace{le.space});
  });
  m.def("embed", [](const PySpace& s, const std::string& method) { return PyEmbedding{embed_auto(s.ptr, method)}; },
        py::arg("space"), py::arg("method") = "auto");
  m.def("audit",
        [](const PySpace& s, const PyEmbedding& e, std::size_t pairs, std::uint64_t seed, int threads) {
          py::gil_scoped_release nogil;
          return empirical_distortion(*s.ptr, *e.ptr, pairs, seed, threads).to_json().dump();
        },
        py::arg("space"), py::arg("embedding"), py::arg("pairs") = 10000, py::arg("seed") = 42, py::arg("threads") = 0);
  m.def("estimate_doubling",
        [](const PySpace& s, double r, double R) { return estimate_doubling(*s.ptr, r, R).to_json().dump(); },
        py::arg("space"), py::arg("r"), py::arg("R"));
  m.def("short_basis",
        [](const Mat& basis_columns, double c_n) {
          const int n = static_cast<int>(basis_columns.rows());
          const StratParams p = c_n > 0 ? StratParams::with_c(n, c_n) : StratParams::for_dimension(n);
          return short_basis(basis_columns, p).to_json().dump();
        },
        py::arg("basis_columns"), py::arg("c_n") = 0.0);
  m.def("canonical_decomposition",
        [](const std::vector<Mat>& mats) {
          const auto dec = canonical_decomposition(mats);
          json j = dec.to_json();
          j["reconstruction_error"] = dec.reconstruction_error(mats);
          j["invariance_error"] = dec.invariance_error(mats);
          return j.dump();
        },
        py::arg("matrices"));
}
