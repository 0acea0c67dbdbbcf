#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ume/config.hpp"
#include "ume/errors.hpp"
#include "ume/estimators.hpp"
#include "ume/families.hpp"
#include "ume/harness.hpp"
#include "ume/meanvec.hpp"

namespace py = pybind11;
using namespace ume;

namespace {

/// Families are immutable and shared; Python holds the pointer by value.
struct PyFamily {
  FamilyPtr ptr;
};

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

std::string kind_name(VectorKind k) {
  switch (k) {
    case VectorKind::ExplicitTail: return "explicit_tail";
    case VectorKind::TreeBranch: return "tree_branch";
    case VectorKind::Closure: return "closure";
  }
  return "unknown";
}

}  // namespace

PYBIND11_MODULE(_ume, m) {
  m.doc() = "Uniform mean estimation over product Bernoulli families";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<HorizonExceeded>(m, "HorizonExceeded", base);
  py::register_exception<TruthNotInFamily>(m, "TruthNotInFamily", base);
  py::register_exception<NotSeparable>(m, "NotSeparable", base);
  auto est = py::register_exception<EstimatorError>(m, "EstimatorError", base);
  py::register_exception<NoCandidateAccepted>(m, "NoCandidateAccepted", est);
  py::register_exception<EmptyAtFirstRound>(m, "EmptyAtFirstRound", est);
  py::register_exception<InconsistentRows>(m, "InconsistentRows", est);
  py::register_exception<NoBranchAccepted>(m, "NoBranchAccepted", est);
  py::register_exception<NoSurvivorAtFirstRound>(m, "NoSurvivorAtFirstRound", est);

  py::class_<MeanVector>(m, "MeanVector")
      .def_static("constant", &MeanVector::constant, py::arg("value"))
      .def_static(
          "explicit",
          [](std::vector<double> prefix, std::vector<double> tail) {
            return MeanVector::explicit_tail(std::move(prefix), std::move(tail));
          },
          py::arg("prefix"), py::arg("tail") = std::vector<double>{0.5})
      .def_static("truncated", &MeanVector::truncated, py::arg("values"))
      .def_static("tree_branch", &MeanVector::tree_branch, py::arg("bits"), py::arg("on") = 2.0 / 3.0,
                  py::arg("off") = 1.0 / 3.0, py::arg("extension") = 0)
      .def_static("parse", &parse_member, py::arg("text"))
      .def("coord", &MeanVector::coord, py::arg("j"))
      .def("values", &MeanVector::values, py::arg("count"))
      .def_property_readonly("limit", &MeanVector::limit)
      .def_property_readonly("kind", [](const MeanVector& v) { return kind_name(v.kind()); })
      .def("__repr__", [](const MeanVector& v) {
        std::ostringstream s;
        s << "MeanVector(" << kind_name(v.kind()) << ", [";
        const Coord show = std::min<Coord>(6, v.limit().value_or(6));
        for (Coord j = 1; j <= show; ++j) s << (j > 1 ? ", " : "") << v.coord(j);
        s << ", ...])";
        return s.str();
      });

  m.def("sup_distance", &sup_distance, py::arg("a"), py::arg("b"));
  m.def("prefix_linf", &prefix_linf, py::arg("a"), py::arg("b"), py::arg("J"));
  m.def(
      "first_violation",
      [](const MeanVector& a, const MeanVector& b, double threshold, Coord horizon) {
        const Violation v = first_violation(a, b, threshold, horizon);
        return py::make_tuple(v.index, v.certainty == Certainty::Exact);
      },
      py::arg("a"), py::arg("b"), py::arg("threshold"), py::arg("horizon") = kDefaultHorizon,
      "(index or None, exact)");
  m.def("threshold", &hoeffding_threshold, py::arg("n"));

  py::class_<SampleSet>(m, "SampleSet")
      .def_property_readonly("rows", &SampleSet::rows)
      .def_property_readonly("horizon", &SampleSet::horizon)
      .def_property_readonly("seed", &SampleSet::seed)
      .def("column_counts", &SampleSet::column_counts)
      .def("to_numpy", [](const SampleSet& s) {
        py::array_t<std::uint8_t> out({static_cast<py::ssize_t>(s.rows()), static_cast<py::ssize_t>(s.horizon())});
        auto view = out.mutable_unchecked<2>();
        for (std::size_t r = 0; r < s.rows(); ++r) {
          const auto row = s.row(r);
          for (std::size_t j = 0; j < row.size(); ++j) view(r, j) = row[j];
        }
        return out;
      });

  py::class_<PyFamily>(m, "Family")
      .def(py::init([](const std::string& spec) { return PyFamily{parse_family(spec)}; }), py::arg("spec"))
      .def_static(
          "from_members", [](std::vector<MeanVector> members) { return PyFamily{make_countable_list(std::move(members))}; },
          py::arg("members"))
      .def_property_readonly("spec", [](const PyFamily& f) { return f.ptr->spec(); })
      .def("contains", [](const PyFamily& f, const MeanVector& q, Coord horizon) { return f.ptr->contains(q, horizon); },
           py::arg("q"), py::arg("horizon") = kDefaultHorizon)
      .def("random_member", [](const PyFamily& f, std::uint64_t seed) { return f.ptr->random_member(seed); },
           py::arg("seed"))
      .def(
          "sample",
          [](const PyFamily& f, const MeanVector& truth, std::size_t n, Coord J, std::uint64_t seed) {
            return sample(*f.ptr, truth, n, J, seed);
          },
          py::arg("truth"), py::arg("n"), py::arg("J"), py::arg("seed"))
      .def("__repr__", [](const PyFamily& f) { return "Family('" + f.ptr->spec() + "')"; });

  m.def("empirical_mean", &empirical_mean, py::arg("sample"));

  py::class_<EstimatorReport>(m, "EstimatorReport")
      .def_readonly("estimate", &EstimatorReport::estimate)
      .def_readonly("candidate_index", &EstimatorReport::candidate_index)
      .def_readonly("k_reached", &EstimatorReport::k_reached)
      .def_readonly("branch_bits", &EstimatorReport::branch_bits)
      .def_readonly("branch_score", &EstimatorReport::branch_score)
      .def_readonly("notes", &EstimatorReport::notes)
      .def_property_readonly("constraint_radii",
                             [](const EstimatorReport& r) {
                               std::vector<double> radii;
                               for (const auto& b : r.constraints) radii.push_back(b.radius);
                               return radii;
                             })
      .def("to_dict", [](const EstimatorReport& r, Coord show) { return json_to_py(report_json(r, show)); },
           py::arg("show") = 8);

  m.def(
      "learn",
      [](const std::string& estimator, const PyFamily& f, const SampleSet& s) {
        const Learner learner = make_learner(parse_spec(estimator), f.ptr);
        py::gil_scoped_release release;
        return learner(s);
      },
      py::arg("estimator"), py::arg("family"), py::arg("sample"));

  m.def(
      "sweep",
      [](const std::vector<std::pair<std::string, std::string>>& entries) {
        ExperimentConfig cfg = experiment_from_entries(entries);
        std::ostringstream csv;
        nlohmann::json summary;
        {
          py::gil_scoped_release release;
          const ExperimentReport report = run_risk(cfg);
          write_csv(csv, report);
          summary = summary_json(report);
        }
        return py::make_tuple(csv.str(), json_to_py(summary));
      },
      py::arg("entries"), "Runs a risk sweep from (key, value) config entries; returns (csv_text, summary).");

  m.def(
      "demo_failure",
      [](std::size_t n, Coord J, std::size_t trials, std::uint64_t seed) {
        nlohmann::json out;
        {
          py::gil_scoped_release release;
          out = failure_json(demo_empirical_failure(n, J, trials, seed));
        }
        return json_to_py(out);
      },
      py::arg("n"), py::arg("J"), py::arg("trials"), py::arg("seed") = 0);

  m.def(
      "tree_recovery",
      [](int depth, std::size_t n, std::size_t trials, std::uint64_t seed) {
        TreeRecovery r;
        {
          py::gil_scoped_release release;
          r = tree_recovery(depth, n, trials, seed);
        }
        py::dict out;
        out["depth"] = r.depth;
        out["n"] = r.n;
        out["trials"] = r.trials;
        out["recovered"] = r.recovered;
        out["rejected"] = r.rejected;
        return out;
      },
      py::arg("depth"), py::arg("n"), py::arg("trials"), py::arg("seed") = 0);
}
