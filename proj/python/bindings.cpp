// Python module `qcond`: a thin layer over the C++ library. Matrices cross
// as complex numpy arrays; regions, states and reports as small classes.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qcond/errors.hpp"
#include "qcond/inference.hpp"
#include "qcond/io.hpp"
#include "qcond/random.hpp"
#include "qcond/scenarios.hpp"
#include "qcond/suites.hpp"

namespace py = pybind11;
using namespace qcond;

namespace {

JointState make_state(std::vector<Region> regions, const Matrix& m, bool check) {
  JointState s{LabeledOperator(std::move(regions), m), CausalClass::acausal()};
  if (check) {
    const auto report = validate(s);
    if (!report.passed()) {
      std::string what;
      for (const auto& f : report.failures) what += (what.empty() ? "" : "; ") + f;
      throw ValidationError("state: " + what);
    }
  }
  return s;
}

}  // namespace

PYBIND11_MODULE(qcond, m) {
  m.doc() = "Conditional states, compatibility, sufficiency and pooling for quantum Bayesian inference";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<RegionError>(m, "RegionError", error);
  auto precondition = py::register_exception<PreconditionError>(m, "PreconditionError", error);
  py::register_exception<UndefinedBranch>(m, "UndefinedBranch", precondition);
  py::register_exception<ValidityRegimeError>(m, "ValidityRegimeError", precondition);
  py::register_exception<IncompatibleError>(m, "IncompatibleError", error);
  auto parse = py::register_exception<ParseError>(m, "ParseError", error);
  py::register_exception<SchemaError>(m, "SchemaError", parse);
  py::register_exception<DimensionError>(m, "DimensionError", parse);
  py::register_exception<ValidationError>(m, "ValidationError", error);

  py::class_<Region>(m, "Region")
      .def_readonly("id", &Region::id)
      .def_readonly("dim", &Region::dim)
      .def_property_readonly("classical", &Region::classical)
      .def("__eq__", [](const Region& a, const Region& b) { return a == b; })
      .def("__repr__", [](const Region& r) {
        return std::string(r.classical() ? "classical" : "quantum") + "('" + r.id + "', " + std::to_string(r.dim) + ")";
      });
  m.def("quantum", &quantum, py::arg("id"), py::arg("dim"));
  m.def("classical", &classical, py::arg("id"), py::arg("dim"));

  py::class_<LabeledOperator>(m, "Operator")
      .def(py::init<std::vector<Region>, Matrix>(), py::arg("regions"), py::arg("matrix"))
      .def_property_readonly("regions", &LabeledOperator::factors)
      .def_property_readonly("matrix", &LabeledOperator::matrix)
      .def_property_readonly("ids", &LabeledOperator::ids)
      .def("trace", &LabeledOperator::trace);

  py::class_<JointState>(m, "State")
      .def_readonly("op", &JointState::op)
      .def_property_readonly("matrix", [](const JointState& s) { return s.op.matrix(); })
      .def_property_readonly("regions", [](const JointState& s) { return s.op.factors(); });
  m.def("state", &make_state, py::arg("regions"), py::arg("matrix"), py::arg("check") = true,
        "A (by default validated) density operator on the given regions");

  py::class_<ConditionalState>(m, "Conditional")
      .def_readonly("op", &ConditionalState::op)
      .def_readonly("conditioned", &ConditionalState::conditioned)
      .def_readonly("conditioning", &ConditionalState::conditioning)
      .def_property_readonly("matrix", [](const ConditionalState& c) { return c.op.matrix(); });

  py::class_<HybridState>(m, "Hybrid")
      .def(py::init<std::vector<Region>, std::vector<Region>, std::vector<Matrix>>(), py::arg("classical"),
           py::arg("system"), py::arg("components"))
      .def_property_readonly("classical", &HybridState::classical)
      .def_property_readonly("system", &HybridState::system)
      .def_property_readonly("components", &HybridState::components)
      .def("probability", [](const HybridState& h, const Assignment& a) { return h.probability(h.flat_index(a)); })
      .def("system_marginal", &HybridState::system_marginal)
      .def("marginalize", &HybridState::marginalize, py::arg("keep"))
      .def("as_state", &HybridState::as_joint);

  m.def("tensor", &tensor);
  m.def("partial_trace", &partial_trace, py::arg("op"), py::arg("over"));
  m.def("partial_transpose", &partial_transpose, py::arg("op"), py::arg("over"));
  m.def("star_product", [](const LabeledOperator& a, const LabeledOperator& b) { return star_product(a, b); });
  m.def("entropy", [](const JointState& s) { return von_neumann_entropy(s.op); }, "von Neumann entropy in bits");

  m.def("conditional_from_joint",
        [](const JointState& j, const std::set<std::string>& given) { return conditional_from_joint(j, given); },
        py::arg("joint"), py::arg("given"));
  m.def("joint_from_conditional",
        [](const ConditionalState& c, const JointState& marg) { return joint_from_conditional(c, marg); });
  m.def("belief_propagate", [](const ConditionalState& c, const JointState& a) { return belief_propagate(c, a); });
  m.def("bayes_invert", [](const ConditionalState& c, const JointState& a) { return bayes_invert(c, a); });
  m.def("condition", [](const HybridState& h, const Assignment& a) { return condition(h, a); }, py::arg("hybrid"),
        py::arg("values"));

  py::class_<CompatibilityVerdict>(m, "CompatibilityVerdict")
      .def_readonly("compatible", &CompatibilityVerdict::compatible)
      .def_property_readonly("intersection_rank", [](const CompatibilityVerdict& v) { return v.intersection.rank; })
      .def_property_readonly("intersection_projector",
                             [](const CompatibilityVerdict& v) { return v.intersection.projector.matrix(); })
      .def("__bool__", [](const CompatibilityVerdict& v) { return v.compatible; });
  m.def("compatible", [](const JointState& a, const JointState& b) { return bfm_compatible(a, b); });

  py::class_<ObjectiveWitness>(m, "ObjectiveWitness")
      .def_readonly("joint", &ObjectiveWitness::joint)
      .def_readonly("outcomes", &ObjectiveWitness::outcomes);
  m.def("objective_witness", [](const JointState& a, const JointState& b) { return objective_witness(a, b); });

  py::class_<SubjectiveWitness>(m, "SubjectiveWitness")
      .def_property_readonly("effects", [](const SubjectiveWitness& w) { return w.likelihood.effects; })
      .def_readonly("outcome", &SubjectiveWitness::outcome)
      .def_readonly("psi", &SubjectiveWitness::psi);
  m.def("subjective_witness", [](const JointState& a, const JointState& b) { return subjective_witness(a, b); });

  m.def("cmi",
        [](const JointState& rho, const RegionSet& a, const RegionSet& b, const RegionSet& c) {
          return conditional_mutual_information(rho, a, b, c);
        },
        py::arg("rho"), py::arg("a"), py::arg("b"), py::arg("c"), "I(A:B|C) in bits");

  py::class_<StatisticMap>(m, "Statistic")
      .def_readonly("cell_of_value", &StatisticMap::cell_of_value)
      .def_readonly("cells", &StatisticMap::cells)
      .def_property_readonly("cell_count", &StatisticMap::cell_count);
  m.def("sufficient_statistic",
        [](const HybridState& h, const std::string& var) { return minimal_sufficient_statistic(h, var); });

  m.def("pool_linear",
        [](const std::vector<JointState>& states, std::vector<double> w) {
          return pool_linear(states, PoolWeights{std::move(w), std::nullopt});
        },
        py::arg("states"), py::arg("weights"));
  m.def("pool_multiplicative",
        [](const JointState& a, const JointState& b, const JointState& prior, bool herm) {
          return pool_multiplicative(a, b, prior, {}, herm);
        },
        py::arg("s1"), py::arg("s2"), py::arg("prior"), py::arg("hermitian_part") = false);
  m.def("pool_supra", [](const HybridState& h, const Assignment& values) { return pool_supra(h, values); });
  m.def("check_pool_condition", [](const HybridState& h, const std::string& x1, const std::string& x2,
                                   double tol) { return check_pool_condition(h, x1, x2, tol); },
        py::arg("scenario"), py::arg("x1"), py::arg("x2"), py::arg("tol") = 1e-9);

  py::class_<Obstruction>(m, "Obstruction")
      .def_readonly("pairs_checked", &Obstruction::pairs_checked)
      .def_property_readonly("pairs",
                             [](const Obstruction& o) {
                               std::vector<std::pair<int, int>> out;
                               for (const auto& p : o.pairs) out.emplace_back(p.x1, p.x2);
                               return out;
                             })
      .def_property_readonly("obstructed", &Obstruction::obstructed);
  m.def("obstruction", [](const HybridState& a, const HybridState& b) { return joint_state_obstruction(a, b); });

  m.def("read_state", [](const std::filesystem::path& p) { return read_joint(p); });
  m.def("read_hybrid", [](const std::filesystem::path& p) { return read_hybrid(p); });
  m.def("read_obstruction", [](const std::filesystem::path& p) {
    ObstructionSpec s = read_obstruction(p);
    return std::make_pair(std::move(s.first.joint), std::move(s.second.joint));
  });

  m.def("random_density",
        [](int dim, std::uint64_t seed, int rank) {
          RandomSource rng(seed);
          return random_density_matrix(dim, rng, rank);
        },
        py::arg("dim"), py::arg("seed"), py::arg("rank") = 0);

  py::class_<SuiteReport>(m, "SuiteReport")
      .def_readonly("suite", &SuiteReport::suite)
      .def_readonly("seed", &SuiteReport::seed)
      .def_readonly("trials", &SuiteReport::trials)
      .def_readonly("notes", &SuiteReport::notes)
      .def_property_readonly("passed", &SuiteReport::passed)
      .def_property_readonly("metrics", [](const SuiteReport& r) {
        py::dict d;
        for (const auto& x : r.metrics) d[py::str(x.name)] = py::make_tuple(x.max_deviation, x.threshold);
        return d;
      });
  m.def("suite_names", &suite_names);
  m.def(
      "run_suite",
      [](const std::string& name, std::uint64_t seed, int trials, std::vector<int> dims) {
        return run_suite(name, SuiteOptions{seed, trials, std::move(dims)});
      },
      py::arg("name"), py::arg("seed") = 42, py::arg("trials") = 0, py::arg("dims") = std::vector<int>{});
}
