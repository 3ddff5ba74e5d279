#pragma once

// JSON file formats for operators, hybrids, scenario specs and obstruction
// specs.
//
// Operator file:
//   {"schema": "qcond.operator/1",
//    "regions": [{"id": "A", "dim": 2, "kind": "quantum"}, ...],
//    "causal_class": "acausal" | "causal" | "hybrid",
//    "transposed": ["A"],          causal only
//    "system": ["B"],              hybrids only; defaults to quantum regions
//    "matrix": [[[re, im], ...], ...]}
// The matrix is row-major over the product basis of `regions` in the order
// listed. Entries may also be plain reals. Numbers are written in the
// shortest form that parses back to the same double.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcond/conditional.hpp"
#include "qcond/hybrid.hpp"
#include "qcond/operator.hpp"
#include "qcond/scenarios.hpp"

namespace qcond {

using Json = nlohmann::json;

inline constexpr const char* kOperatorSchema = "qcond.operator/1";
inline constexpr const char* kScenarioSchema = "qcond.scenario/1";
inline constexpr const char* kObstructionSchema = "qcond.obstruction/1";

// Reads and parses a JSON file; syntax errors carry "path:line:column".
Json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const Json& j);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& where);
Json region_to_json(const Region& r);
Region region_from_json(const Json& j, const std::string& where, RegionKind default_kind = RegionKind::Quantum);

Json joint_to_json(const JointState& s);
// Throws SchemaError, DimensionError, or (when `check` is set) a
// ValidationError listing the failed invariants.
JointState joint_from_json(const Json& j, const std::string& where = "", bool check = true,
                           const Tolerance& tol = {});

Json hybrid_to_json(const HybridState& h);
HybridState hybrid_from_json(const Json& j, const std::string& where = "", const Tolerance& tol = {});

Json distribution_to_json(const ClassicalDistribution& d);
ClassicalDistribution distribution_from_json(const Json& j, const std::string& where);
EnsemblePreparation ensemble_from_json(const Json& j, const std::string& where);
// "effects": [M...], or "basis": M (projective on its columns), or
// "stochastic": [[P(x|z) for x] for z] on a classical system.
LikelihoodOperator likelihood_from_json(const Json& j, const std::string& where);
Json likelihood_to_json(const LikelihoodOperator& l);
// "kraus": [[K...] per outcome] or "operations": [M...].
Instrument instrument_from_json(const Json& j, const std::string& where);

// Scenario spec:
//   {"schema": "qcond.scenario/1", "builder": "<name>",
//    "ingredients": {"<role>": <object> | {"file": "relative/path.json"}},
//    "params": {"marginalize_to": ["X1"]}}
// Builders: hybrid (ingredient "state"), preparation (pz, prep),
// remote_measurement (rho, povm), retrodiction (rho, povm), instrument
// (rho, instrument), postprocess (base, proc), two_preparation (pz, prep,
// l1, l2), two_remote (rho, l1, l2), two_direct (rho, lz, l1, l2),
// sequential_measurement (rho, inst1, inst2).
Scenario scenario_from_json(const Json& spec, const std::filesystem::path& base_dir, const std::string& where = "");
Json scenario_to_json(const Scenario& s);

struct ObstructionSpec {
  Scenario first;
  Scenario second;
};
// {"schema": "qcond.obstruction/1", "first": <scenario spec>, "second": ...}
ObstructionSpec obstruction_from_json(const Json& spec, const std::filesystem::path& base_dir);
Json obstruction_to_json(const Obstruction& ob);

// File helpers: the base directory for relative references is the file's
// own directory.
JointState read_joint(const std::filesystem::path& path, bool check = true, const Tolerance& tol = {});
HybridState read_hybrid(const std::filesystem::path& path, const Tolerance& tol = {});
Scenario read_scenario(const std::filesystem::path& path);
ObstructionSpec read_obstruction(const std::filesystem::path& path);

}  // namespace qcond
