#include <doctest.h>

#include <fstream>
#include <unistd.h>

#include "qcond/errors.hpp"
#include "qcond/inference.hpp"
#include "qcond/io.hpp"
#include "qcond/random.hpp"
#include "support.hpp"

using namespace qcond;
using namespace qt;

namespace fs = std::filesystem;

namespace {

const fs::path kData = QCOND_DATA_DIR;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qcond_io_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_text(const std::string& name, const std::string& text) {
  const fs::path p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

const char* kQubit = R"({"schema": "qcond.operator/1", "regions": [{"id": "B", "dim": 2}],
  "causal_class": "acausal", "matrix": [[0.5, 0], [0, 0.5]]})";

}  // namespace

TEST_CASE("shipped operator files") {
  const JointState half = read_joint(kData / "maximally_mixed.json");
  CHECK(half.causal_class.kind == CausalKind::Acausal);
  CHECK(validate(half).passed());
  CHECK(dist(half.op, diag({0.5, 0.5})) == 0.0);

  try {
    read_joint(kData / "bad_trace.json");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("unit trace") != std::string::npos);
  }
  // Without the check the operator still loads.
  CHECK(std::abs(read_joint(kData / "bad_trace.json", false).op.trace().real() - 0.9) < 1e-15);
}

TEST_CASE("parity table file") {
  const HybridState h = read_hybrid(kData / "parity.json");
  REQUIRE(h.classical().size() == 2);
  CHECK(h.classical()[0].id == "X1");
  CHECK(h.classical()[1].id == "X2");
  CHECK(h.system().at(0).id == "Y");
  CHECK(h.system().at(0).classical());
  // (y, x1, x2) = (0,0,0), (0,1,1), (1,0,1), (1,1,0)
  for (int x1 = 0; x1 < 2; ++x1)
    for (int x2 = 0; x2 < 2; ++x2)
      for (int y = 0; y < 2; ++y) {
        const double expect = ((x1 ^ x2) == y) ? 0.25 : 0.0;
        CHECK(h.component(h.flat_index(Assignment{{"X1", x1}, {"X2", x2}}))(y, y).real() == expect);
      }
  const JointState q1 = read_joint(kData / "parity_x1.json");
  CHECK(dist(q1.op, condition(h, {{"X1", 0}}).op.matrix()) == 0.0);
}

TEST_CASE("round trips are bit-exact") {
  RandomSource rng(2024);
  for (int t = 0; t < 30; ++t) {
    const int da = rng.integer(1, 3);
    const int db = rng.integer(1, 4);
    const JointState s = random_density({quantum("A", da), classical("C", db)}, rng);
    const Json j = joint_to_json(s);
    const std::string text = j.dump();
    const JointState back = joint_from_json(Json::parse(text), "", false);
    CHECK(back.op.factors() == s.op.factors());
    CHECK(back.op.matrix() == s.op.matrix());
    CHECK(joint_to_json(back).dump() == text);
  }
  const fs::path p = scratch("rt.json");
  RandomSource r2(7);
  const JointState s = random_density({quantum("B", 3)}, r2);
  save_json(p, joint_to_json(s));
  CHECK(read_joint(p).op.matrix() == s.op.matrix());

  std::vector<Matrix> comps;
  for (int i = 0; i < 3; ++i) comps.push_back(random_density_matrix(2, r2) / 3.0);
  const HybridState h({classical("X", 3)}, {quantum("B", 2)}, comps);
  const HybridState hb = hybrid_from_json(Json::parse(hybrid_to_json(h).dump()));
  for (int i = 0; i < 3; ++i) CHECK(hb.component(i) == h.component(i));
}

TEST_CASE("parse errors are distinct and located") {
  CHECK_NOTHROW(read_joint(write_text("ok.json", kQubit)));

  try {
    read_joint(write_text("syntax.json", "{\"schema\": \"qcond.operator/1\",\n  \"regions\": [,]}"));
    FAIL("expected a parse error");
  } catch (const SchemaError&) {
    FAIL("syntax errors are not schema errors");
  } catch (const ParseError& e) {
    CHECK(e.where().find("syntax.json:2:") != std::string::npos);
  }

  CHECK_THROWS_AS(read_joint(write_text("nomatrix.json", R"({"schema": "qcond.operator/1", "regions": [{"id": "B", "dim": 2}]})")),
                  SchemaError);
  CHECK_THROWS_AS(read_joint(write_text("schema.json", R"({"schema": "qcond.operator/9", "regions": [], "matrix": []})")),
                  SchemaError);
  CHECK_THROWS_AS(joint_from_json(Json::parse(R"({"schema": "qcond.operator/1",
      "regions": [{"id": "B", "dim": 2, "kind": "odd"}], "matrix": [[1, 0], [0, 0]]})")),
                  SchemaError);
  CHECK_THROWS_AS(joint_from_json(Json::parse(R"({"schema": "qcond.operator/1",
      "regions": [{"id": "B", "dim": 2}, {"id": "B", "dim": 2}], "matrix": [[1]]})")),
                  SchemaError);

  try {
    joint_from_json(Json::parse(R"({"schema": "qcond.operator/1", "regions": [{"id": "B", "dim": 3}],
        "matrix": [[1, 0], [0, 0]]})"),
                    "f.json#");
    FAIL("expected a dimension error");
  } catch (const DimensionError& e) {
    CHECK(e.where() == "f.json#/matrix");
  }
  CHECK_THROWS_AS(joint_from_json(Json::parse(R"({"schema": "qcond.operator/1", "regions": [{"id": "B", "dim": 2}],
      "matrix": [[1, 0], [0]]})")),
                  DimensionError);
  try {
    joint_from_json(Json::parse(R"({"schema": "qcond.operator/1", "regions": [{"id": "B", "dim": 2}],
        "matrix": [[1, 0], [0, "x"]]})"));
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.where() == "/matrix/1/1");
  }
  CHECK_THROWS_AS(read_joint(scratch("missing.json")), ParseError);
}

TEST_CASE("causal and hybrid operator files") {
  const Json bell_causal = {{"schema", kOperatorSchema},
                            {"regions", {{{"id", "A"}, {"dim", 2}}, {{"id", "B"}, {"dim", 2}}}},
                            {"causal_class", "causal"},
                            {"transposed", {"A"}},
                            {"matrix", matrix_to_json(phi_plus())}};
  try {
    joint_from_json(bell_causal);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("PPT") != std::string::npos);
  }
  Json no_transposed = bell_causal;
  no_transposed.erase("transposed");
  CHECK_THROWS_AS(joint_from_json(no_transposed), SchemaError);

  Matrix swap = Matrix::Zero(4, 4);
  swap(0, 0) = swap(3, 3) = swap(1, 2) = swap(2, 1) = 0.5;
  Json causal = bell_causal;
  causal["matrix"] = matrix_to_json(swap);
  const JointState c = joint_from_json(causal);
  CHECK(c.causal_class.transposed == std::vector<std::string>{"A"});
  CHECK(joint_to_json(c)["transposed"] == Json({"A"}));

  Matrix coherent = diag({0.25, 0.25, 0.25, 0.25});
  coherent(0, 2) = coherent(2, 0) = 0.1;
  const Json hyb = {{"schema", kOperatorSchema},
                    {"regions", {{{"id", "X"}, {"dim", 2}, {"kind", "classical"}}, {{"id", "B"}, {"dim", 2}}}},
                    {"causal_class", "hybrid"},
                    {"matrix", matrix_to_json(coherent)}};
  CHECK_THROWS_AS(hybrid_from_json(hyb), ValidationError);
  Json quantum_label = hyb;
  quantum_label["regions"][0]["kind"] = "quantum";
  quantum_label["system"] = {"B"};
  CHECK_THROWS_AS(hybrid_from_json(quantum_label), SchemaError);
}

TEST_CASE("ingredient formats") {
  const auto l = likelihood_from_json(Json::parse(R"({"outcome": {"id": "X", "dim": 2}, "system": {"id": "Z", "dim": 2},
      "stochastic": [[0.9, 0.1], [0.2, 0.8]]})"),
                                      "");
  CHECK(l.outcome.classical());
  CHECK(l.system.classical());
  CHECK(l.probability(1, 1) == 0.8);

  const auto basis = likelihood_from_json(Json::parse(R"({"outcome": {"id": "X", "dim": 2}, "system": {"id": "B", "dim": 2},
      "basis": [[0, 1], [1, 0]]})"),
                                          "");
  CHECK(dist(basis.effects[0], diag({0, 1})) == 0.0);
  CHECK_THROWS_AS(likelihood_from_json(Json::parse(R"({"outcome": {"id": "X", "dim": 2}, "system": {"id": "B", "dim": 2},
      "effects": [[[1, 0], [0, 0]], [[0, 0], [0, 0.5]]]})"),
                                       ""),
                  ValidationError);
  CHECK_THROWS_AS(likelihood_from_json(Json::parse(R"({"outcome": {"id": "X", "dim": 2, "kind": "quantum"},
      "system": {"id": "B", "dim": 2}, "basis": [[1, 0], [0, 1]]})"),
                                       ""),
                  SchemaError);

  const auto inst = instrument_from_json(Json::parse(R"({"input": {"id": "A", "dim": 2}, "outcome": {"id": "X", "dim": 2},
      "output": {"id": "B", "dim": 2}, "kraus": [[[[1, 0], [0, 0]]], [[[0, 0], [0, 1]]]]})"),
                                         "");
  CHECK(dist(inst.induced_povm().effects[1], diag({0, 1})) < 1e-15);

  const auto d = distribution_from_json(Json::parse(R"({"region": {"id": "Z", "dim": 3}, "probs": [0.2, 0.3, 0.5]})"), "");
  CHECK(d.region.classical());
  CHECK_THROWS_AS(distribution_from_json(Json::parse(R"({"region": {"id": "Z", "dim": 3}, "probs": [0.2, 0.3]})"), ""),
                  DimensionError);
}

TEST_CASE("scenario specs") {
  const Scenario s = read_scenario(write_text("prep.json", R"({"schema": "qcond.scenario/1", "builder": "preparation",
    "ingredients": {"pz": {"region": {"id": "Z", "dim": 2}, "probs": [0.5, 0.5]},
                    "prep": {"label": {"id": "Z", "dim": 2}, "system": {"id": "B", "dim": 2},
                             "states": [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]}}})"));
  CHECK(s.builder == "preparation");
  CHECK(dist(condition(s.joint, {{"Z", 1}}).op, diag({0, 1})) == 0.0);

  // File references resolve relative to the referring file.
  write_text("half.json", kQubit);
  const Scenario r = read_scenario(write_text("retro.json", R"({"schema": "qcond.scenario/1", "builder": "retrodiction",
    "ingredients": {"rho": {"file": "half.json"},
                    "povm": {"outcome": {"id": "X", "dim": 2}, "system": {"id": "B", "dim": 2},
                             "basis": [[1, 0], [0, 1]]}}})"));
  CHECK(r.joint.probability(0) == doctest::Approx(0.5).epsilon(1e-15));

  const Json built = scenario_to_json(r);
  CHECK(built["provenance"]["builder"] == "retrodiction");
  CHECK(built["provenance"]["digests"].contains("rho"));
  const HybridState again = hybrid_from_json(built);
  CHECK(again.component(1) == r.joint.component(1));

  CHECK_THROWS_AS(read_scenario(write_text("unknown.json", R"({"schema": "qcond.scenario/1", "builder": "magic",
    "ingredients": {}})")),
                  SchemaError);
  CHECK_THROWS_AS(read_scenario(write_text("noingr.json", R"({"schema": "qcond.scenario/1", "builder": "retrodiction",
    "ingredients": {"rho": {"file": "half.json"}}})")),
                  SchemaError);
  CHECK_THROWS_AS(read_scenario(write_text("dangling.json", R"({"schema": "qcond.scenario/1", "builder": "retrodiction",
    "ingredients": {"rho": {"file": "nowhere.json"}, "povm": {}}})")),
                  ParseError);

  // A plain hybrid operator file also reads as a scenario.
  CHECK(read_scenario(kData / "parity.json").builder == "hybrid");
}

TEST_CASE("shipped obstruction specs") {
  for (const char* name : {"prepare_measure.json", "singlet_steering.json"}) {
    const ObstructionSpec spec = read_obstruction(kData / name);
    const Obstruction ob = joint_state_obstruction(spec.first.joint, spec.second.joint);
    CHECK(ob.pairs_checked == 4);
    CHECK(ob.pairs.size() == 4);
    const Json j = obstruction_to_json(ob);
    CHECK(j["obstructed"] == true);
    CHECK(j["pairs"].size() == 4);
  }
  const ObstructionSpec control = read_obstruction(kData / "control.json");
  CHECK(control.second.builder == "postprocess");
  CHECK(control.second.joint.classical().size() == 1);
  CHECK_FALSE(joint_state_obstruction(control.first.joint, control.second.joint).obstructed());
}

TEST_CASE("random states") {
  RandomSource rng(1);
  CHECK(random_density_matrix(1, rng)(0, 0) == Complex(1.0));

  RandomSource a(99), b(99);
  CHECK(random_density_matrix(3, a) == random_density_matrix(3, b));
  CHECK(random_povm(classical("X", 3), quantum("B", 2), a).effects ==
        random_povm(classical("X", 3), quantum("B", 2), b).effects);
  CHECK(a.derive(5).uniform() == b.derive(5).uniform());
  CHECK(a.derive(5).uniform() != a.derive(6).uniform());

  Matrix mean = Matrix::Zero(2, 2);
  RandomSource lln(123);
  for (int i = 0; i < 1000; ++i) mean += random_density_matrix(2, lln);
  mean /= 1000.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(mean - Matrix::Identity(2, 2) / 2.0);
  CHECK(0.5 * es.eigenvalues().cwiseAbs().sum() < 0.05);

  RandomSource g(5);
  for (int t = 0; t < 20; ++t) {
    const int d = g.integer(1, 4);
    CHECK(validate(random_density({quantum("B", d)}, g)).passed());
    const auto povm = random_povm(classical("X", g.integer(1, 4)), quantum("B", d), g);
    CHECK_NOTHROW(povm.check());
    const Channel ch = random_channel(quantum("A", d), quantum("B", g.integer(1, 4)), g);
    CHECK(ch.trace_preservation_error() < 1e-12);
    const auto inst = random_instrument(quantum("A", d), classical("X", 2), quantum("B", 2), g);
    CHECK_NOTHROW(inst.check());
    const auto rank1 = random_density_matrix(d + 1, g, 1);
    CHECK(support(on({quantum("B", d + 1)}, rank1)).rank == 1);
  }
}
