#include "qcond/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace qcond {

namespace fs = std::filesystem;

namespace {

std::string at(const std::string& where, const std::string& key) { return where + "/" + key; }

const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(at(where, key), "required field is missing");
  return *it;
}

std::string string_field(const Json& obj, const char* key, const std::string& where) {
  const Json& v = field(obj, key, where);
  if (!v.is_string()) throw SchemaError(at(where, key), "expected a string");
  return v.get<std::string>();
}

int int_field(const Json& obj, const char* key, const std::string& where) {
  const Json& v = field(obj, key, where);
  if (!v.is_number_integer()) throw SchemaError(at(where, key), "expected an integer");
  return v.get<int>();
}

double number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw SchemaError(where, "expected a number");
  return v.get<double>();
}

std::vector<std::string> string_list(const Json& v, const std::string& where) {
  if (!v.is_array()) throw SchemaError(where, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) throw SchemaError(at(where, std::to_string(i)), "expected a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

void require_schema(const Json& j, const char* schema, const std::string& where, bool optional) {
  if (!j.is_object()) throw SchemaError(where, "expected an object");
  auto it = j.find("schema");
  if (it == j.end()) {
    if (optional) return;
    throw SchemaError(at(where, "schema"), std::string("required field is missing (expected \"") + schema + "\")");
  }
  if (!it->is_string() || it->get<std::string>() != schema) {
    throw SchemaError(at(where, "schema"), std::string("unsupported schema, expected \"") + schema + "\"");
  }
}

std::vector<Region> regions_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw SchemaError(where, "expected a nonempty array of regions");
  std::vector<Region> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(region_from_json(j[i], at(where, std::to_string(i))));
    if (!seen.insert(out.back().id).second) {
      throw SchemaError(at(where, std::to_string(i)), "duplicate region id '" + out.back().id + "'");
    }
  }
  return out;
}

CausalClass causal_from_json(const Json& j, const std::string& where, const std::string& fallback,
                             const std::vector<Region>& regions) {
  const std::string kind = j.contains("causal_class") ? string_field(j, "causal_class", where) : fallback;
  if (kind == "acausal") return CausalClass::acausal();
  if (kind == "hybrid") return CausalClass::hybrid();
  if (kind != "causal") {
    throw SchemaError(at(where, "causal_class"), "expected \"acausal\", \"causal\" or \"hybrid\", got \"" + kind + "\"");
  }
  auto transposed = string_list(field(j, "transposed", where), at(where, "transposed"));
  for (const auto& id : transposed) {
    bool found = false;
    for (const auto& r : regions) found = found || r.id == id;
    if (!found) throw SchemaError(at(where, "transposed"), "unknown region '" + id + "'");
  }
  return CausalClass::causal(std::move(transposed));
}

std::string joined(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : "; ") + x;
  return s;
}

Matrix square_matrix(const Json& j, int dim, const std::string& where) {
  Matrix m = matrix_from_json(j, where);
  if (m.rows() != dim || m.cols() != dim) {
    throw DimensionError(where, "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix, got " +
                                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  return m;
}

std::vector<Matrix> matrix_list(const Json& j, int rows, int cols, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where, "expected an array of matrices");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = at(where, std::to_string(i));
    Matrix m = matrix_from_json(j[i], w);
    if (m.rows() != rows || m.cols() != cols) {
      throw DimensionError(w, "expected a " + std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
    }
    out.push_back(std::move(m));
  }
  return out;
}

Region classical_region_from(const Json& j, const std::string& where) {
  Region r = region_from_json(j, where, RegionKind::Classical);
  if (!r.classical()) throw SchemaError(at(where, "kind"), "this region must be classical");
  return r;
}

// Resolves {"file": "..."} references relative to `base`.
Json resolve(const Json& j, const fs::path& base, fs::path& dir, std::string& where) {
  dir = base;
  if (j.is_object() && j.contains("file") && j.size() == 1) {
    if (!j["file"].is_string()) throw SchemaError(at(where, "file"), "expected a path string");
    const fs::path p = base / j["file"].get<std::string>();
    dir = p.parent_path();
    where = p.string() + "#";
    return load_json(p);
  }
  return j;
}

std::string type_of(const Json& j) {
  if (j.is_object() && j.contains("type") && j["type"].is_string()) return j["type"].get<std::string>();
  return "";
}

}  // namespace

Json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    const auto pos = msg.find("syntax error");
    if (pos != std::string::npos) msg = msg.substr(pos);
    throw ParseError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col), msg);
  }
}

void save_json(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(Json::array({m(i, k).real(), m(i, k).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw SchemaError(where, "expected a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw SchemaError(at(where, "0"), "expected a nonempty row");
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string wr = at(where, std::to_string(i));
    if (!j[i].is_array()) throw SchemaError(wr, "expected a row array");
    if (j[i].size() != cols) {
      throw DimensionError(wr, "row has " + std::to_string(j[i].size()) + " entries, expected " + std::to_string(cols));
    }
    for (std::size_t k = 0; k < cols; ++k) {
      const Json& e = j[i][k];
      const std::string we = at(wr, std::to_string(k));
      if (e.is_number()) {
        m(i, k) = Complex(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2) {
        m(i, k) = Complex(number(e[0], at(we, "0")), number(e[1], at(we, "1")));
      } else {
        throw SchemaError(we, "expected a number or a [re, im] pair");
      }
    }
  }
  return m;
}

Json region_to_json(const Region& r) {
  return Json{{"id", r.id}, {"dim", r.dim}, {"kind", r.classical() ? "classical" : "quantum"}};
}

Region region_from_json(const Json& j, const std::string& where, RegionKind default_kind) {
  Region r;
  r.id = string_field(j, "id", where);
  if (r.id.empty()) throw SchemaError(at(where, "id"), "region id must be nonempty");
  r.dim = int_field(j, "dim", where);
  if (r.dim < 1) throw SchemaError(at(where, "dim"), "dimension must be positive");
  r.kind = default_kind;
  if (j.contains("kind")) {
    const std::string k = string_field(j, "kind", where);
    if (k == "quantum") {
      r.kind = RegionKind::Quantum;
    } else if (k == "classical") {
      r.kind = RegionKind::Classical;
    } else {
      throw SchemaError(at(where, "kind"), "expected \"quantum\" or \"classical\"");
    }
  }
  return r;
}

Json joint_to_json(const JointState& s) {
  Json j;
  j["schema"] = kOperatorSchema;
  Json regions = Json::array();
  for (const auto& f : s.op.factors()) regions.push_back(region_to_json(f));
  j["regions"] = std::move(regions);
  j["causal_class"] = to_string(s.causal_class.kind);
  if (s.causal_class.kind == CausalKind::Causal) j["transposed"] = s.causal_class.transposed;
  j["matrix"] = matrix_to_json(s.op.matrix());
  return j;
}

JointState joint_from_json(const Json& j, const std::string& where, bool check, const Tolerance& tol) {
  require_schema(j, kOperatorSchema, where, type_of(j) == "state");
  const auto regions = regions_from_json(field(j, "regions", where), at(where, "regions"));
  const Matrix m = square_matrix(field(j, "matrix", where), total_dim(regions), at(where, "matrix"));
  JointState s{LabeledOperator(regions, m), causal_from_json(j, where, "acausal", regions)};
  if (check) {
    const ValidationReport rep = validate(s, tol);
    if (!rep.passed()) throw ValidationError((where.empty() ? "" : where + ": ") + joined(rep.failures));
  }
  return s;
}

Json hybrid_to_json(const HybridState& h) {
  Json j = joint_to_json(h.as_joint());
  std::vector<std::string> system;
  for (const auto& r : h.system()) system.push_back(r.id);
  j["system"] = system;
  return j;
}

HybridState hybrid_from_json(const Json& j, const std::string& where, const Tolerance& tol) {
  require_schema(j, kOperatorSchema, where, type_of(j) == "state");
  const auto regions = regions_from_json(field(j, "regions", where), at(where, "regions"));
  const Matrix m = square_matrix(field(j, "matrix", where), total_dim(regions), at(where, "matrix"));
  std::set<std::string> system;
  if (j.contains("system")) {
    for (const auto& id : string_list(j["system"], at(where, "system"))) system.insert(id);
  } else {
    for (const auto& r : regions)
      if (!r.classical()) system.insert(r.id);
  }
  std::vector<std::string> classical_ids;
  for (const auto& r : regions) {
    if (system.count(r.id)) continue;
    if (!r.classical()) throw SchemaError(at(where, "regions"), "region '" + r.id + "' must be classical or in system");
    classical_ids.push_back(r.id);
  }
  for (const auto& id : system) {
    bool found = false;
    for (const auto& r : regions) found = found || r.id == id;
    if (!found) throw SchemaError(at(where, "system"), "unknown region '" + id + "'");
  }
  if (classical_ids.empty()) throw SchemaError(at(where, "regions"), "a hybrid needs at least one classical region");
  if (system.empty()) throw SchemaError(at(where, "system"), "a hybrid needs at least one system region");
  HybridState h;
  try {
    h = HybridState::disassemble(LabeledOperator(regions, m), classical_ids, tol);
    h.check(tol);
  } catch (const ValidationError& e) {
    throw ValidationError((where.empty() ? "" : where + ": ") + e.what());
  }
  return h;
}

Json distribution_to_json(const ClassicalDistribution& d) {
  return Json{{"type", "distribution"}, {"region", region_to_json(d.region)}, {"probs", d.probs}};
}

ClassicalDistribution distribution_from_json(const Json& j, const std::string& where) {
  ClassicalDistribution d{classical_region_from(field(j, "region", where), at(where, "region")), {}};
  const Json& p = field(j, "probs", where);
  if (!p.is_array()) throw SchemaError(at(where, "probs"), "expected an array of numbers");
  for (std::size_t i = 0; i < p.size(); ++i) d.probs.push_back(number(p[i], at(at(where, "probs"), std::to_string(i))));
  if (static_cast<int>(d.probs.size()) != d.region.dim) {
    throw DimensionError(at(where, "probs"), "expected " + std::to_string(d.region.dim) + " probabilities");
  }
  try {
    d.check();
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  return d;
}

EnsemblePreparation ensemble_from_json(const Json& j, const std::string& where) {
  EnsemblePreparation e{classical_region_from(field(j, "label", where), at(where, "label")),
                        region_from_json(field(j, "system", where), at(where, "system")),
                        {}};
  e.states = matrix_list(field(j, "states", where), e.system.dim, e.system.dim, at(where, "states"));
  if (static_cast<int>(e.states.size()) != e.label.dim) {
    throw DimensionError(at(where, "states"), "expected one state per label value");
  }
  try {
    e.check();
  } catch (const ValidationError& ex) {
    throw ValidationError(where + ": " + ex.what());
  }
  return e;
}

Json likelihood_to_json(const LikelihoodOperator& l) {
  Json effects = Json::array();
  for (const auto& e : l.effects) effects.push_back(matrix_to_json(e));
  return Json{{"type", "povm"},
              {"outcome", region_to_json(l.outcome)},
              {"system", region_to_json(l.system)},
              {"effects", std::move(effects)}};
}

LikelihoodOperator likelihood_from_json(const Json& j, const std::string& where) {
  const Region outcome = classical_region_from(field(j, "outcome", where), at(where, "outcome"));
  const bool stochastic = j.is_object() && j.contains("stochastic");
  const Region system = region_from_json(field(j, "system", where), at(where, "system"),
                                         stochastic ? RegionKind::Classical : RegionKind::Quantum);
  LikelihoodOperator l{outcome, system, {}};
  if (j.contains("effects")) {
    l.effects = matrix_list(j["effects"], system.dim, system.dim, at(where, "effects"));
  } else if (j.contains("basis")) {
    const Matrix basis = square_matrix(j["basis"], system.dim, at(where, "basis"));
    if (outcome.dim != system.dim) throw DimensionError(at(where, "outcome"), "a basis needs one outcome per vector");
    l = LikelihoodOperator::projective(outcome, system, basis);
  } else if (stochastic) {
    const Json& rows = j["stochastic"];
    const std::string ws = at(where, "stochastic");
    if (!rows.is_array() || static_cast<int>(rows.size()) != system.dim) {
      throw DimensionError(ws, "expected one row per value of '" + system.id + "'");
    }
    std::vector<std::vector<double>> p;
    for (std::size_t z = 0; z < rows.size(); ++z) {
      const std::string wz = at(ws, std::to_string(z));
      if (!rows[z].is_array() || static_cast<int>(rows[z].size()) != outcome.dim) {
        throw DimensionError(wz, "expected one entry per outcome");
      }
      std::vector<double> row;
      for (std::size_t x = 0; x < rows[z].size(); ++x) row.push_back(number(rows[z][x], at(wz, std::to_string(x))));
      p.push_back(std::move(row));
    }
    l = LikelihoodOperator::classical_channel(outcome, system, p);
  } else {
    throw SchemaError(where, "a POVM needs \"effects\", \"basis\" or \"stochastic\"");
  }
  if (static_cast<int>(l.effects.size()) != outcome.dim) {
    throw DimensionError(at(where, "effects"), "expected one effect per outcome");
  }
  try {
    l.check();
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  return l;
}

Instrument instrument_from_json(const Json& j, const std::string& where) {
  const Region input = region_from_json(field(j, "input", where), at(where, "input"));
  const Region outcome = classical_region_from(field(j, "outcome", where), at(where, "outcome"));
  const Region output = region_from_json(field(j, "output", where), at(where, "output"));
  Instrument inst;
  if (j.contains("kraus")) {
    const Json& k = j["kraus"];
    if (!k.is_array() || static_cast<int>(k.size()) != outcome.dim) {
      throw DimensionError(at(where, "kraus"), "expected one Kraus list per outcome");
    }
    std::vector<std::vector<Matrix>> kraus;
    for (std::size_t x = 0; x < k.size(); ++x) {
      kraus.push_back(matrix_list(k[x], output.dim, input.dim, at(at(where, "kraus"), std::to_string(x))));
    }
    inst = Instrument::from_kraus(input, outcome, output, kraus);
  } else if (j.contains("operations")) {
    const int d = input.dim * output.dim;
    inst = Instrument{input, outcome, output, matrix_list(j["operations"], d, d, at(where, "operations"))};
    if (static_cast<int>(inst.operations.size()) != outcome.dim) {
      throw DimensionError(at(where, "operations"), "expected one operation per outcome");
    }
  } else {
    throw SchemaError(where, "an instrument needs \"kraus\" or \"operations\"");
  }
  try {
    inst.check();
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  return inst;
}

Scenario scenario_from_json(const Json& spec, const fs::path& base_dir, const std::string& where) {
  require_schema(spec, kScenarioSchema, where, false);
  const std::string builder = string_field(spec, "builder", where);
  const Json& ingredients = field(spec, "ingredients", where);
  if (!ingredients.is_object()) throw SchemaError(at(where, "ingredients"), "expected an object");

  struct Resolved {
    Json json;
    fs::path dir;
    std::string where;
  };
  const auto get = [&](const char* role) {
    Resolved r;
    r.where = at(at(where, "ingredients"), role);
    r.json = resolve(field(ingredients, role, at(where, "ingredients")), base_dir, r.dir, r.where);
    return r;
  };
  const auto state = [&](const char* role) {
    const Resolved r = get(role);
    return joint_from_json(r.json, r.where);
  };
  const auto povm = [&](const char* role) {
    const Resolved r = get(role);
    return likelihood_from_json(r.json, r.where);
  };
  const auto dist = [&](const char* role) {
    const Resolved r = get(role);
    return distribution_from_json(r.json, r.where);
  };
  const auto ens = [&](const char* role) {
    const Resolved r = get(role);
    return ensemble_from_json(r.json, r.where);
  };
  const auto inst = [&](const char* role) {
    const Resolved r = get(role);
    return instrument_from_json(r.json, r.where);
  };

  Scenario s;
  if (builder == "hybrid") {
    const Resolved r = get("state");
    const HybridState h = hybrid_from_json(r.json, r.where);
    s = Scenario{h, "hybrid", {{"state", digest(h)}}};
  } else if (builder == "preparation") {
    s = preparation_scenario(dist("pz"), ens("prep"));
  } else if (builder == "remote_measurement") {
    s = remote_measurement_scenario(state("rho"), povm("povm"));
  } else if (builder == "retrodiction") {
    s = retrodiction_scenario(state("rho"), povm("povm"));
  } else if (builder == "instrument") {
    s = instrument_scenario(state("rho"), inst("instrument"));
  } else if (builder == "postprocess") {
    const Resolved b = get("base");
    s = postprocess_scenario(scenario_from_json(b.json, b.dir, b.where), povm("proc"));
  } else if (builder == "two_preparation") {
    s = two_preparation_scenario(dist("pz"), ens("prep"), povm("l1"), povm("l2"));
  } else if (builder == "two_remote") {
    s = two_remote_scenario(state("rho"), povm("l1"), povm("l2"));
  } else if (builder == "two_direct") {
    s = two_direct_scenario(state("rho"), povm("lz"), povm("l1"), povm("l2"));
  } else if (builder == "sequential_measurement") {
    s = sequential_measurement_scenario(state("rho"), inst("inst1"), inst("inst2"));
  } else {
    throw SchemaError(at(where, "builder"), "unknown builder '" + builder + "'");
  }

  if (spec.contains("params")) {
    const Json& params = spec["params"];
    if (!params.is_object()) throw SchemaError(at(where, "params"), "expected an object");
    if (params.contains("marginalize_to")) {
      const auto keep = string_list(params["marginalize_to"], at(at(where, "params"), "marginalize_to"));
      s.joint = s.joint.marginalize(keep);
    }
  }
  return s;
}

Json scenario_to_json(const Scenario& s) {
  Json j = hybrid_to_json(s.joint);
  j["provenance"] = Json{{"builder", s.builder}, {"digests", s.digests}};
  return j;
}

ObstructionSpec obstruction_from_json(const Json& spec, const fs::path& base_dir) {
  require_schema(spec, kObstructionSchema, "", false);
  ObstructionSpec out;
  for (const char* role : {"first", "second"}) {
    std::string where = std::string("/") + role;
    fs::path dir;
    const Json j = resolve(field(spec, role, ""), base_dir, dir, where);
    (std::string(role) == "first" ? out.first : out.second) = scenario_from_json(j, dir, where);
  }
  return out;
}

Json obstruction_to_json(const Obstruction& ob) {
  Json pairs = Json::array();
  for (const auto& p : ob.pairs) {
    pairs.push_back(Json{{ob.x1, p.x1}, {ob.x2, p.x2}, {"p_" + ob.x1, p.p1}, {"p_" + ob.x2, p.p2}});
  }
  return Json{{"x1", ob.x1},
              {"x2", ob.x2},
              {"pairs_checked", ob.pairs_checked},
              {"obstructed", ob.obstructed()},
              {"pairs", std::move(pairs)}};
}

JointState read_joint(const fs::path& path, bool check, const Tolerance& tol) {
  return joint_from_json(load_json(path), path.string() + "#", check, tol);
}

HybridState read_hybrid(const fs::path& path, const Tolerance& tol) {
  const Json j = load_json(path);
  if (j.is_object() && j.value("schema", "") == kScenarioSchema) {
    return scenario_from_json(j, path.parent_path(), path.string() + "#").joint;
  }
  return hybrid_from_json(j, path.string() + "#", tol);
}

Scenario read_scenario(const fs::path& path) {
  const Json j = load_json(path);
  if (j.is_object() && j.value("schema", "") == kOperatorSchema) {
    const HybridState h = hybrid_from_json(j, path.string() + "#");
    return Scenario{h, "hybrid", {{"state", digest(h)}}};
  }
  return scenario_from_json(j, path.parent_path(), path.string() + "#");
}

ObstructionSpec read_obstruction(const fs::path& path) {
  return obstruction_from_json(load_json(path), path.parent_path());
}

}  // namespace qcond
