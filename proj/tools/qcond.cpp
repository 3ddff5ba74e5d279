// qcond: command-line front end for the qcond library.
//
// Every command parses its inputs, makes one library call, prints a short
// report on stdout and, with -o, writes the result as JSON.
//
// Exit codes:
//   0  success
//   1  internal error
//   2  usage error
//   3  invalid input (unreadable file, schema, dimension or invariant failure)
//   4  precondition failure (undefined branch, validity regime, ...)
//   10 negative verdict (incompatible states, obstructed scenario)
//   11 a `check` suite failed

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qcond/inference.hpp"
#include "qcond/io.hpp"
#include "qcond/suites.hpp"

using namespace qcond;

namespace {

enum Exit {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kInvalidInput = 3,
  kPrecondition = 4,
  kNegative = 10,
  kSuiteFailed = 11,
};

struct Options {
  std::string output;
  std::optional<double> eig_cut;
  std::optional<double> eq_tol;

  Tolerance tolerance() const {
    Tolerance t = Tolerance::from_env();
    if (eig_cut) t.eig_cut = *eig_cut;
    if (eq_tol) t.eq_tol = *eq_tol;
    t.check();
    return t;
  }
};

std::set<std::string> id_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

std::string id_list(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
  return s.empty() ? "(none)" : s;
}


Assignment parse_values(const std::vector<std::string>& items) {
  Assignment a;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw CLI::ValidationError("--value", "expected VAR=VALUE, got '" + item + "'");
    }
    const std::string var = item.substr(0, eq);
    int value = 0;
    try {
      std::size_t used = 0;
      value = std::stoi(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw CLI::ValidationError("--value", "value of '" + var + "' is not an integer");
    }
    if (!a.emplace(var, value).second) throw CLI::ValidationError("--value", "'" + var + "' given twice");
  }
  return a;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void print_matrix(const LabeledOperator& op) {
  std::vector<std::string> ids;
  for (const auto& r : op.factors()) ids.push_back(r.id + "(" + std::to_string(r.dim) + ")");
  std::cout << "  regions: " << id_list(ids) << "\n";
  const Matrix& m = op.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::cout << "  ";
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      const Complex z = m(i, k);
      std::string cell = fmt(z.real());
      if (std::abs(z.imag()) > 0.0) cell += (z.imag() < 0 ? "-" : "+") + fmt(std::abs(z.imag())) + "i";
      std::cout << (k ? "  " : "") << cell;
    }
    std::cout << "\n";
  }
}

Json assignment_json(const Assignment& a) {
  Json j = Json::object();
  for (const auto& [k, v] : a) j[k] = v;
  return j;
}

// ---- commands --------------------------------------------------------------

struct ConditionArgs {
  std::string file;
  std::vector<std::string> given;
  std::vector<std::string> values;
};

int run_condition(const ConditionArgs& a, const Tolerance& tol, Json& out) {
  if (!a.values.empty()) {
    if (!a.given.empty()) throw CLI::ValidationError("--given", "use either --given or --value");
    const HybridState h = read_hybrid(a.file, tol);
    const Assignment values = parse_values(a.values);
    const JointState s = condition(h, values, tol);
    const HybridState m = h.marginalize([&] {
      std::vector<std::string> keep;
      for (const auto& [k, v] : values) keep.push_back(k);
      return keep;
    }());
    Assignment full = values;
    const double p = m.probability(m.flat_index(full));
    std::cout << "conditional state given " << assignment_json(values).dump() << " (probability " << fmt(p)
              << ")\n";
    print_matrix(s.op);
    out = Json{{"values", assignment_json(values)}, {"probability", p}, {"state", joint_to_json(s)}};
    return kOk;
  }
  if (a.given.empty()) throw CLI::ValidationError("--given", "name the conditioning regions or use --value");
  const JointState j = read_joint(a.file, true, tol);
  const ConditionalState c = conditional_from_joint(j, id_set(a.given), tol);
  std::cout << "conditional state of " << id_list(c.conditioned) << " given " << id_list(c.conditioning) << " ("
            << to_string(c.causal_class.kind) << ")\n";
  print_matrix(c.op);
  Json op = joint_to_json(JointState{c.op, c.causal_class});
  op["conditioned"] = c.conditioned;
  op["conditioning"] = c.conditioning;
  out = Json{{"conditional", op}, {"normalization_error", normalization_error(c, tol)}};
  std::cout << "  normalization error: " << fmt(out["normalization_error"].get<double>()) << "\n";
  return kOk;
}

struct CompatArgs {
  std::string first;
  std::string second;
  std::string witness;
};

int run_compat(const CompatArgs& a, const Tolerance& tol, Json& out) {
  const JointState s1 = read_joint(a.first, true, tol);
  const JointState s2 = read_joint(a.second, true, tol);
  const CompatibilityVerdict v = bfm_compatible(s1, s2, tol);
  std::cout << (v.compatible ? "compatible" : "incompatible") << ": support intersection has rank "
            << v.intersection.rank << "\n";
  out = Json{{"compatible", v.compatible},
             {"intersection_rank", v.intersection.rank},
             {"intersection_projector", matrix_to_json(v.intersection.projector.matrix())}};
  if (!v.compatible) return kNegative;
  if (a.witness == "objective") {
    const ObjectiveWitness w = objective_witness(s1, s2, tol);
    std::cout << "objective witness: p1 = " << fmt(w.p1) << ", p2 = " << fmt(w.p2) << "\n";
    print_matrix(w.joint.assemble());
    out["witness"] = Json{{"kind", "objective"},
                          {"joint", hybrid_to_json(w.joint)},
                          {"outcomes", assignment_json(w.outcomes)},
                          {"p1", w.p1},
                          {"p2", w.p2},
                          {"mu", matrix_to_json(w.mu.matrix())},
                          {"eta1", matrix_to_json(w.eta1.matrix())},
                          {"eta2", matrix_to_json(w.eta2.matrix())},
                          {"nu", matrix_to_json(w.nu.matrix())}};
  } else if (a.witness == "subjective") {
    const SubjectiveWitness w = subjective_witness(s1, s2, tol);
    std::cout << "subjective witness: both agents reach this posterior on outcome " << w.outcome << "\n";
    print_matrix(w.posterior);
    out["witness"] = Json{{"kind", "subjective"},
                          {"likelihood", likelihood_to_json(w.likelihood)},
                          {"outcome", w.outcome},
                          {"posterior", matrix_to_json(w.posterior.matrix())}};
  }
  return kOk;
}

struct EntropyArgs {
  std::string file;
  std::vector<std::string> regions;
};

int run_entropy(const EntropyArgs& a, const Tolerance& tol, Json& out) {
  const JointState j = read_joint(a.file, true, tol);
  const LabeledOperator rho = a.regions.empty() ? j.op : reduce_to(j.op, id_set(a.regions));
  const double s = von_neumann_entropy(rho, tol);
  std::cout << "S(" << id_list(rho.ids()) << ") = " << fmt(s) << " bits\n";
  out = Json{{"regions", rho.ids()}, {"entropy_bits", s}};
  return kOk;
}

struct CmiArgs {
  std::string file;
  std::vector<std::string> a, b, c;
  double ci_tol = 1e-9;
};

int run_cmi(const CmiArgs& a, const Tolerance& tol, Json& out) {
  const JointState j = read_joint(a.file, true, tol);
  const CIReport r = conditional_independence_report(j, id_set(a.a), id_set(a.b), id_set(a.c), tol);
  const bool ci = r.cmi <= a.ci_tol;
  std::cout << "I(" << id_list(a.a) << " : " << id_list(a.b) << " | " << id_list(a.c) << ") = " << fmt(r.cmi)
            << " bits\n"
            << "  conditional form deviations: " << fmt(r.conditional_form_a) << ", " << fmt(r.conditional_form_b)
            << "\n  product form deviation: " << fmt(r.product_form) << "\n"
            << (ci ? "  conditionally independent\n" : "  not conditionally independent\n");
  out = Json{{"cmi_bits", r.cmi},
             {"conditional_form_a", r.conditional_form_a},
             {"conditional_form_b", r.conditional_form_b},
             {"product_form", r.product_form},
             {"conditionally_independent", ci}};
  return kOk;
}

Json statistic_json(const StatisticMap& t) {
  Json reps = Json::array();
  for (const auto& r : t.representatives) reps.push_back(matrix_to_json(r.matrix()));
  Json cells = Json::array();
  for (int v : t.cell_of_value) cells.push_back(v == StatisticMap::kUndefined ? Json(nullptr) : Json(v));
  return Json{{"variable", t.variable}, {"cell_of_value", cells}, {"cells", t.cells}, {"representatives", reps}};
}

struct SuffstatArgs {
  std::string file;
  std::string variable;
};

int run_suffstat(const SuffstatArgs& a, const Tolerance& tol, Json& out) {
  const HybridState h = read_hybrid(a.file, tol);
  const StatisticMap t = minimal_sufficient_statistic(h, a.variable, tol);
  std::cout << "minimal sufficient statistic of " << t.variable << ": " << t.cell_count() << " cell(s)\n";
  for (int c = 0; c < t.cell_count(); ++c) {
    std::cout << "  cell " << c << ": values";
    for (int v : t.cells[c]) std::cout << " " << v;
    std::cout << "\n";
  }
  for (std::size_t v = 0; v < t.cell_of_value.size(); ++v) {
    if (t.cell_of_value[v] == StatisticMap::kUndefined) std::cout << "  value " << v << ": zero probability\n";
  }
  out = statistic_json(t);
  return kOk;
}

struct ImproveArgs {
  std::string scenario;
  std::string prior;
  std::string likelihood;
  std::optional<int> report;
  std::string announced;
  std::string variable;
};

int run_improve(const ImproveArgs& a, const Tolerance& tol, Json& out) {
  JointState s;
  if (!a.likelihood.empty()) {
    if (a.prior.empty() || !a.report) throw CLI::ValidationError("--likelihood", "needs --prior and --report");
    const JointState prior = read_joint(a.prior, true, tol);
    const LikelihoodOperator l = likelihood_from_json(load_json(a.likelihood), a.likelihood + "#");
    s = improve_supra(prior, l, *a.report, tol);
    std::cout << "improved state after report " << *a.report << "\n";
  } else {
    if (a.scenario.empty() || a.announced.empty()) {
      throw CLI::ValidationError("improve", "give --likelihood/--prior/--report or SCENARIO --announced");
    }
    const HybridState h = read_hybrid(a.scenario, tol);
    const JointState announced = read_joint(a.announced, true, tol);
    s = improve_shared_prior(h, announced, a.variable, tol);
    std::cout << "improved state (shared prior)\n";
  }
  print_matrix(s.op);
  out = Json{{"state", joint_to_json(s)}};
  return kOk;
}

struct PoolArgs {
  std::string rule = "linear";
  std::vector<std::string> inputs;
  std::vector<double> weights;
  std::string prior;
  bool hermitian_part = false;
  std::vector<std::string> values;
  double condition_tol = 1e-9;
};

int run_pool(const PoolArgs& a, const Tolerance& tol, Json& out) {
  JointState s;
  if (a.rule == "linear") {
    std::vector<JointState> states;
    for (const auto& f : a.inputs) states.push_back(read_joint(f, true, tol));
    std::vector<double> w = a.weights;
    if (w.empty()) w.assign(states.size(), 1.0 / static_cast<double>(states.size()));
    s = pool_linear(states, PoolWeights{w, std::nullopt}, tol);
    out["weights"] = w;
  } else if (a.rule == "multiplicative") {
    if (a.inputs.size() != 2) throw CLI::ValidationError("pool", "the multiplicative pool takes two states");
    const JointState s1 = read_joint(a.inputs[0], true, tol);
    const JointState s2 = read_joint(a.inputs[1], true, tol);
    JointState prior;
    if (a.prior.empty() || a.prior == "uniform") {
      const LabeledOperator id = LabeledOperator::identity(s1.op.factors());
      prior = JointState{id * Complex(1.0 / id.dim()), CausalClass::acausal()};
    } else {
      prior = read_joint(a.prior, true, tol);
    }
    const double asym = pool_asymmetry(s1, s2, prior, tol);
    s = pool_multiplicative(s1, s2, prior, tol, a.hermitian_part);
    out["asymmetry"] = asym;
    std::cout << "asymmetry of s1 prior^-1 s2: " << fmt(asym) << "\n";
  } else if (a.rule == "supra") {
    if (a.inputs.size() != 1) throw CLI::ValidationError("pool", "the supra pool takes one scenario");
    const HybridState h = read_hybrid(a.inputs[0], tol);
    const Assignment values = parse_values(a.values);
    s = pool_supra(h, values, tol);
    out["values"] = assignment_json(values);
    if (values.size() == 2) {
      const PoolConditionReport rep =
          pool_condition_report(h, values.begin()->first, std::next(values.begin())->first, a.condition_tol, tol);
      std::cout << "pooling condition " << (rep.holds ? "holds" : "fails") << " (product error "
                << fmt(rep.product_error) << ", commutator " << fmt(rep.commutator) << ")\n";
      out["pool_condition"] =
          Json{{"holds", rep.holds}, {"product_error", rep.product_error}, {"commutator", rep.commutator}};
    }
  } else {
    throw CLI::ValidationError("--rule", "expected linear, multiplicative or supra");
  }
  std::cout << a.rule << " pool:\n";
  print_matrix(s.op);
  out["rule"] = a.rule;
  out["state"] = joint_to_json(s);
  return kOk;
}

struct ScenarioArgs {
  std::string file;
};

int run_scenario_build(const ScenarioArgs& a, const Tolerance& tol, Json& out) {
  const Scenario s = read_scenario(a.file);
  s.joint.check(tol);
  std::vector<std::string> classical;
  for (const auto& r : s.joint.classical()) classical.push_back(r.id);
  std::vector<std::string> system;
  for (const auto& r : s.joint.system()) system.push_back(r.id);
  std::cout << "built '" << s.builder << "' scenario: classical " << id_list(classical) << ", system "
            << id_list(system) << ", digest " << digest(s.joint) << "\n";
  out = scenario_to_json(s);
  return kOk;
}

int run_scenario_obstruct(const ScenarioArgs& a, const Tolerance& tol, Json& out) {
  const ObstructionSpec spec = read_obstruction(a.file);
  const Obstruction ob = joint_state_obstruction(spec.first.joint, spec.second.joint, tol);
  std::cout << (ob.obstructed() ? "obstructed" : "not obstructed") << ": " << ob.pairs.size() << " of "
            << ob.pairs_checked << " outcome pair(s) admit no joint state\n";
  for (const auto& p : ob.pairs) {
    std::cout << "  " << ob.x1 << "=" << p.x1 << ", " << ob.x2 << "=" << p.x2 << "\n";
  }
  out = obstruction_to_json(ob);
  return ob.obstructed() ? kNegative : kOk;
}

struct CheckArgs {
  std::string suite;
  std::uint64_t seed = 42;
  int trials = 0;
  std::vector<int> dims;
};

int run_check(const CheckArgs& a, Json& out) {
  const SuiteReport r = run_suite(a.suite, SuiteOptions{a.seed, a.trials, a.dims});
  std::cout << r.suite << " (seed " << r.seed << ", " << r.trials << " trials, " << fmt(r.seconds) << " s): "
            << (r.passed() ? "all pass" : "FAILED") << "\n";
  Json metrics = Json::array();
  for (const auto& m : r.metrics) {
    std::cout << "  " << (m.ok() ? "ok  " : "FAIL") << " " << m.name << ": max deviation " << fmt(m.max_deviation)
              << " (threshold " << fmt(m.threshold) << ")\n";
    metrics.push_back(
        Json{{"name", m.name}, {"max_deviation", m.max_deviation}, {"threshold", m.threshold}, {"ok", m.ok()}});
  }
  for (const auto& n : r.notes) std::cout << "  note: " << n << "\n";
  out = Json{{"suite", r.suite},    {"seed", r.seed},       {"trials", r.trials},
             {"passed", r.passed()}, {"metrics", metrics}, {"notes", r.notes}};
  return r.passed() ? kOk : kSuiteFailed;
}

int report_error(const char* kind, const std::exception& e, int code) {
  std::cerr << "qcond: " << kind << ": " << e.what() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional-state algebra, compatibility, sufficiency and pooling"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("-o,--output", opt.output, "Write the result as JSON to this file");
  app.add_option("--eig-cut", opt.eig_cut, "Relative eigenvalue cut (default 1e-10, env QCOND_EIG_CUT)");
  app.add_option("--eq-tol", opt.eq_tol, "State equality tolerance (default 1e-9, env QCOND_EQ_TOL)");

  ConditionArgs cond;
  auto* c_cond = app.add_subcommand("condition", "Conditional state from a joint state or hybrid");
  c_cond->add_option("file", cond.file, "Operator file")->required();
  c_cond->add_option("--given", cond.given, "Conditioning regions")->delimiter(',');
  c_cond->add_option("--value", cond.values, "Classical value VAR=VALUE (hybrid inputs)");

  CompatArgs compat;
  auto* c_compat = app.add_subcommand("compat", "Compatibility of two states");
  c_compat->add_option("first", compat.first)->required();
  c_compat->add_option("second", compat.second)->required();
  c_compat->add_option("--witness", compat.witness, "Construct a witness")
      ->check(CLI::IsMember({"objective", "subjective"}));

  EntropyArgs ent;
  auto* c_ent = app.add_subcommand("entropy", "Von Neumann entropy in bits");
  c_ent->add_option("file", ent.file)->required();
  c_ent->add_option("--regions", ent.regions, "Reduce to these regions first")->delimiter(',');

  CmiArgs cmi;
  auto* c_cmi = app.add_subcommand("cmi", "Conditional mutual information I(A:B|C)");
  c_cmi->add_option("file", cmi.file)->required();
  c_cmi->add_option("--a", cmi.a)->required()->delimiter(',');
  c_cmi->add_option("--b", cmi.b)->required()->delimiter(',');
  c_cmi->add_option("--c", cmi.c)->delimiter(',');
  c_cmi->add_option("--ci-tol", cmi.ci_tol, "Independence threshold on the CMI")->capture_default_str();

  SuffstatArgs suff;
  auto* c_suff = app.add_subcommand("suffstat", "Minimal sufficient statistic of a classical variable");
  c_suff->add_option("file", suff.file, "Hybrid or scenario file")->required();
  c_suff->add_option("--variable", suff.variable)->required();

  ImproveArgs imp;
  auto* c_imp = app.add_subcommand("improve", "Improve a state from an expert's report");
  c_imp->add_option("scenario", imp.scenario, "Hybrid or scenario file (shared-prior mode)");
  c_imp->add_option("--announced", imp.announced, "Announced state (shared-prior mode)");
  c_imp->add_option("--variable", imp.variable, "Report variable (shared-prior mode)");
  c_imp->add_option("--prior", imp.prior, "Decision maker's prior");
  c_imp->add_option("--likelihood", imp.likelihood, "Report likelihood POVM file");
  c_imp->add_option("--report", imp.report, "Observed report value");

  PoolArgs pool;
  auto* c_pool = app.add_subcommand("pool", "Pool states");
  c_pool->add_option("inputs", pool.inputs, "States, or one scenario for --rule supra")->required();
  c_pool->add_option("--rule", pool.rule, "Pooling rule")->capture_default_str()
      ->check(CLI::IsMember({"linear", "multiplicative", "supra"}));
  c_pool->add_option("--weights", pool.weights, "Linear pool weights")->delimiter(',');
  c_pool->add_option("--prior", pool.prior, "uniform or a prior state file (multiplicative)");
  c_pool->add_flag("--hermitian-part", pool.hermitian_part, "Take the Hermitian part of a non-Hermitian product");
  c_pool->add_option("--value", pool.values, "Announced value VAR=VALUE (supra)");
  c_pool->add_option("--condition-tol", pool.condition_tol, "Tolerance for the pooling condition (supra)")->capture_default_str();

  ScenarioArgs scen;
  auto* c_scen = app.add_subcommand("scenario", "Scenario builders");
  c_scen->require_subcommand(1);
  auto* c_build = c_scen->add_subcommand("build", "Build the hybrid joint of a scenario spec");
  c_build->add_option("file", scen.file)->required();
  auto* c_obs = c_scen->add_subcommand("obstruct", "Check whether two scenarios admit joint states");
  c_obs->add_option("file", scen.file)->required();

  CheckArgs chk;
  auto* c_check = app.add_subcommand("check", "Run a randomized property suite");
  c_check->add_option("suite", chk.suite)->required()->check(CLI::IsMember(suite_names()));
  c_check->add_option("--seed", chk.seed, "Seed")->capture_default_str();
  c_check->add_option("--trials", chk.trials, "Trials (0: suite default)")->capture_default_str()->check(CLI::NonNegativeNumber);
  c_check->add_option("--dims", chk.dims, "Dimensions to sample")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  Json result;
  int code = kOk;
  std::string command;
  try {
    const Tolerance tol = opt.tolerance();
    if (*c_cond) {
      command = "condition";
      code = run_condition(cond, tol, result);
    } else if (*c_compat) {
      command = "compat";
      code = run_compat(compat, tol, result);
    } else if (*c_ent) {
      command = "entropy";
      code = run_entropy(ent, tol, result);
    } else if (*c_cmi) {
      command = "cmi";
      code = run_cmi(cmi, tol, result);
    } else if (*c_suff) {
      command = "suffstat";
      code = run_suffstat(suff, tol, result);
    } else if (*c_imp) {
      command = "improve";
      code = run_improve(imp, tol, result);
    } else if (*c_pool) {
      command = "pool";
      code = run_pool(pool, tol, result);
    } else if (*c_build) {
      command = "scenario build";
      code = run_scenario_build(scen, tol, result);
    } else if (*c_obs) {
      command = "scenario obstruct";
      code = run_scenario_obstruct(scen, tol, result);
    } else if (*c_check) {
      command = "check";
      code = run_check(chk, result);
    }
  } catch (const CLI::ParseError& e) {
    std::cerr << "qcond: usage: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    return report_error("invalid input", e, kInvalidInput);
  } catch (const ValidationError& e) {
    return report_error("invalid input", e, kInvalidInput);
  } catch (const RegionError& e) {
    return report_error("invalid input", e, kInvalidInput);
  } catch (const IncompatibleError& e) {
    return report_error("incompatible", e, kNegative);
  } catch (const PreconditionError& e) {
    return report_error("precondition failed", e, kPrecondition);
  } catch (const std::invalid_argument& e) {
    return report_error("invalid argument", e, kUsage);
  } catch (const std::exception& e) {
    return report_error("internal error", e, kInternal);
  }

  if (!opt.output.empty()) {
    try {
      save_json(opt.output, Json{{"command", command}, {"exit_code", code}, {"result", result}});
    } catch (const std::exception& e) {
      return report_error("output", e, kInternal);
    }
  }
  return code;
}
