// Runs the built qcond binary and compares its JSON with direct library calls.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "qcond/inference.hpp"
#include "qcond/io.hpp"
#include "qcond/suites.hpp"
#include "support.hpp"

using namespace qcond;
using namespace qt;
namespace fs = std::filesystem;

namespace {

const fs::path kData = QCOND_DATA_DIR;

struct Run {
  int code = -1;
  Json out;
};

Run run(const std::string& args) {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() / "qcond_cli_test";
  fs::create_directories(dir);
  const fs::path out = dir / ("out" + std::to_string(counter++) + ".json");
  fs::remove(out);
  const std::string cmd = std::string("\"") + QCOND_CLI + "\" -o \"" + out.string() + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (fs::exists(out)) r.out = load_json(out);
  return r;
}

std::string data(const char* name) { return "\"" + (kData / name).string() + "\""; }

}  // namespace

TEST_CASE("cli: compat verdicts and exit codes") {
  const Run bad = run("compat " + data("ket0.json") + " " + data("ket1.json"));
  CHECK(bad.code == 10);
  CHECK(bad.out["exit_code"] == 10);
  CHECK(bad.out["result"]["compatible"] == false);
  CHECK(bad.out["result"]["intersection_rank"] == 0);

  const Run good = run("compat " + data("ket0.json") + " " + data("maximally_mixed.json") + " --witness objective");
  CHECK(good.code == 0);
  CHECK(good.out["result"]["compatible"] == true);
  CHECK(good.out["result"]["intersection_rank"] == 1);
}

TEST_CASE("cli: condition matches the library") {
  const Run r = run("condition " + data("parity.json") + " --value X1=1");
  REQUIRE(r.code == 0);
  const HybridState h = read_hybrid(kData / "parity.json");
  const JointState direct = condition(h, {{"X1", 1}});
  const JointState cli = joint_from_json(r.out["result"]["state"]);
  CHECK(cli.op.matrix() == direct.op.matrix());
  CHECK(r.out["result"]["probability"].get<double>() == 0.5);
}

TEST_CASE("cli: multiplicative pool of the parity marginals is uniform") {
  const Run r = run("pool " + data("parity_x1.json") + " " + data("parity_x2.json") + " --rule multiplicative --prior uniform");
  REQUIRE(r.code == 0);
  const JointState s = joint_from_json(r.out["result"]["state"]);
  CHECK(dist(s.op, diag({0.5, 0.5})) == 0.0);
}

TEST_CASE("cli: entropy and cmi") {
  const Run e = run("entropy " + data("singlet.json") + " --regions A");
  REQUIRE(e.code == 0);
  CHECK(std::abs(e.out["result"]["entropy_bits"].get<double>() - 1.0) < 1e-12);
  const Run whole = run("entropy " + data("singlet.json") + " --regions A,B");
  REQUIRE(whole.code == 0);
  CHECK(std::abs(whole.out["result"]["entropy_bits"].get<double>()) < 1e-9);
}

TEST_CASE("cli: check suites") {
  const Run r = run("check theorem8 --seed 42 --trials 100");
  CHECK(r.code == 0);
  CHECK(r.out["result"]["passed"] == true);
  CHECK(r.out["result"]["trials"] == 100);
  SuiteOptions o;
  o.trials = 100;
  const SuiteReport direct = run_suite("theorem8", o);
  for (const auto& m : r.out["result"]["metrics"]) {
    CHECK(m["max_deviation"].get<double>() == direct.metric(m["name"].get<std::string>()).max_deviation);
  }
  CHECK(run("check nonesuch").code == 2);
}

TEST_CASE("cli: obstruction specs") {
  const Run obstruction = run("scenario obstruct " + data("prepare_measure.json"));
  CHECK(obstruction.code == 10);
  CHECK(obstruction.out["result"]["pairs"].size() == 4);
  CHECK(run("scenario obstruct " + data("singlet_steering.json")).code == 10);
  const Run control = run("scenario obstruct " + data("control.json"));
  CHECK(control.code == 0);
  CHECK(control.out["result"]["obstructed"] == false);
}

TEST_CASE("cli: input and usage errors") {
  CHECK(run("condition " + data("bad_trace.json") + " --given A").code == 3);
  CHECK(run("condition " + data("no_such_file.json") + " --given A").code == 3);
  CHECK(run("").code == 2);
  CHECK(run("pool " + data("parity_x1.json") + " --rule nonesuch").code == 2);
}
