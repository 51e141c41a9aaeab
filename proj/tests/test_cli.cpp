// End-to-end checks of the CLI: exit codes, schema validity of every
// subcommand's JSON, and byte-stable reproducibility under --no-meta.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "nlohmann/json.hpp"

using json = nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::string out_path = "/tmp/sphere_cli_out_" + std::to_string(counter++) + ".txt";
  const std::string cmd = std::string(SPHERE_CLI_PATH) + " " + args + " > " + out_path + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  RunResult res;
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream f(out_path);
  std::stringstream ss;
  ss << f.rdbuf();
  res.stdout_text = ss.str();
  std::remove(out_path.c_str());
  return res;
}

json load_schema(const std::string& name) {
  std::ifstream f(std::string(SPHERE_SCHEMA_DIR) + "/" + name + ".schema.json");
  REQUIRE(f.good());
  return json::parse(f);
}

// minimal validator for the schema subset used here: type, required,
// properties, items, enum
bool validate(const json& value, const json& schema, std::string* why) {
  if (schema.contains("type")) {
    const auto check_type = [&](const std::string& t) {
      if (t == "object") return value.is_object();
      if (t == "array") return value.is_array();
      if (t == "string") return value.is_string();
      if (t == "integer") return value.is_number_integer() || value.is_number_unsigned();
      if (t == "number") return value.is_number();
      if (t == "boolean") return value.is_boolean();
      if (t == "null") return value.is_null();
      return false;
    };
    bool ok = false;
    if (schema["type"].is_array()) {
      for (const auto& t : schema["type"]) ok = ok || check_type(t.get<std::string>());
    } else {
      ok = check_type(schema["type"].get<std::string>());
    }
    if (!ok) {
      *why = "type mismatch against " + schema["type"].dump() + " for " + value.dump().substr(0, 80);
      return false;
    }
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& candidate : schema["enum"]) ok = ok || candidate == value;
    if (!ok) {
      *why = "value " + value.dump() + " not in enum";
      return false;
    }
  }
  if (value.is_object()) {
    if (schema.contains("required"))
      for (const auto& key : schema["required"])
        if (!value.contains(key.get<std::string>())) {
          *why = "missing required key " + key.get<std::string>();
          return false;
        }
    if (schema.contains("properties"))
      for (const auto& [key, sub] : schema["properties"].items())
        if (value.contains(key))
          if (!validate(value[key], sub, why)) return false;
  }
  if (value.is_array() && schema.contains("items"))
    for (const auto& item : value)
      if (!validate(item, schema["items"], why)) return false;
  return true;
}

void check_against_schema(const std::string& text, const std::string& schema_name) {
  const json value = json::parse(text);
  std::string why;
  const bool ok = validate(value, load_schema(schema_name), &why);
  INFO("schema ", schema_name, ": ", why);
  CHECK(ok);
}

}  // namespace

TEST_CASE("classify run and schema") {
  const auto res = run_cli("classify --kernel pframe:3 --d 3 --nmax 12 --no-meta");
  REQUIRE(res.exit_code == 0);
  check_against_schema(res.stdout_text, "classify");
  const json j = json::parse(res.stdout_text);
  CHECK(j["pd_up_to_constant"] == false);
  CHECK(j["max_negative"]["n"] == 6);
}

TEST_CASE("energy run matches the icosahedral closed form") {
  const auto res = run_cli("energy --config builtin:icosahedron --kernel pframe:3 --no-meta");
  REQUIRE(res.exit_code == 0);
  check_against_schema(res.stdout_text, "energy");
  const json j = json::parse(res.stdout_text);
  const double expect = (1.0 + 1.0 / std::sqrt(5.0)) / 6.0;
  CHECK(std::fabs(j["energy"].get<double>() - expect) < 1e-6);
}

TEST_CASE("expand and potential schemas") {
  const auto e = run_cli("expand --kernel poly:0,0,1 --d 3 --nmax 4 --no-meta");
  REQUIRE(e.exit_code == 0);
  check_against_schema(e.stdout_text, "expand");
  const json je = json::parse(e.stdout_text);
  CHECK(std::fabs(je["expansion"]["coeffs"][0].get<double>() - 1.0 / 3.0) < 1e-12);

  const auto p = run_cli(
      "potential --config builtin:cross-polytope --kernel poly:0,0,1 --grid 200 --seed 4 --no-meta");
  REQUIRE(p.exit_code == 0);
  check_against_schema(p.stdout_text, "potential");
  const json jp = json::parse(p.stdout_text);
  CHECK(std::fabs(jp["constancy_gap"].get<double>()) < 1e-12);
}

TEST_CASE("minimize run, schema, reproducibility") {
  const std::string args =
      "minimize --kernel poly:0,0,1 --d 2 --atoms 6 --starts 2 --iters 400 --seed 11 --no-meta";
  const auto a = run_cli(args);
  REQUIRE(a.exit_code == 0);
  check_against_schema(a.stdout_text, "minimize");
  const json j = json::parse(a.stdout_text);
  CHECK(std::fabs(j["best_energy"].get<double>() - 0.5) < 1e-6);

  const auto b = run_cli(args);
  CHECK(a.stdout_text == b.stdout_text);  // byte-identical under --no-meta
}

TEST_CASE("reduce pipeline run and schema") {
  const auto res = run_cli(
      "reduce --kernel poly:0,0,1 --d 3 --atoms 20 --starts 3 --iters 600 --nmax 4 --seed 5 "
      "--no-meta");
  REQUIRE(res.exit_code == 0);
  check_against_schema(res.stdout_text, "reduce");
  const json j = json::parse(res.stdout_text);
  CHECK(j["pipeline"] == true);
  CHECK(j["support_bound"] == 6);
  CHECK(j["bound_satisfied"] == true);
  CHECK(j["reduction"]["final_support"].get<int>() <= 6);
}

TEST_CASE("witness run, schema, even rejection, scan") {
  const auto res = run_cli("witness --p 3 --d 3 --no-meta");
  REQUIRE(res.exit_code == 0);
  check_against_schema(res.stdout_text, "witness");
  const json j = json::parse(res.stdout_text);
  CHECK(j["quadratic_form_value"].get<double>() < -1e-12);
  CHECK(j["k"] == 2);

  const auto rej = run_cli("witness --p 4 --d 3 --no-meta");
  CHECK(rej.exit_code == 2);

  const auto scan = run_cli("witness --p 3 --d 2 --scan 0.5 2.5 0.5 --no-meta");
  REQUIRE(scan.exit_code == 0);
  CHECK(scan.stdout_text.rfind("p,k,eps_final,form_value", 0) == 0);
  int lines = 0;
  for (char c : scan.stdout_text)
    if (c == '\n') ++lines;
  CHECK(lines == 5);  // header + {0.5, 1, 1.5, 2.5}; p = 2 skipped
}

TEST_CASE("verify-diffop run and schema") {
  const auto res = run_cli("verify-diffop --k 1 --d 3 --pgrid 2.25,2.5,3.0 --no-meta");
  REQUIRE(res.exit_code == 0);
  check_against_schema(res.stdout_text, "verify-diffop");
  const json j = json::parse(res.stdout_text);
  CHECK(j["claims_hold"] == true);
  CHECK(j["indeterminate_cells"] == 0);
}

TEST_CASE("designs run and schema") {
  const auto res = run_cli("designs --config builtin:icosahedron --degrees 1,2,3 --no-meta");
  REQUIRE(res.exit_code == 0);
  check_against_schema(res.stdout_text, "designs");
  const json j = json::parse(res.stdout_text);
  CHECK(j["is_weighted_design"] == true);  // icosahedron is a 5-design

  const auto bad = run_cli("designs --config builtin:cube --degrees 4 --no-meta");
  const json jb = json::parse(bad.stdout_text);
  CHECK(jb["is_weighted_design"] == false);  // cube is only a 3-design
}

TEST_CASE("usage and domain errors map to exit codes") {
  CHECK(run_cli("frobnicate").exit_code == 1);             // unknown subcommand
  CHECK(run_cli("classify --d 3").exit_code != 0);         // missing --kernel
  CHECK(run_cli("energy --config builtin:nope --kernel pframe:2 --no-meta").exit_code == 2);
  CHECK(run_cli("expand --kernel pframe:-1 --d 3 --no-meta").exit_code == 2);
}
