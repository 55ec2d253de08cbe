#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "floquet/errors.hpp"
#include "floquet/runner.hpp"
#include "support.hpp"

using namespace floquet;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "floquet_runner_tests" / name;
  fs::remove_all(dir);
  return dir;
}

json config_json(const json& model, std::int64_t horizon = 2000, json seeds = {1}) {
  return {{"model", model}, {"seeds", seeds}, {"horizon", horizon}};
}

json symmetric() { return {{"variant", "deterministic"}, {"matrix", {{2, 1}, {1, 2}}}}; }

oracle::SchemaCheck schema() {
  std::ifstream in(fs::path(FLOQUET_SOURCE_DIR) / "docs" / "runrecord.schema.json");
  return oracle::SchemaCheck(json::parse(in));
}

}  // namespace

TEST_CASE("config round trip for every variant") {
  const json models[] = {
      symmetric(),
      {{"variant", "iid"}, {"dimension", 2}, {"entry", {{"dist", "uniform"}, {"lo", 1}, {"hi", 2}}}, {"norm", "ell2"}},
      {{"variant", "iid"},
       {"dimension", 2},
       {"entries",
        {{{"dist", "lognormal"}, {"mu", 0.1}, {"sigma", 0.3}},
         {{"dist", "constant"}, {"value", 1}},
         {{"dist", "uniform"}, {"lo", 0.5}, {"hi", 1}},
         {{"dist", "logcauchy"}, {"loc", 0}, {"scale", 0.2}}}}},
      {{"variant", "markov"},
       {"states", {{{2, 1}, {1, 1}}, {{1, 3}, {1, 0.5}}}},
       {"transition", {{0.9, 0.1}, {0.3, 0.7}}},
       {"focus", {1, 2}}},
      {{"variant", "leslie"},
       {"fecundity", {{{"dist", "uniform"}, {"lo", 0.5}, {"hi", 1.5}}, 1.25}},
       {"survival", {{{"dist", "uniform"}, {"lo", 0.3}, {"hi", 0.9}}}},
       {"norm", "ellinf"}},
      {{"variant", "scalar_scaled"},
       {"base", {{2, 1}, {1, 2}}},
       {"log_scalar", {{"dist", "normal"}, {"mean", 0.1}, {"sd", 0.7}}},
       {"scale", 1.1}},
  };
  for (const auto& m : models) {
    json j = config_json(m, 1234, {7, 3});
    j["burn_in"] = 100;
    j["pullback"] = {{"tolerance", 1e-10}, {"depth_cap", 512}, {"require_focusing", false}};
    j["model_hi"] = m;
    j["orbit"] = {{"anchor", -4}, {"backward", 3}, {"forward", 9}};
    const RunConfig c = parse_config(j);
    const RunConfig again = parse_config(json::parse(to_json(c).dump()));
    CHECK(again == c);
    CHECK(to_json(again) == to_json(c));
  }
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config(config_json(symmetric(), 100, json::array())), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"seeds", {1}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(config_json({{"variant", "bogus"}})), ConfigError);
  CHECK_THROWS_AS(parse_config(config_json({{"variant", "deterministic"}, {"matrix", {{1, -1}, {1, 1}}}})), ConfigError);
  CHECK_THROWS_AS(parse_config(config_json({{"variant", "iid"}, {"dimension", 2},
                                            {"entry", {{"dist", "uniform"}, {"lo", -1}, {"hi", 1}}}})),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(config_json(symmetric(), 1)), ConfigError);
  json bad = config_json(symmetric());
  bad["seeds"] = "one";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/floquet.json"), ConfigError);
}

TEST_CASE("estimate on a symmetric deterministic model") {
  const auto dir = scratch("estimate");
  const auto out = run_command("estimate", parse_config(config_json(symmetric())), dir);
  CHECK(out.exit_code == exit_ok);
  const auto& r = out.record;
  CHECK(r["status"] == "ok");
  CHECK(r["result"]["lambda1"]["mean"].get<double>() == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(r["result"]["lambda1"]["se"].get<double>() <= 1e-12);
  CHECK(r["result"]["lambda1"]["replicates"] == 1);
  CHECK(fs::exists(dir / "record_estimate.json"));
  CHECK(fs::exists(dir / "growth_1.csv"));
  std::ifstream csv(dir / "growth_1.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "step,ln_rho,cumulative,certificate");
  CHECK(schema().check(r) == "");
}

TEST_CASE("reruns are byte identical apart from timing") {
  json j = config_json({{"variant", "iid"}, {"dimension", 3}, {"entry", {{"dist", "uniform"}, {"lo", 0.5}, {"hi", 2}}}},
                       3000, {4, 2, 9});
  const RunConfig c = parse_config(j);
  for (const char* command : {"estimate", "separation"}) {
    RunOverrides serial, parallel;
    serial.workers = 1;
    parallel.workers = 3;
    const auto a = run_command(command, c, scratch("det_a"), serial);
    const auto b = run_command(command, c, scratch("det_b"), parallel);
    json pa = record_payload(a.record), pb = record_payload(b.record);
    pa["config"].erase("workers");
    pb["config"].erase("workers");
    CHECK(pa.dump() == pb.dump());
    CHECK(schema().check(a.record) == "");
  }
}

TEST_CASE("separation records") {
  auto out = run_command("separation", parse_config(config_json(symmetric())), scratch("sep"));
  CHECK(out.exit_code == exit_ok);
  CHECK(out.record["result"]["pair"]["sigma"]["mean"].get<double>() == doctest::Approx(std::log(3.0)));
  CHECK(schema().check(out.record) == "");

  json id = config_json({{"variant", "deterministic"}, {"matrix", {{1, 0}, {0, 1}}}});
  id["pullback"] = {{"require_focusing", false}};
  out = run_command("separation", parse_config(id), scratch("identity"));
  CHECK(out.exit_code == exit_ok);
  CHECK(out.record["result"]["zero_separation"] == true);
  CHECK(out.record["result"]["pair"]["lambda1"]["mean"] == 0.0);
  const auto flags = out.record["flags"];
  CHECK(std::find(flags.begin(), flags.end(), "zero_separation") != flags.end());
  CHECK(schema().check(out.record) == "");

  json rank_one = config_json({{"variant", "deterministic"}, {"matrix", {{1, 2}, {3, 6}}}}, 100);
  out = run_command("separation", parse_config(rank_one), scratch("rank_one"));
  CHECK(out.record["result"]["pair"]["sigma"]["mean"] == "inf");
  CHECK(schema().check(out.record) == "");
}

TEST_CASE("focusing abort is recorded") {
  const json id = config_json({{"variant", "deterministic"}, {"matrix", {{1, 0}, {0, 1}}}});
  const auto out = run_command("estimate", parse_config(id), scratch("abort"));
  CHECK(out.exit_code == exit_assumption);
  CHECK(out.record["status"] == "assumption_failure");
  CHECK(out.record["error"]["type"] == "focusing_violation");
  CHECK(schema().check(out.record) == "");
}

TEST_CASE("verify verdicts") {
  const json iid = config_json(
      {{"variant", "iid"}, {"dimension", 3}, {"entry", {{"dist", "uniform"}, {"lo", 0.5}, {"hi", 2}}}});
  auto out = run_command("verify", parse_config(iid), scratch("verify_iid"));
  CHECK(out.exit_code == exit_ok);
  CHECK(out.record["result"]["verdict"] == true);
  CHECK(schema().check(out.record) == "");

  json perm = config_json({{"variant", "deterministic"}, {"matrix", {{0, 1}, {1, 0}}}});
  perm["period"] = 0;
  out = run_command("verify", parse_config(perm), scratch("verify_perm"));
  CHECK(out.exit_code == exit_assumption);
  const auto& checks = out.record["result"]["checks"];
  CHECK(checks[0]["name"] == "A3_focusing_T1");
  CHECK(checks[0]["passed"] == false);
  CHECK(checks[1]["name"] == "primitivity");
  CHECK(checks[1]["detail"].is_null());
  CHECK(schema().check(out.record) == "");

  json leslie = config_json({{"variant", "leslie"},
                             {"fecundity", {{{"dist", "uniform"}, {"lo", 0.5}, {"hi", 1.5}}, {{"dist", "uniform"}, {"lo", 1}, {"hi", 2}}}},
                             {"survival", {{{"dist", "uniform"}, {"lo", 0.3}, {"hi", 0.9}}}}});
  leslie["period"] = 0;
  out = run_command("verify", parse_config(leslie), scratch("verify_leslie"));
  CHECK(out.exit_code == exit_ok);
  CHECK(out.record["result"]["period"] == 2);
}

TEST_CASE("compare records") {
  json j = config_json({{"variant", "iid"}, {"dimension", 2}, {"entry", {{"dist", "uniform"}, {"lo", 1}, {"hi", 2}}}},
                       3000, {1, 2});
  j["model_hi"] = j["model"];
  j["model_hi"]["scale"] = 1.1;
  auto out = run_command("compare", parse_config(j), scratch("compare"));
  CHECK(out.exit_code == exit_ok);
  CHECK(std::abs(out.record["result"]["gap"]["mean"].get<double>() - std::log(1.1)) <= 1e-10);
  CHECK(schema().check(out.record) == "");

  std::swap(j["model"], j["model_hi"]);
  out = run_command("compare", parse_config(j), scratch("compare_bad"));
  CHECK(out.exit_code == exit_assumption);
  CHECK(out.record["error"]["type"] == "domination_violation");
  CHECK(out.record["error"]["index"].is_number_integer());

  j.erase("model_hi");
  out = run_command("compare", parse_config(j), scratch("compare_missing"));
  CHECK(out.exit_code == exit_config);
}

TEST_CASE("orbit records") {
  json j = config_json({{"variant", "iid"}, {"dimension", 3}, {"entry", {{"dist", "lognormal"}, {"mu", 0}, {"sigma", 0.5}}}});
  const auto dir = scratch("orbit");
  const auto out = run_command("orbit", parse_config(j), dir);
  CHECK(out.exit_code == exit_ok);
  CHECK(out.record["result"]["points"] == 41);
  CHECK(out.record["result"]["relation_residual"].get<double>() <= 1e-12);
  CHECK(out.record["result"]["in_open_cone"] == true);
  CHECK(fs::exists(dir / "orbit.csv"));
  CHECK(schema().check(out.record) == "");
}

TEST_CASE("overrides and matrix dumps") {
  RunOverrides o;
  o.horizon = 500;
  o.dump_matrices = 4;
  const auto dir = scratch("overrides");
  const auto out = run_command("estimate", parse_config(config_json(symmetric())), dir, o);
  CHECK(out.record["config"]["horizon"] == 500);
  CHECK(fs::exists(dir / "matrices.csv"));
  CHECK_THROWS_AS(run_command("bogus", parse_config(config_json(symmetric())), dir), ConfigError);
}

TEST_CASE("schema checker rejects malformed records") {
  const auto dir = scratch("schema");
  json r = run_command("estimate", parse_config(config_json(symmetric())), dir).record;
  const auto s = schema();
  json missing = r;
  missing.erase("status");
  CHECK(s.check(missing) != "");
  json wrong = r;
  wrong["result"]["lambda1"]["se"] = "big";
  CHECK(s.check(wrong) != "");
  json extra = r;
  extra["surprise"] = 1;
  CHECK(s.check(extra) != "");
}
