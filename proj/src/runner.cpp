#include "floquet/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <algorithm>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "floquet/assumptions.hpp"
#include "floquet/errors.hpp"
#include "floquet/parallel.hpp"
#include "floquet/separation.hpp"

namespace floquet {

using nlohmann::json;
namespace fs = std::filesystem;

json real_json(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

namespace {

json reals(const std::vector<double>& xs) {
  json out = json::array();
  for (double x : xs) out.push_back(real_json(x));
  return out;
}

json vector_json(const Vector& v) { return reals(std::vector<double>(v.data(), v.data() + v.size())); }

json estimate_json(const Estimate& e) {
  return {{"mean", real_json(e.mean)},
          {"se", real_json(e.standard_error)},
          {"replicates", e.replicates},
          {"seeds", e.seeds},
          {"values", reals(e.values)}};
}

json pullback_json(const PrincipalVector& p) {
  return {{"anchor", p.anchor},
          {"depth", p.depth},
          {"error_bound", real_json(p.error_bound)},
          {"certified", p.certified},
          {"cap_hit", p.cap_hit}};
}

json focusing_json(const FocusingReport& r) {
  json j{{"focus", vector_json(r.focus)},
         {"period", r.period},
         {"kappa", real_json(r.kappa)},
         {"tau", real_json(r.tau)},
         {"contraction_p", real_json(r.contraction_p)},
         {"ln_kappa",
          {{"count", r.ln_kappa.count},
           {"min", real_json(r.ln_kappa.min)},
           {"mean", real_json(r.ln_kappa.mean)},
           {"max", real_json(r.ln_kappa.max)}}},
         {"primitivity", nullptr},
         {"focused", r.focused},
         {"failure", nullptr}};
  if (r.primitivity) j["primitivity"] = *r.primitivity;
  if (!r.focused) j["failure"] = {{"index", r.failure_index.value_or(0)}, {"message", r.failure}};
  return j;
}

class CsvFile {
 public:
  CsvFile(const fs::path& file, const std::string& header, std::vector<fs::path>& files) : out_(file) {
    if (!out_) throw Error("cannot write " + file.string());
    out_.precision(17);
    out_ << header << '\n';
    files.push_back(file);
  }
  template <typename... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((out_ << (first ? "" : ",") << values, first = false), ...);
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

struct Context {
  const RunConfig& config;
  fs::path out_dir;
  std::vector<fs::path>& files;
  json& flags;
  int period = 1;
  int exit_code = exit_ok;
};

int resolve_period(const RunConfig& c) {
  if (c.period > 0) return c.period;
  if (auto t = focusing_period(c.model, c.seeds.front(), c.probes)) return *t;
  if (!c.pullback.require_focusing) return 1;
  throw AssumptionViolation("no period up to the Wielandt bound gives strictly positive products", 0);
}

json run_estimate(Context& ctx) {
  const auto result = lyapunov_top(ctx.config.model, ctx.config.seeds, lyapunov_options(ctx.config, ctx.period));
  json reps = json::array();
  for (const auto& r : result.replicates) {
    reps.push_back({{"seed", r.seed}, {"lambda1", real_json(r.value)}, {"pullback", pullback_json(r.initial)}});
    if (r.initial.cap_hit) ctx.flags.push_back("pullback_cap_hit");
    if (!r.initial.certified) ctx.flags.push_back("uncertified_pullback");
    CsvFile csv(ctx.out_dir / ("growth_" + std::to_string(r.seed) + ".csv"), "step,ln_rho,cumulative,certificate",
                ctx.files);
    for (const auto& row : r.trace) csv.row(row.step, row.ln_rho, row.cumulative, row.certificate);
  }
  return {{"lambda1", estimate_json(result.estimate)}, {"replicates", reps}};
}

json run_separation(Context& ctx) {
  const auto options = lyapunov_options(ctx.config, ctx.period);
  const auto sep = second_exponent(ctx.config.model, ctx.config.seeds, options);
  const auto tempered =
      temperedness_check(ctx.config.model, ctx.config.seeds, options, ctx.config.epsilon, ctx.config.trace_points);

  json reps = json::array();
  for (const auto& r : sep.replicates) {
    reps.push_back({{"seed", r.seed},
                    {"lambda1", real_json(r.lambda1)},
                    {"lambda2", real_json(r.lambda2)},
                    {"sigma", real_json(r.lambda1 - r.lambda2)},
                    {"lambda2_fit_se", real_json(r.lambda2_fit_se)},
                    {"pairing", real_json(r.anchor.pairing)}});
    CsvFile csv(ctx.out_dir / ("separation_" + std::to_string(r.seed) + ".csv"), "n,g_n", ctx.files);
    for (const auto& p : r.trace) csv.row(p.n, p.g);
  }
  CsvFile csv(ctx.out_dir / "tempered.csv", "seed,n,ln_pairing,ln_projection_norm", ctx.files);
  for (const auto& row : tempered.trace) csv.row(row.seed, row.n, row.ln_pairing, row.ln_projection_norm);

  json checks = json::array();
  for (const auto& c : tempered.checks) checks.push_back({{"seed", c.seed}, {"n", c.n}, {"rate", real_json(c.rate)}});
  if (sep.zero_separation) ctx.flags.push_back("zero_separation");
  if (!tempered.verdict) ctx.flags.push_back("not_tempered");

  const auto& pair = sep.pair;
  return {{"pair",
           {{"w", vector_json(pair.w)},
            {"w_star", vector_json(pair.w_star)},
            {"pairing", real_json(pair.pairing)},
            {"lambda1", estimate_json(pair.lambda1)},
            {"lambda2", estimate_json(pair.lambda2)},
            {"sigma", estimate_json(pair.sigma)}}},
          {"zero_separation", sep.zero_separation},
          {"replicates", reps},
          {"temperedness",
           {{"verdict", tempered.verdict},
            {"epsilon", tempered.epsilon},
            {"trend_slope", real_json(tempered.trend_slope)},
            {"checks", checks}}}};
}

json check_json(const std::string& name, std::optional<bool> passed, json detail, bool required = true) {
  return {{"name", name},
          {"passed", passed.value_or(false)},
          {"skipped", !passed},
          {"required", required},
          {"detail", std::move(detail)}};
}

template <typename Fn>
json guarded_check(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return check_json(name, false, {{"error", e.what()}});
  }
}

json run_verify(Context& ctx) {
  const RunConfig& c = ctx.config;
  const CocycleModel& model = c.model;
  const std::uint64_t seed = c.seeds.front();
  json checks = json::array();

  const FocusingReport at_one = focusing_report(model, seed, 1, c.probes);
  checks.push_back(check_json("A3_focusing_T1", at_one.focused, focusing_json(at_one), false));
  checks.push_back(check_json("primitivity", at_one.primitivity.has_value(),
                              at_one.primitivity ? json(*at_one.primitivity) : json(nullptr), false));

  const std::optional<int> period = c.period > 0 ? std::optional<int>(c.period) : focusing_period(model, seed, c.probes);
  checks.push_back(check_json("focusing_period", period.has_value(), period ? json(*period) : json(nullptr)));
  if (period) {
    ctx.period = *period;
    const FocusingReport at_t = focusing_report(model, seed, *period, c.probes);
    checks.push_back(check_json("A3_focusing_T", at_t.focused, focusing_json(at_t)));
  } else {
    checks.push_back(check_json("A3_focusing_T", std::nullopt, nullptr));
  }

  checks.push_back(guarded_check("A1_integrability", [&] {
    const auto r = check_A1_integrability(model, static_cast<std::size_t>(std::max<std::int64_t>(c.probes, 10000)), seed);
    return check_json("A1_integrability", !r.heavy_tail,
                      {{"mean", real_json(r.mean)},
                       {"se", real_json(r.standard_error)},
                       {"max", real_json(r.max_value)},
                       {"tail_index", real_json(r.tail_index)}});
  }));
  checks.push_back(guarded_check("A4_pairing", [&] {
    return check_json("A4_pairing", true, {{"pairing", check_A4(model)}});
  }));
  checks.push_back(guarded_check("A5_strong_positivity", [&] {
    OmegaPath path(seed);
    const auto r = verify_A5(model, path, model.focus(), c.probes, period.value_or(1));
    return check_json("A5_strong_positivity", true,
                      {{"min_nu", real_json(r.min_nu)},
                       {"mean_ln_nu", real_json(r.mean_ln_nu)},
                       {"lower_bound", real_json(r.lower_bound)}});
  }));

  if (period) {
    checks.push_back(guarded_check("projection_algebra", [&] {
      OmegaPath path(seed);
      const StepView view(model, path, *period);
      const auto w = pullback_adaptive(view, 0, c.pullback);
      const auto w_star = dual_adaptive(view, 0, c.pullback);
      const auto rec = make_projection(0, w.w, w_star.w);
      const Matrix p = rec.matrix();
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> gauss;
      double worst = (p * w.w).cwiseAbs().maxCoeff();
      for (int i = 0; i < 100; ++i) {
        Vector u(model.dimension());
        for (auto& x : u) x = gauss(rng);
        const Vector pu = p * u;
        worst = std::max({worst, (p * pu - pu).cwiseAbs().maxCoeff(), std::abs(pu.dot(w_star.w))});
      }
      return check_json("projection_algebra", worst <= 1e-10,
                        {{"max_residual", real_json(worst)}, {"pairing", real_json(rec.pairing)}});
    }));
    checks.push_back(guarded_check("cone_avoidance", [&] {
      OmegaPath path(seed);
      const StepView view(model, path, *period);
      const auto w_star = dual_adaptive(view, 0, c.pullback);
      double smallest = std::numeric_limits<double>::infinity();
      for (const auto& u : sample_unit_cone(model.dimension(), 10000, seed, model.norm_kind()))
        smallest = std::min(smallest, u.dot(w_star.w));
      return check_json("cone_avoidance", smallest > 0, {{"min_pairing", real_json(smallest)}});
    }));
  } else {
    checks.push_back(check_json("projection_algebra", std::nullopt, nullptr));
    checks.push_back(check_json("cone_avoidance", std::nullopt, nullptr));
  }

  bool all = true;
  // Focusing at T = 1 is informational: the machinery runs on the period-T skeleton.
  for (const auto& check : checks)
    if (check.at("required").get<bool>() && !check.at("skipped").get<bool>() && !check.at("passed").get<bool>())
      all = false;
  if (!all) {
    ctx.exit_code = exit_assumption;
    ctx.flags.push_back("assumption_failure");
  }
  return {{"verdict", all}, {"period", period ? json(*period) : json(nullptr)}, {"checks", checks}};
}

json run_compare(Context& ctx) {
  if (!ctx.config.model_hi) throw ConfigError("compare: config has no 'model_hi'");
  const auto r = compare_exponents(ctx.config.model, *ctx.config.model_hi, ctx.config.seeds,
                                   lyapunov_options(ctx.config, ctx.period));
  if (!r.ordered) {
    ctx.flags.push_back("not_ordered");
    ctx.exit_code = exit_assumption;
  }
  return {{"low", estimate_json(r.low.estimate)},
          {"high", estimate_json(r.high.estimate)},
          {"gap", estimate_json(r.gap)},
          {"combined_se", real_json(r.combined_se)},
          {"ordered", r.ordered}};
}

json run_orbit(Context& ctx) {
  const RunConfig& c = ctx.config;
  OmegaPath path(c.seeds.front());
  const StepView view(c.model, path, ctx.period);
  const auto orbit = entire_orbit(view, c.orbit.anchor, c.orbit.backward, c.orbit.forward, c.pullback);

  std::string header = "index,log_scale";
  for (int i = 0; i < c.model.dimension(); ++i) header += ",w" + std::to_string(i);
  CsvFile csv(ctx.out_dir / "orbit.csv", header, ctx.files);
  double residual = 0;
  double min_coordinate = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    const auto& p = orbit[i];
    std::ostringstream line;
    line.precision(17);
    line << p.index << ',' << p.log_scale;
    for (double x : p.direction) line << ',' << x;
    csv.row(line.str());
    min_coordinate = std::min(min_coordinate, p.direction.minCoeff());
    if (i + 1 < orbit.size()) {
      const Vector next = view(p.index) * p.direction * std::exp(p.log_scale - orbit[i + 1].log_scale);
      residual = std::max(residual, norm((next - orbit[i + 1].direction).eval(), c.model.norm_kind()));
    }
  }
  return {{"seed", c.seeds.front()},
          {"anchor", c.orbit.anchor},
          {"points", orbit.size()},
          {"relation_residual", real_json(residual)},
          {"min_coordinate", real_json(min_coordinate)},
          {"in_open_cone", min_coordinate > 0}};
}

json error_json(const std::exception& e) {
  json j{{"type", "error"}, {"message", e.what()}, {"index", nullptr}};
  if (const auto* f = dynamic_cast<const FocusingViolation*>(&e)) {
    j["type"] = "focusing_violation";
    if (f->index()) j["index"] = *f->index();
  } else if (const auto* a = dynamic_cast<const AssumptionViolation*>(&e)) {
    j["type"] = "assumption_violation";
    j["index"] = a->index();
  } else if (const auto* d = dynamic_cast<const DominationViolation*>(&e)) {
    j["type"] = "domination_violation";
    j["index"] = d->index();
  } else if (dynamic_cast<const DegeneratePairing*>(&e)) {
    j["type"] = "degenerate_pairing";
  } else if (dynamic_cast<const ConfigError*>(&e)) {
    j["type"] = "config_error";
  } else if (dynamic_cast<const Error*>(&e)) {
    j["type"] = "numerical_error";
  }
  return j;
}

int exit_code_for(const json& error) {
  const auto type = error.at("type").get<std::string>();
  if (type == "config_error") return exit_config;
  if (type == "focusing_violation" || type == "assumption_violation" || type == "domination_violation" ||
      type == "degenerate_pairing")
    return exit_assumption;
  return exit_numerical;
}

std::string status_for(int code) {
  switch (code) {
    case exit_ok:
      return "ok";
    case exit_config:
      return "config_error";
    case exit_assumption:
      return "assumption_failure";
    default:
      return "numerical_abort";
  }
}

}  // namespace

bool known_command(std::string_view command) {
  return command == "estimate" || command == "separation" || command == "verify" || command == "compare" ||
         command == "orbit";
}

CommandOutcome run_command(std::string_view command, RunConfig config, const fs::path& out_dir,
                           const RunOverrides& overrides) {
  if (!known_command(command)) throw ConfigError("unknown command '" + std::string(command) + "'");
  if (overrides.workers) config.workers = *overrides.workers;
  if (overrides.horizon) config.horizon = *overrides.horizon;
  const json config_echo = to_json(config);
  if (config.workers == 0) config.workers = default_workers();
  fs::create_directories(out_dir);

  const auto started = std::chrono::steady_clock::now();
  CommandOutcome outcome;
  json flags = json::array();
  Context ctx{config, out_dir, outcome.files, flags};
  json result = nullptr;
  json error = nullptr;
  json focusing = nullptr;
  try {
    if (command != "verify") {
      ctx.period = resolve_period(config);
      const auto report = focusing_report(config.model, config.seeds.front(), ctx.period, config.probes);
      if (!report.focused) flags.push_back("unfocused");
      focusing = focusing_json(report);
    }
    if (overrides.dump_matrices > 0) {
      OmegaPath path(config.seeds.front());
      const fs::path file = out_dir / "matrices.csv";
      write_matrix_csv(file, config.model, path, 0, overrides.dump_matrices);
      outcome.files.push_back(file);
    }
    if (command == "estimate") result = run_estimate(ctx);
    else if (command == "separation") result = run_separation(ctx);
    else if (command == "verify") result = run_verify(ctx);
    else if (command == "compare") result = run_compare(ctx);
    else result = run_orbit(ctx);
  } catch (const std::exception& e) {
    error = error_json(e);
    ctx.exit_code = exit_code_for(error);
    flags.push_back("partial");
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  // Flags repeat once per replicate; keep each once, in first-seen order.
  json unique = json::array();
  for (const auto& f : flags)
    if (std::find(unique.begin(), unique.end(), f) == unique.end()) unique.push_back(f);

  const auto replicate_count = static_cast<std::int64_t>(config.seeds.size());
  outcome.exit_code = ctx.exit_code;
  outcome.record = {{"schema_version", kRecordSchemaVersion},
                    {"command", std::string(command)},
                    {"status", status_for(ctx.exit_code)},
                    {"exit_code", ctx.exit_code},
                    {"flags", unique},
                    {"config", config_echo},
                    {"period", ctx.period},
                    {"focusing", focusing},
                    {"result", result},
                    {"error", error},
                    {"steps", replicate_count * config.horizon * ctx.period},
                    {"timing", {{"wall_seconds", seconds}}}};

  const fs::path record_file = out_dir / ("record_" + std::string(command) + ".json");
  std::ofstream out(record_file);
  out << outcome.record.dump(2) << '\n';
  outcome.files.push_back(record_file);
  return outcome;
}

json record_payload(const json& record) {
  json copy = record;
  copy.erase("timing");
  return copy;
}

}  // namespace floquet
