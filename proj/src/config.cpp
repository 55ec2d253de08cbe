#include "floquet/config.hpp"

#include <fstream>

#include "floquet/errors.hpp"

namespace floquet {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + ": expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ConfigError(std::string(what) + ": rows have different lengths");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json distributions_to_json(const std::vector<Distribution>& ds) {
  json out = json::array();
  for (const auto& d : ds) out.push_back(distribution_to_json(d));
  return out;
}

std::vector<Distribution> distributions_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("expected an array of distributions");
  std::vector<Distribution> out;
  for (const auto& d : j) out.push_back(distribution_from_json(d));
  return out;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

json distribution_to_json(const Distribution& d) {
  using K = Distribution::Kind;
  switch (d.kind) {
    case K::constant:
      return {{"dist", "constant"}, {"value", d.a}};
    case K::uniform:
      return {{"dist", "uniform"}, {"lo", d.a}, {"hi", d.b}};
    case K::normal:
      return {{"dist", "normal"}, {"mean", d.a}, {"sd", d.b}};
    case K::lognormal:
      return {{"dist", "lognormal"}, {"mu", d.a}, {"sigma", d.b}};
    case K::cauchy:
      return {{"dist", "cauchy"}, {"loc", d.a}, {"scale", d.b}};
    case K::logcauchy:
      return {{"dist", "logcauchy"}, {"loc", d.a}, {"scale", d.b}};
  }
  return {};
}

Distribution distribution_from_json(const json& j) {
  if (j.is_number()) return Distribution::constant(j.get<double>());
  const auto kind = j.at("dist").get<std::string>();
  Distribution d;
  if (kind == "constant") d = Distribution::constant(j.at("value").get<double>());
  else if (kind == "uniform") d = Distribution::uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
  else if (kind == "normal") d = Distribution::normal(j.at("mean").get<double>(), j.at("sd").get<double>());
  else if (kind == "lognormal") d = Distribution::lognormal(j.at("mu").get<double>(), j.at("sigma").get<double>());
  else if (kind == "cauchy") d = Distribution::cauchy(j.at("loc").get<double>(), j.at("scale").get<double>());
  else if (kind == "logcauchy") d = Distribution::logcauchy(j.at("loc").get<double>(), j.at("scale").get<double>());
  else throw ConfigError("unknown distribution '" + kind + "'");
  d.validate();
  return d;
}

json model_to_json(const CocycleModel& model) {
  json j = std::visit(
      [](const auto& v) -> json {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, Deterministic>) {
          return {{"variant", "deterministic"}, {"matrix", matrix_to_json(v.matrix)}};
        } else if constexpr (std::is_same_v<V, IidEnsemble>) {
          json out{{"variant", "iid"}, {"dimension", v.dimension}};
          if (v.entries.size() == 1) out["entry"] = distribution_to_json(v.entries.front());
          else out["entries"] = distributions_to_json(v.entries);
          return out;
        } else if constexpr (std::is_same_v<V, MarkovSwitch>) {
          json states = json::array();
          for (const auto& s : v.states) states.push_back(matrix_to_json(s));
          return {{"variant", "markov"}, {"states", states}, {"transition", matrix_to_json(v.transition)}};
        } else if constexpr (std::is_same_v<V, LeslieRandom>) {
          return {{"variant", "leslie"},
                  {"fecundity", distributions_to_json(v.fecundity)},
                  {"survival", distributions_to_json(v.survival)}};
        } else {
          return {{"variant", "scalar_scaled"},
                  {"base", matrix_to_json(v.base)},
                  {"log_scalar", distribution_to_json(v.log_scalar)}};
        }
      },
      model.variant());
  j["norm"] = std::string(to_string(model.norm_kind()));
  j["scale"] = model.scale();
  if (model.explicit_focus()) j["focus"] = vector_to_json(model.focus());
  return j;
}

CocycleModel model_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ConfigError("model must be an object");
    const auto variant = j.at("variant").get<std::string>();
    ModelVariant v;
    if (variant == "deterministic") {
      v = Deterministic{matrix_from_json(j.at("matrix"), "matrix")};
    } else if (variant == "iid") {
      IidEnsemble e;
      e.dimension = j.at("dimension").get<int>();
      if (j.contains("entry")) e.entries = {distribution_from_json(j.at("entry"))};
      else e.entries = distributions_from_json(j.at("entries"));
      v = e;
    } else if (variant == "markov") {
      MarkovSwitch m;
      for (const auto& s : j.at("states")) m.states.push_back(matrix_from_json(s, "markov state"));
      m.transition = matrix_from_json(j.at("transition"), "transition");
      v = m;
    } else if (variant == "leslie") {
      v = LeslieRandom{distributions_from_json(j.at("fecundity")), distributions_from_json(j.at("survival"))};
    } else if (variant == "scalar_scaled") {
      v = ScalarScaled{matrix_from_json(j.at("base"), "base"), distribution_from_json(j.at("log_scalar"))};
    } else {
      throw ConfigError("unknown model variant '" + variant + "'");
    }
    std::optional<Vector> focus;
    if (j.contains("focus")) focus = vector_from_json(j.at("focus"));
    return CocycleModel(std::move(v), parse_norm_kind(get_or<std::string>(j, "norm", "ell1")),
                        get_or(j, "scale", 1.0), focus);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

bool operator==(const RunConfig& lhs, const RunConfig& rhs) {
  const auto& a = lhs.pullback;
  const auto& b = rhs.pullback;
  return lhs.model == rhs.model && lhs.model_hi == rhs.model_hi && lhs.seeds == rhs.seeds &&
         lhs.horizon == rhs.horizon && lhs.burn_in == rhs.burn_in && a.tolerance == b.tolerance &&
         a.depth_cap == b.depth_cap && a.require_focusing == b.require_focusing && lhs.period == rhs.period &&
         lhs.batches == rhs.batches && lhs.workers == rhs.workers && lhs.trace_points == rhs.trace_points &&
         lhs.epsilon == rhs.epsilon && lhs.probes == rhs.probes && lhs.orbit == rhs.orbit;
}

json to_json(const RunConfig& c) {
  json j{{"model", model_to_json(c.model)},
         {"seeds", c.seeds},
         {"horizon", c.horizon},
         {"pullback",
          {{"tolerance", c.pullback.tolerance},
           {"depth_cap", c.pullback.depth_cap},
           {"require_focusing", c.pullback.require_focusing}}},
         {"period", c.period},
         {"batches", c.batches},
         {"workers", c.workers},
         {"trace_points", c.trace_points},
         {"epsilon", c.epsilon},
         {"probes", c.probes},
         {"orbit", {{"anchor", c.orbit.anchor}, {"backward", c.orbit.backward}, {"forward", c.orbit.forward}}}};
  if (c.burn_in) j["burn_in"] = *c.burn_in;
  if (c.model_hi) j["model_hi"] = model_to_json(*c.model_hi);
  return j;
}

RunConfig parse_config(const json& j) {
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (!j.contains("model")) throw ConfigError("config: missing 'model'");
    RunConfig c{model_from_json(j.at("model"))};
    if (j.contains("model_hi")) c.model_hi = model_from_json(j.at("model_hi"));
    c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (c.seeds.empty()) throw ConfigError("config: 'seeds' must list at least one seed");
    c.horizon = get_or(j, "horizon", c.horizon);
    if (j.contains("burn_in")) c.burn_in = j.at("burn_in").get<std::int64_t>();
    if (j.contains("pullback")) {
      const json& p = j.at("pullback");
      c.pullback.tolerance = get_or(p, "tolerance", c.pullback.tolerance);
      c.pullback.depth_cap = get_or(p, "depth_cap", c.pullback.depth_cap);
      c.pullback.require_focusing = get_or(p, "require_focusing", c.pullback.require_focusing);
    }
    c.period = get_or(j, "period", c.period);
    c.batches = get_or(j, "batches", c.batches);
    c.workers = get_or(j, "workers", c.workers);
    c.trace_points = get_or(j, "trace_points", c.trace_points);
    c.epsilon = get_or(j, "epsilon", c.epsilon);
    c.probes = get_or(j, "probes", c.probes);
    if (j.contains("orbit")) {
      const json& o = j.at("orbit");
      c.orbit.anchor = get_or(o, "anchor", c.orbit.anchor);
      c.orbit.backward = get_or(o, "backward", c.orbit.backward);
      c.orbit.forward = get_or(o, "forward", c.orbit.forward);
    }

    if (c.horizon < 2) throw ConfigError("config: horizon must be >= 2");
    if (c.burn_in && (*c.burn_in < 0 || *c.burn_in >= c.horizon))
      throw ConfigError("config: burn_in must lie in [0, horizon)");
    if (!(c.pullback.tolerance > 0)) throw ConfigError("config: pullback.tolerance must be positive");
    if (c.pullback.depth_cap < 2) throw ConfigError("config: pullback.depth_cap must be >= 2");
    if (c.period < 0) throw ConfigError("config: period must be >= 0");
    if (c.batches < 2) throw ConfigError("config: batches must be >= 2");
    if (c.workers < 0) throw ConfigError("config: workers must be >= 0");
    if (c.probes < 1) throw ConfigError("config: probes must be >= 1");
    if (!(c.epsilon > 0)) throw ConfigError("config: epsilon must be positive");
    if (c.orbit.backward < 0 || c.orbit.forward < 0) throw ConfigError("config: orbit step counts must be >= 0");
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + file.string() + ": " + e.what());
  }
  return parse_config(j);
}

LyapunovOptions lyapunov_options(const RunConfig& c, int period) {
  LyapunovOptions o;
  o.horizon = c.horizon;
  o.burn_in = c.burn_in;
  o.batches = c.batches;
  o.period = period;
  o.workers = c.workers;
  o.pullback = c.pullback;
  o.trace_points = c.trace_points;
  return o;
}

}  // namespace floquet
