#include "gpcov/config.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace gpcov {

namespace {

using nlohmann::json;

void check_keys(const json &j, std::initializer_list<const char *> allowed, const std::string &where) {
  if (!j.is_object())
    throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto &[key, value] : j.items()) {
    if (!ok.count(key))
      throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T> void read(const json &j, const char *key, T &dst) {
  if (!j.contains(key))
    return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception &e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

Point read_point(const json &j) {
  if (!j.is_array() || j.size() != 2)
    throw ConfigError("points must be [x, y] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::string init_name(InitKind k) {
  switch (k) {
  case InitKind::UniformRandom:
    return "uniform_random";
  case InitKind::Cluster:
    return "cluster";
  case InitKind::Explicit:
    return "explicit";
  }
  return "uniform_random";
}

InitKind parse_init(const std::string &s) {
  if (s == "uniform_random")
    return InitKind::UniformRandom;
  if (s == "cluster")
    return InitKind::Cluster;
  if (s == "explicit")
    return InitKind::Explicit;
  throw ConfigError("unknown initial_positions kind '" + s + "'");
}

} // namespace

SimConfig config_from_json(const json &j, SimConfig c) {
  check_keys(j,
             {"domain", "agents", "scenario", "seed", "seeds", "rounds", "update_period", "capacity", "cost",
              "optimizer", "consensus", "noise_sigma", "initial_positions", "gp", "baseline", "lloyd_gain",
              "metric_stride", "comment"},
             "config");
  if (j.contains("domain")) {
    const json &d = j["domain"];
    check_keys(d, {"width", "height", "cell_size"}, "domain");
    int w = c.domain.width, h = c.domain.height;
    double cs = c.domain.cell_size;
    read(d, "width", w);
    read(d, "height", h);
    read(d, "cell_size", cs);
    c.domain = Domain(w, h, cs);
  }
  read(j, "agents", c.n_agents);
  if (j.contains("scenario")) {
    const json &s = j["scenario"];
    check_keys(s, {"kind", "scale", "bumps", "background"}, "scenario");
    if (s.contains("kind"))
      c.scenario.kind = parse_scenario_kind(s["kind"].get<std::string>());
    read(s, "scale", c.scenario.scale);
    if (s.contains("bumps")) {
      c.scenario.custom.bumps.clear();
      for (const auto &b : s["bumps"]) {
        check_keys(b, {"center", "sigma", "amplitude"}, "bump");
        c.scenario.custom.bumps.push_back(
            {read_point(b.at("center")), b.at("sigma").get<double>(), b.value("amplitude", 1.0)});
      }
    }
    read(s, "background", c.scenario.custom.background);
  }
  read(j, "seed", c.seed);
  read(j, "rounds", c.rounds);
  read(j, "update_period", c.update_period);
  read(j, "capacity", c.capacity);
  if (j.contains("cost")) {
    const json &q = j["cost"];
    check_keys(q, {"beta", "single_stride", "pair_budget"}, "cost");
    read(q, "beta", c.quadrature.beta);
    read(q, "single_stride", c.quadrature.single_stride);
    read(q, "pair_budget", c.quadrature.pair_budget);
  }
  if (j.contains("optimizer")) {
    const json &o = j["optimizer"];
    check_keys(o, {"eta", "eta_adam", "v_max", "window", "plateau_threshold", "beta1", "beta2", "adam_epsilon"},
               "optimizer");
    read(o, "eta", c.optimizer.eta);
    read(o, "eta_adam", c.optimizer.eta_adam);
    read(o, "v_max", c.optimizer.v_max);
    read(o, "window", c.optimizer.window);
    read(o, "plateau_threshold", c.optimizer.plateau_threshold);
    read(o, "beta1", c.optimizer.beta1);
    read(o, "beta2", c.optimizer.beta2);
    read(o, "adam_epsilon", c.optimizer.adam_epsilon);
  }
  if (j.contains("consensus")) {
    const json &k = j["consensus"];
    check_keys(k, {"alpha", "log_space"}, "consensus");
    read(k, "alpha", c.consensus.alpha);
    read(k, "log_space", c.consensus.log_space);
  }
  read(j, "noise_sigma", c.noise_sigma);
  if (j.contains("initial_positions")) {
    const json &p = j["initial_positions"];
    check_keys(p, {"kind", "corner", "fraction", "points"}, "initial_positions");
    if (p.contains("kind"))
      c.init.kind = parse_init(p["kind"].get<std::string>());
    read(p, "corner", c.init.corner);
    read(p, "fraction", c.init.fraction);
    if (p.contains("points")) {
      c.init.points.clear();
      for (const auto &pt : p["points"])
        c.init.points.push_back(read_point(pt));
    }
  }
  if (j.contains("gp")) {
    const json &g = j["gp"];
    check_keys(g, {"lengthscale", "signal_variance", "prior_mean", "spread", "refit_steps"}, "gp");
    read(g, "lengthscale", c.gp.lengthscale);
    read(g, "signal_variance", c.gp.signal_variance);
    read(g, "prior_mean", c.gp.prior_mean);
    read(g, "spread", c.gp.spread);
    read(g, "refit_steps", c.gp.refit_steps);
  }
  read(j, "baseline", c.baseline);
  read(j, "lloyd_gain", c.lloyd_gain);
  read(j, "metric_stride", c.metric_stride);
  return c;
}

json config_to_json(const SimConfig &c) {
  json bumps = json::array();
  for (const auto &b : c.scenario.custom.bumps)
    bumps.push_back({{"center", {b.center.x(), b.center.y()}}, {"sigma", b.sigma}, {"amplitude", b.amplitude}});
  json points = json::array();
  for (const auto &p : c.init.points)
    points.push_back({p.x(), p.y()});
  json out = {
      {"domain", {{"width", c.domain.width}, {"height", c.domain.height}, {"cell_size", c.domain.cell_size}}},
      {"agents", c.n_agents},
      {"scenario", {{"kind", scenario_name(c.scenario.kind)}, {"scale", c.scenario.scale}}},
      {"seed", c.seed},
      {"rounds", c.rounds},
      {"update_period", c.update_period},
      {"capacity", c.capacity},
      {"cost",
       {{"beta", c.quadrature.beta},
        {"single_stride", c.quadrature.single_stride},
        {"pair_budget", c.quadrature.pair_budget}}},
      {"optimizer",
       {{"eta", c.optimizer.eta},
        {"eta_adam", c.optimizer.eta_adam},
        {"v_max", c.optimizer.v_max},
        {"window", c.optimizer.window},
        {"plateau_threshold", c.optimizer.plateau_threshold},
        {"beta1", c.optimizer.beta1},
        {"beta2", c.optimizer.beta2},
        {"adam_epsilon", c.optimizer.adam_epsilon}}},
      {"consensus", {{"alpha", c.consensus.alpha}, {"log_space", c.consensus.log_space}}},
      {"noise_sigma", c.noise_sigma},
      {"initial_positions",
       {{"kind", init_name(c.init.kind)},
        {"corner", c.init.corner},
        {"fraction", c.init.fraction},
        {"points", points}}},
      {"gp",
       {{"lengthscale", c.gp.lengthscale},
        {"signal_variance", c.gp.signal_variance},
        {"prior_mean", c.gp.prior_mean},
        {"spread", c.gp.spread},
        {"refit_steps", c.gp.refit_steps}}},
      {"baseline", c.baseline},
      {"lloyd_gain", c.lloyd_gain},
      {"metric_stride", c.metric_stride},
  };
  if (c.scenario.kind == ScenarioKind::Custom) {
    out["scenario"]["bumps"] = bumps;
    out["scenario"]["background"] = c.scenario.custom.background;
  }
  return out;
}

std::vector<SimConfig> load_configs(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception &e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  const SimConfig base = config_from_json(j);
  std::vector<SimConfig> out;
  if (j.contains("seeds")) {
    for (const auto &s : j["seeds"]) {
      SimConfig c = base;
      c.seed = s.get<std::uint64_t>();
      out.push_back(c);
    }
  } else {
    out.push_back(base);
  }
  for (const auto &c : out)
    c.validate();
  return out;
}

std::string format_double(double v) {
  std::array<char, 64> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string trace_header(int n_agents) {
  std::string h = "step,true_cost,rmse,messages";
  for (int i = 0; i < n_agents; ++i)
    h += ",agent" + std::to_string(i) + "_x,agent" + std::to_string(i) + "_y";
  return h;
}

void write_trace_csv(std::ostream &out, const SimTrace &trace) {
  out << trace_header(trace.n_agents) << '\n';
  for (const auto &row : trace.rows) {
    std::string line = std::to_string(row.step) + ',' + format_double(row.true_cost) + ',' +
                       format_double(row.rmse) + ',' + std::to_string(row.messages);
    for (const auto &p : row.positions)
      line += ',' + format_double(p.x()) + ',' + format_double(p.y());
    out << line << '\n';
  }
}

void write_trace_csv(const std::filesystem::path &path, const SimTrace &trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  write_trace_csv(out, trace);
  if (!out)
    throw std::runtime_error("write failed for " + path.string());
}

void write_density_csv(std::ostream &out, const DensityField &field) {
  const Domain &d = field.domain();
  for (int y = 0; y < d.height; ++y) {
    std::string line;
    for (int x = 0; x < d.width; ++x) {
      if (x > 0)
        line += ',';
      line += format_double(field.at(x, y));
    }
    out << line << '\n';
  }
}

} // namespace gpcov
