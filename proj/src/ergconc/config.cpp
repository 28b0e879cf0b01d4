#include "ergconc/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ergconc/errors.hpp"
#include "ergconc/expression.hpp"

namespace ergconc {

using nlohmann::json;

namespace {

// Stream key for the proxy estimation paths, disjoint from the replicate
// streams of the deviation sampler.
constexpr std::uint64_t kCarreSeedMix = 0x9e3779b97f4a7c15ULL;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> known) {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(join(path, key), "unknown field");
  }
}

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

std::uint64_t as_count(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    if (j.get<std::int64_t>() < 0) throw ConfigError(path, "expected a non-negative integer");
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v >= 0.0 && v < 1.8e19 && std::floor(v) == v) return static_cast<std::uint64_t>(v);
  }
  throw ConfigError(path, "expected a non-negative integer");
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

template <class F>
void field(const json& j, const std::string& path, const char* key, F&& read) {
  if (auto it = j.find(key); it != j.end()) read(*it, join(path, key));
}

std::vector<double> number_list(const json& j, const std::string& path, std::size_t dim) {
  if (j.is_number()) return std::vector<double>(dim, as_number(j, path));
  if (!j.is_array()) throw ConfigError(path, "expected a number or an array of numbers");
  if (j.size() != dim) throw ConfigError(path, "expected " + std::to_string(dim) + " entries");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], index(path, i)));
  return out;
}

std::vector<std::string> string_list(const json& j, const std::string& path, std::size_t size) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of expressions");
  if (j.size() != size) throw ConfigError(path, "expected " + std::to_string(size) + " entries");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_string(j[i], index(path, i)));
  return out;
}

InlineModel parse_inline_model(const json& j, const std::string& path) {
  reject_unknown(j, path, {"dim", "noise_dim", "drift", "diffusion", "phi", "box"});
  InlineModel m;
  field(j, path, "dim", [&](const json& v, const std::string& p) { m.dim = as_count(v, p); });
  if (m.dim == 0) throw ConfigError(join(path, "dim"), "must be >= 1");
  m.noise_dim = m.dim;
  field(j, path, "noise_dim", [&](const json& v, const std::string& p) { m.noise_dim = as_count(v, p); });
  if (m.noise_dim == 0) throw ConfigError(join(path, "noise_dim"), "must be >= 1");

  if (!j.contains("drift")) throw ConfigError(join(path, "drift"), "required");
  m.drift = string_list(j["drift"], join(path, "drift"), m.dim);
  if (!j.contains("diffusion")) throw ConfigError(join(path, "diffusion"), "required");
  const json& diffusion = j["diffusion"];
  const std::string dpath = join(path, "diffusion");
  if (!diffusion.is_array() || diffusion.size() != m.dim) {
    throw ConfigError(dpath, "expected " + std::to_string(m.dim) + " rows");
  }
  for (std::size_t i = 0; i < m.dim; ++i) m.diffusion.push_back(string_list(diffusion[i], index(dpath, i), m.noise_dim));
  if (!j.contains("phi")) throw ConfigError(join(path, "phi"), "required");
  m.phi = as_string(j["phi"], join(path, "phi"));

  auto check_expression = [&](const std::string& text, const std::string& p) {
    try {
      Expression::parse(text, m.dim);
    } catch (const ConfigError& e) {
      throw ConfigError(p, e.what());
    }
  };
  for (std::size_t i = 0; i < m.dim; ++i) {
    check_expression(m.drift[i], index(join(path, "drift"), i));
    for (std::size_t k = 0; k < m.noise_dim; ++k) {
      check_expression(m.diffusion[i][k], index(index(dpath, i), k));
    }
  }
  check_expression(m.phi, join(path, "phi"));

  m.box_min.assign(m.dim, -10.0);
  m.box_max.assign(m.dim, 10.0);
  m.points_per_dim = m.dim == 1 ? 2001 : (m.dim == 2 ? 401 : 41);
  field(j, path, "box", [&](const json& box, const std::string& p) {
    expect_object(box, p);
    reject_unknown(box, p, {"min", "max", "points_per_dim"});
    field(box, p, "min", [&](const json& v, const std::string& q) { m.box_min = number_list(v, q, m.dim); });
    field(box, p, "max", [&](const json& v, const std::string& q) { m.box_max = number_list(v, q, m.dim); });
    field(box, p, "points_per_dim", [&](const json& v, const std::string& q) { m.points_per_dim = as_count(v, q); });
    for (std::size_t i = 0; i < m.dim; ++i) {
      if (!(m.box_max[i] > m.box_min[i])) throw ConfigError(join(p, "max"), "must exceed min in every coordinate");
    }
    if (m.points_per_dim < 2) throw ConfigError(join(p, "points_per_dim"), "must be >= 2");
  });
  return m;
}

json inline_model_to_json(const InlineModel& m) {
  return json{{"dim", m.dim},
              {"noise_dim", m.noise_dim},
              {"drift", m.drift},
              {"diffusion", m.diffusion},
              {"phi", m.phi},
              {"box", json{{"min", m.box_min}, {"max", m.box_max}, {"points_per_dim", m.points_per_dim}}}};
}

std::optional<double> positive_override(const json& v, const std::string& p) {
  const double x = as_number(v, p);
  if (!(x > 0.0)) throw ConfigError(p, "must be > 0");
  return x;
}

void read_proxy_fields(const json& j, const std::string& path, ProxyOverrides& o, bool allow_p) {
  if (allow_p) {
    reject_unknown(j, path, {"nu_carre", "nu_sigma2", "sigma_sup", "grad_phi_sup", "theta_lip", "alpha", "p_confluence"});
  }
  field(j, path, "nu_carre", [&](const json& v, const std::string& p) { o.nu_carre = positive_override(v, p); });
  field(j, path, "nu_sigma2", [&](const json& v, const std::string& p) { o.nu_sigma2 = positive_override(v, p); });
  field(j, path, "sigma_sup", [&](const json& v, const std::string& p) { o.sigma_sup = positive_override(v, p); });
  field(j, path, "grad_phi_sup", [&](const json& v, const std::string& p) { o.grad_phi_sup = positive_override(v, p); });
  field(j, path, "theta_lip", [&](const json& v, const std::string& p) { o.theta_lip = positive_override(v, p); });
  field(j, path, "alpha", [&](const json& v, const std::string& p) { o.alpha = positive_override(v, p); });
  if (allow_p) {
    field(j, path, "p_confluence", [&](const json& v, const std::string& p) {
      o.p_confluence = as_number(v, p);
      if (!(o.p_confluence >= 1.0)) throw ConfigError(p, "must be >= 1");
    });
  }
}

}  // namespace

std::vector<double> AGrid::values() const {
  std::vector<double> out;
  out.reserve(count);
  if (count == 1) {
    out.push_back(min);
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(i + 1 == count ? max : min + (max - min) * double(i) / double(count - 1));
  }
  return out;
}

RegularityMode ExperimentConfig::regularity_mode() const {
  if (regularity.lipschitz) return Lipschitz{};
  return holder(regularity.beta);
}

std::string ExperimentConfig::model_name() const { return inline_model ? "inline" : model; }

ExperimentMetadata ExperimentConfig::metadata() const {
  return ExperimentMetadata{n, theta, gamma1, mc, seed, model_name()};
}

PathOptions ExperimentConfig::path_options() const {
  PathOptions options;
  options.innovation = innovation;
  options.initial = initial;
  options.divergence_limit = divergence_limit;
  return options;
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  expect_object(j, "config");
  reject_unknown(j, "",
                 {"model", "regularity", "gamma1", "theta", "innovation", "initial", "n", "mc", "a_grid", "seed",
                  "rho_grid_steps", "tuning", "proxies", "proxies_file", "carre_paths", "divergence_limit",
                  "threads", "outputs"});

  ExperimentConfig c;
  field(j, "", "model", [&](const json& v, const std::string& p) {
    if (v.is_string()) {
      c.model = v.get<std::string>();
      if (c.model != kBuiltinModelName) {
        // Resolved eagerly so that typos surface at parse time.
        try {
          find_model(c.model);
        } catch (const ConfigError& e) {
          throw ConfigError(p, e.what());
        }
      }
    } else if (v.is_object()) {
      c.inline_model = parse_inline_model(v, p);
      c.model = "inline";
    } else {
      throw ConfigError(p, "expected a model name or an inline model object");
    }
  });
  field(j, "", "regularity", [&](const json& v, const std::string& p) {
    expect_object(v, p);
    reject_unknown(v, p, {"mode", "beta"});
    field(v, p, "mode", [&](const json& m, const std::string& q) {
      const std::string mode = as_string(m, q);
      if (mode == "lipschitz") {
        c.regularity.lipschitz = true;
      } else if (mode == "holder") {
        c.regularity.lipschitz = false;
      } else {
        throw ConfigError(q, "expected \"holder\" or \"lipschitz\"");
      }
    });
    field(v, p, "beta", [&](const json& b, const std::string& q) {
      c.regularity.beta = as_number(b, q);
      if (!(c.regularity.beta > 0.0 && c.regularity.beta <= 1.0)) throw ConfigError(q, "must lie in (0, 1]");
    });
  });
  field(j, "", "gamma1", [&](const json& v, const std::string& p) {
    c.gamma1 = as_number(v, p);
    if (!(c.gamma1 > 0.0)) throw ConfigError(p, "must be > 0");
  });
  field(j, "", "theta", [&](const json& v, const std::string& p) {
    c.theta = as_number(v, p);
    if (!(c.theta > 0.0 && c.theta <= 1.0)) throw ConfigError(p, "must lie in (0, 1]");
  });
  field(j, "", "innovation", [&](const json& v, const std::string& p) {
    const std::string law = as_string(v, p);
    if (law == "gaussian") {
      c.innovation = InnovationLaw::kStandardGaussian;
    } else if (law == "bernoulli") {
      c.innovation = InnovationLaw::kSymmetrizedBernoulli;
    } else {
      throw ConfigError(p, "expected \"gaussian\" or \"bernoulli\"");
    }
  });
  field(j, "", "initial", [&](const json& v, const std::string& p) {
    if (v.is_string()) {
      if (v.get<std::string>() != "standard_normal") throw ConfigError(p, "expected \"standard_normal\" or a point");
      c.initial = InitialLaw::standard_normal();
      return;
    }
    expect_object(v, p);
    reject_unknown(v, p, {"point"});
    if (!v.contains("point") || !v["point"].is_array()) throw ConfigError(join(p, "point"), "expected an array");
    std::vector<double> point;
    for (std::size_t i = 0; i < v["point"].size(); ++i) point.push_back(as_number(v["point"][i], index(join(p, "point"), i)));
    c.initial = InitialLaw::point_mass(std::move(point));
  });
  field(j, "", "n", [&](const json& v, const std::string& p) {
    c.n = as_count(v, p);
    if (c.n < 1) throw ConfigError(p, "must be >= 1");
  });
  field(j, "", "mc", [&](const json& v, const std::string& p) {
    c.mc = as_count(v, p);
    if (c.mc < 1) throw ConfigError(p, "must be >= 1");
  });
  field(j, "", "a_grid", [&](const json& v, const std::string& p) {
    expect_object(v, p);
    reject_unknown(v, p, {"min", "max", "count"});
    field(v, p, "min", [&](const json& x, const std::string& q) { c.a_grid.min = as_number(x, q); });
    field(v, p, "max", [&](const json& x, const std::string& q) { c.a_grid.max = as_number(x, q); });
    field(v, p, "count", [&](const json& x, const std::string& q) { c.a_grid.count = as_count(x, q); });
    if (c.a_grid.min < 0.0) throw ConfigError(join(p, "min"), "must be >= 0");
    if (c.a_grid.count < 1) throw ConfigError(join(p, "count"), "must be >= 1");
    if (c.a_grid.count > 1 && !(c.a_grid.max > c.a_grid.min)) throw ConfigError(join(p, "max"), "must exceed min");
  });
  field(j, "", "seed", [&](const json& v, const std::string& p) { c.seed = as_count(v, p); });
  field(j, "", "rho_grid_steps", [&](const json& v, const std::string& p) {
    c.rho_grid_steps = as_count(v, p);
    if (c.rho_grid_steps < 2) throw ConfigError(p, "must be >= 2");
  });
  field(j, "", "tuning", [&](const json& v, const std::string& p) {
    expect_object(v, p);
    reject_unknown(v, p, {"q", "q_hat", "q_bar", "e_n"});
    auto at_least_one = [](const json& x, const std::string& q) {
      const double value = as_number(x, q);
      if (!(value >= 1.0)) throw ConfigError(q, "must be >= 1");
      return value;
    };
    field(v, p, "q", [&](const json& x, const std::string& q) { c.tuning.q = at_least_one(x, q); });
    field(v, p, "q_hat", [&](const json& x, const std::string& q) { c.tuning.q_hat = at_least_one(x, q); });
    field(v, p, "q_bar", [&](const json& x, const std::string& q) { c.tuning.q_bar = at_least_one(x, q); });
    field(v, p, "e_n", [&](const json& x, const std::string& q) {
      c.tuning.e_n = as_number(x, q);
      if (c.tuning.e_n < 0.0) throw ConfigError(q, "must be >= 0");
    });
  });
  field(j, "", "proxies", [&](const json& v, const std::string& p) {
    expect_object(v, p);
    for (const auto& [key, value] : v.items()) {
      if (value.is_null()) throw ConfigError(join(p, key), "expected a number");
    }
    read_proxy_fields(v, p, c.proxies, true);
  });
  field(j, "", "proxies_file", [&](const json& v, const std::string& p) { c.proxies_file = as_string(v, p); });
  field(j, "", "carre_paths", [&](const json& v, const std::string& p) {
    c.carre_paths = as_count(v, p);
    if (c.carre_paths < 2) throw ConfigError(p, "must be >= 2");
  });
  field(j, "", "divergence_limit", [&](const json& v, const std::string& p) {
    c.divergence_limit = as_number(v, p);
    if (!(c.divergence_limit > 0.0)) throw ConfigError(p, "must be > 0");
  });
  field(j, "", "threads", [&](const json& v, const std::string& p) {
    const std::uint64_t t = as_count(v, p);
    if (t > 4096) throw ConfigError(p, "must be <= 4096");
    c.threads = static_cast<unsigned>(t);
  });
  field(j, "", "outputs", [&](const json& v, const std::string& p) {
    expect_object(v, p);
    reject_unknown(v, p, {"deviations", "bounds", "figure_csv", "figure_svg", "trace", "proxies"});
    field(v, p, "deviations", [&](const json& x, const std::string& q) { c.outputs.deviations = as_string(x, q); });
    field(v, p, "bounds", [&](const json& x, const std::string& q) { c.outputs.bounds = as_string(x, q); });
    field(v, p, "figure_csv", [&](const json& x, const std::string& q) { c.outputs.figure_csv = as_string(x, q); });
    field(v, p, "figure_svg", [&](const json& x, const std::string& q) { c.outputs.figure_svg = as_string(x, q); });
    field(v, p, "trace", [&](const json& x, const std::string& q) { c.outputs.trace = as_string(x, q); });
    field(v, p, "proxies", [&](const json& x, const std::string& q) { c.outputs.proxies = as_string(x, q); });
  });

  if (c.initial.kind == InitialLaw::Kind::kPointMass) {
    const std::size_t d = c.inline_model ? c.inline_model->dim : 1;
    if (c.initial.point.size() != d) {
      throw ConfigError("initial.point", "expected " + std::to_string(d) + " coordinates");
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("cannot read config file '" + path + "'");
  return parse_config(buffer.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  json j;
  j["model"] = c.inline_model ? inline_model_to_json(*c.inline_model) : json(c.model);
  j["regularity"] = json{{"mode", c.regularity.lipschitz ? "lipschitz" : "holder"}, {"beta", c.regularity.beta}};
  j["gamma1"] = c.gamma1;
  j["theta"] = c.theta;
  j["innovation"] = c.innovation == InnovationLaw::kStandardGaussian ? "gaussian" : "bernoulli";
  if (c.initial.kind == InitialLaw::Kind::kStandardNormal) {
    j["initial"] = "standard_normal";
  } else {
    j["initial"] = json{{"point", c.initial.point}};
  }
  j["n"] = c.n;
  j["mc"] = c.mc;
  j["a_grid"] = json{{"min", c.a_grid.min}, {"max", c.a_grid.max}, {"count", c.a_grid.count}};
  j["seed"] = c.seed;
  j["rho_grid_steps"] = c.rho_grid_steps;
  j["tuning"] = json{{"q", c.tuning.q}, {"q_hat", c.tuning.q_hat}, {"q_bar", c.tuning.q_bar}, {"e_n", c.tuning.e_n}};
  json proxies = json::object();
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) proxies[key] = *v;
  };
  put("nu_carre", c.proxies.nu_carre);
  put("nu_sigma2", c.proxies.nu_sigma2);
  put("sigma_sup", c.proxies.sigma_sup);
  put("grad_phi_sup", c.proxies.grad_phi_sup);
  put("theta_lip", c.proxies.theta_lip);
  put("alpha", c.proxies.alpha);
  proxies["p_confluence"] = c.proxies.p_confluence;
  j["proxies"] = proxies;
  j["proxies_file"] = c.proxies_file;
  j["carre_paths"] = c.carre_paths;
  j["divergence_limit"] = c.divergence_limit;
  j["threads"] = c.threads;
  j["outputs"] = json{{"deviations", c.outputs.deviations}, {"bounds", c.outputs.bounds},
                      {"figure_csv", c.outputs.figure_csv}, {"figure_svg", c.outputs.figure_svg},
                      {"trace", c.outputs.trace}, {"proxies", c.outputs.proxies}};
  return j.dump(2) + "\n";
}

void validate_for_run(const ExperimentConfig& c) {
  const ThetaVerdict verdict = validate_theta(c.schedule(), c.regularity_mode());
  if (!verdict.accepted) throw ConfigError("theta", verdict.message);
  if (c.mc < 1) throw ConfigError("mc", "must be >= 1");
  if (c.a_grid.count < 1) throw ConfigError("a_grid.count", "must be >= 1");
}

ModelBundle build_model(const ExperimentConfig& c) {
  if (!c.inline_model) {
    try {
      return find_model(c.model);
    } catch (const ConfigError& e) {
      throw ConfigError("model", e.what());
    }
  }
  const InlineModel& m = *c.inline_model;
  ExpressionModelSpec spec;
  spec.state_dim = m.dim;
  spec.noise_dim = m.noise_dim;
  spec.drift = m.drift;
  spec.diffusion = m.diffusion;
  spec.phi = m.phi;
  SearchBox box;
  for (std::size_t i = 0; i < m.dim; ++i) box.bounds.emplace_back(m.box_min[i], m.box_max[i]);
  box.points_per_dim = m.points_per_dim;
  return make_expression_bundle(spec, std::move(box));
}

CarreEstimates estimate_carre(const ExperimentConfig& c, const ModelBundle& bundle, unsigned threads) {
  const std::vector<Observable> observables{carre_observable(bundle.phi), sigma_norm2_observable()};
  auto estimates = estimate_invariant_averages(*bundle.model, observables, c.schedule(), c.n, c.carre_paths,
                                               c.seed ^ kCarreSeedMix, c.path_options(), threads);
  return CarreEstimates{std::move(estimates[0]), std::move(estimates[1])};
}

ResolvedProxies resolve_proxies(const ExperimentConfig& c, const ModelBundle& bundle, unsigned threads) {
  ProxyOverrides given = c.proxies;
  if (!c.proxies_file.empty()) {
    std::ifstream in(c.proxies_file, std::ios::binary);
    if (!in) throw IoError("cannot open proxies file '" + c.proxies_file + "'");
    json file;
    try {
      file = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("proxies_file", std::string("malformed JSON: ") + e.what());
    }
    expect_object(file, "proxies_file");
    ProxyOverrides from_file;
    read_proxy_fields(file, "proxies_file", from_file, false);
    // Inline overrides take precedence over the file.
    if (!given.nu_carre) given.nu_carre = from_file.nu_carre;
    if (!given.nu_sigma2) given.nu_sigma2 = from_file.nu_sigma2;
    if (!given.sigma_sup) given.sigma_sup = from_file.sigma_sup;
    if (!given.grad_phi_sup) given.grad_phi_sup = from_file.grad_phi_sup;
    if (!given.theta_lip) given.theta_lip = from_file.theta_lip;
    if (!given.alpha) given.alpha = from_file.alpha;
  }

  ResolvedProxies out;
  VarianceProxies& v = out.values;
  v.p_confluence = given.p_confluence;
  const DiffusionModel& model = *bundle.model;
  const TestFunction& phi = *bundle.phi;

  if (given.nu_carre && given.nu_sigma2) {
    v.nu_carre = *given.nu_carre;
    v.nu_sigma2 = *given.nu_sigma2;
  } else {
    CarreEstimates est = estimate_carre(c, bundle, threads);
    v.nu_carre = given.nu_carre.value_or(est.carre.mean);
    v.nu_sigma2 = given.nu_sigma2.value_or(est.sigma2.mean);
    if (!given.nu_carre) out.estimated.push_back("nu_carre");
    if (!given.nu_sigma2) out.estimated.push_back("nu_sigma2");
    out.carre = std::move(est.carre);
    out.sigma2 = std::move(est.sigma2);
  }

  if (given.sigma_sup) {
    v.sigma_sup = *given.sigma_sup;
  } else if (bundle.sigma_sup) {
    v.sigma_sup = *bundle.sigma_sup;
  } else {
    Workspace ws(model);
    v.sigma_sup = std::sqrt(grid_supremum([&](std::span<const double> x) { return sigma_norm2(model, x, ws); },
                                          bundle.box).value);
    out.estimated.push_back("sigma_sup");
  }

  if (given.grad_phi_sup) {
    v.grad_phi_sup = *given.grad_phi_sup;
  } else if (bundle.grad_phi_sup) {
    v.grad_phi_sup = *bundle.grad_phi_sup;
  } else {
    std::vector<double> g(phi.dim());
    auto norm2 = [&](std::span<const double> x) {
      phi.gradient(x, g);
      double s = 0.0;
      for (double gi : g) s += gi * gi;
      return s;
    };
    v.grad_phi_sup = std::sqrt(grid_supremum(norm2, bundle.box).value);
    out.estimated.push_back("grad_phi_sup");
  }

  if (given.alpha) {
    v.alpha = *given.alpha;
  } else {
    out.confluence = estimate_confluence_alpha(model, v.p_confluence, bundle.box);
    if (!out.confluence->certified) {
      throw ConfigError("proxies.alpha", "confluence constant not certified for p=" + format_double(v.p_confluence) +
                                             " (alpha estimate " + format_double(out.confluence->alpha) + ")");
    }
    v.alpha = out.confluence->alpha;
    out.estimated.push_back("alpha");
  }

  if (given.theta_lip) {
    v.theta_lip = *given.theta_lip;
  } else {
    if (bundle.source_lip) {
      out.source_lip = *bundle.source_lip;
    } else {
      Workspace ws(model);
      out.source_lip = grid_lipschitz([&](std::span<const double> x) { return carre_source(model, phi, x, ws); },
                                      bundle.box);
    }
    v.theta_lip = theta_lipschitz_bound(out.source_lip, v.alpha);
    out.estimated.push_back("theta_lip");
  }

  v.validate();
  return out;
}

std::string proxies_to_json(const VarianceProxies& p) {
  const json j{{"nu_carre", p.nu_carre},   {"nu_sigma2", p.nu_sigma2}, {"sigma_sup", p.sigma_sup},
               {"grad_phi_sup", p.grad_phi_sup}, {"theta_lip", p.theta_lip}, {"alpha", p.alpha}};
  return j.dump(2) + "\n";
}

}  // namespace ergconc
