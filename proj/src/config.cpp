#include "epifilter/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "epifilter/errors.hpp"

namespace epifilter {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& path, const std::string& what) {
  throw ValidationError("config: " + path + ": " + what);
}

void expect_keys(const json& node, const std::string& path, const std::set<std::string>& allowed) {
  if (!node.is_object()) bad_key(path, "expected an object");
  for (const auto& item : node.items()) {
    if (!allowed.contains(item.key())) bad_key(path + "." + item.key(), "unknown key");
  }
}

double get_number(const json& node, const std::string& path) {
  if (!node.is_number()) bad_key(path, "expected a number");
  return node.get<double>();
}

Prior parse_prior(const json& node, const std::string& path) {
  expect_keys(node, path, {"dist", "lo", "hi", "shape1", "shape2"});
  if (!node.contains("dist")) bad_key(path + ".dist", "missing");
  const std::string dist = node.at("dist").get<std::string>();
  if (dist == "uniform") {
    if (!node.contains("lo") || !node.contains("hi")) {
      bad_key(path, "uniform prior needs 'lo' and 'hi'");
    }
    if (node.contains("shape1") || node.contains("shape2")) {
      bad_key(path, "uniform prior does not take beta shapes");
    }
    return Prior::uniform(get_number(node.at("lo"), path + ".lo"),
                          get_number(node.at("hi"), path + ".hi"));
  }
  if (dist == "beta") {
    if (!node.contains("shape1") || !node.contains("shape2")) {
      bad_key(path, "beta prior needs 'shape1' and 'shape2'");
    }
    if (node.contains("lo") || node.contains("hi")) {
      bad_key(path, "beta prior does not take uniform bounds");
    }
    return Prior::beta(get_number(node.at("shape1"), path + ".shape1"),
                       get_number(node.at("shape2"), path + ".shape2"));
  }
  bad_key(path + ".dist", "must be 'uniform' or 'beta'");
}

json prior_to_json(const Prior& prior) {
  json node;
  if (prior.kind == Prior::Kind::uniform) {
    node["dist"] = "uniform";
    node["lo"] = prior.a;
    node["hi"] = prior.b;
  } else {
    node["dist"] = "beta";
    node["shape1"] = prior.a;
    node["shape2"] = prior.b;
  }
  return node;
}

void parse_priors(const json& node, PriorSpec* priors) {
  expect_keys(node, "priors", {"parameters", "states"});
  if (node.contains("parameters")) {
    const json& params = node.at("parameters");
    expect_keys(params, "priors.parameters", {"alpha", "beta", "lambda", "gamma", "phi_f"});
    if (params.contains("alpha")) priors->alpha = parse_prior(params.at("alpha"), "priors.parameters.alpha");
    if (params.contains("beta")) priors->beta = parse_prior(params.at("beta"), "priors.parameters.beta");
    if (params.contains("lambda")) priors->lambda = parse_prior(params.at("lambda"), "priors.parameters.lambda");
    if (params.contains("gamma")) priors->gamma = parse_prior(params.at("gamma"), "priors.parameters.gamma");
    if (params.contains("phi_f")) priors->phi_f = parse_prior(params.at("phi_f"), "priors.parameters.phi_f");
  }
  if (node.contains("states")) {
    const json& states = node.at("states");
    expect_keys(states, "priors.states", {"c", "e", "i", "r", "d"});
    if (states.contains("c")) priors->c = parse_prior(states.at("c"), "priors.states.c");
    if (states.contains("e")) priors->e = parse_prior(states.at("e"), "priors.states.e");
    if (states.contains("i")) priors->i = parse_prior(states.at("i"), "priors.states.i");
    if (states.contains("r")) priors->r = parse_prior(states.at("r"), "priors.states.r");
    if (states.contains("d")) priors->d = parse_prior(states.at("d"), "priors.states.d");
  }
}

void parse_filter(const json& node, FilterConfig* filter) {
  expect_keys(node, "filter",
              {"num_particles", "discount", "seed", "population", "rejection_cap", "resampling",
               "shrinkage", "workers"});
  if (node.contains("num_particles")) {
    const auto j = node.at("num_particles");
    if (!j.is_number_unsigned()) bad_key("filter.num_particles", "expected a positive integer");
    filter->num_particles = j.get<std::uint32_t>();
  }
  if (node.contains("discount")) filter->discount = get_number(node.at("discount"), "filter.discount");
  if (node.contains("seed")) {
    const auto j = node.at("seed");
    if (!j.is_number_unsigned()) bad_key("filter.seed", "expected a nonnegative integer");
    filter->seed = j.get<std::uint64_t>();
  }
  if (node.contains("population")) {
    const auto j = node.at("population");
    if (!j.is_number_unsigned()) bad_key("filter.population", "expected a positive integer");
    filter->population = j.get<std::uint64_t>();
  }
  if (node.contains("rejection_cap")) {
    const auto j = node.at("rejection_cap");
    if (!j.is_number_unsigned()) bad_key("filter.rejection_cap", "expected a positive integer");
    filter->rejection_cap = j.get<int>();
  }
  if (node.contains("resampling")) {
    const std::string scheme = node.at("resampling").get<std::string>();
    if (scheme == "multinomial") {
      filter->resampling = ResamplingScheme::multinomial;
    } else if (scheme == "systematic") {
      filter->resampling = ResamplingScheme::systematic;
    } else {
      bad_key("filter.resampling", "must be 'multinomial' or 'systematic'");
    }
  }
  if (node.contains("shrinkage")) {
    const std::string pairing = node.at("shrinkage").get<std::string>();
    if (pairing == "paper") {
      filter->shrinkage = ShrinkagePairing::paper;
    } else if (pairing == "liu_west") {
      filter->shrinkage = ShrinkagePairing::liu_west;
    } else {
      bad_key("filter.shrinkage", "must be 'paper' or 'liu_west'");
    }
  }
  if (node.contains("workers")) {
    const auto j = node.at("workers");
    if (!j.is_number_unsigned()) bad_key("filter.workers", "expected a positive integer");
    filter->workers = j.get<int>();
  }
}

void parse_observation(const json& node, ObservationLink* link) {
  expect_keys(node, "observation",
              {"b_i", "b_d", "zeta_i", "zeta_d", "sigma_i", "sigma_d", "mode"});
  if (node.contains("b_i")) link->b_i = get_number(node.at("b_i"), "observation.b_i");
  if (node.contains("b_d")) link->b_d = get_number(node.at("b_d"), "observation.b_d");
  if (node.contains("zeta_i")) link->zeta_i = get_number(node.at("zeta_i"), "observation.zeta_i");
  if (node.contains("zeta_d")) link->zeta_d = get_number(node.at("zeta_d"), "observation.zeta_d");
  if (node.contains("sigma_i")) link->sigma_i = get_number(node.at("sigma_i"), "observation.sigma_i");
  if (node.contains("sigma_d")) link->sigma_d = get_number(node.at("sigma_d"), "observation.sigma_d");
  if (node.contains("mode")) {
    const std::string mode = node.at("mode").get<std::string>();
    if (mode == "log-log") {
      link->mode = LinkMode::log_log;
    } else if (mode == "literal") {
      link->mode = LinkMode::literal;
    } else {
      bad_key("observation.mode", "must be 'log-log' or 'literal'");
    }
  }
}

void validate_config(const AppConfig& config) {
  config.priors.validate();
  config.filter.validate();
  if (!config.link.valid()) {
    throw ValidationError("config: observation: link constants must be positive");
  }
}

}  // namespace

AppConfig parse_config_text(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ValidationError(origin + ": " + err.what());
  }
  expect_keys(root, "<root>", {"priors", "filter", "observation"});

  AppConfig config;
  if (root.contains("priors")) parse_priors(root.at("priors"), &config.priors);
  if (root.contains("filter")) parse_filter(root.at("filter"), &config.filter);
  if (root.contains("observation")) parse_observation(root.at("observation"), &config.link);
  config.link.population = config.filter.population;
  validate_config(config);
  return config;
}

AppConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string serialize_config(const AppConfig& config) {
  json root;
  json params;
  params["alpha"] = prior_to_json(config.priors.alpha);
  params["beta"] = prior_to_json(config.priors.beta);
  params["lambda"] = prior_to_json(config.priors.lambda);
  params["gamma"] = prior_to_json(config.priors.gamma);
  params["phi_f"] = prior_to_json(config.priors.phi_f);
  json states;
  states["c"] = prior_to_json(config.priors.c);
  states["e"] = prior_to_json(config.priors.e);
  states["i"] = prior_to_json(config.priors.i);
  states["r"] = prior_to_json(config.priors.r);
  states["d"] = prior_to_json(config.priors.d);
  root["priors"]["parameters"] = std::move(params);
  root["priors"]["states"] = std::move(states);

  json filter;
  filter["num_particles"] = config.filter.num_particles;
  filter["discount"] = config.filter.discount;
  filter["seed"] = config.filter.seed;
  filter["population"] = config.filter.population;
  filter["rejection_cap"] = static_cast<unsigned>(config.filter.rejection_cap);
  filter["resampling"] =
      config.filter.resampling == ResamplingScheme::multinomial ? "multinomial" : "systematic";
  filter["shrinkage"] =
      config.filter.shrinkage == ShrinkagePairing::paper ? "paper" : "liu_west";
  filter["workers"] = static_cast<unsigned>(config.filter.workers);
  root["filter"] = std::move(filter);

  json observation;
  observation["b_i"] = config.link.b_i;
  observation["b_d"] = config.link.b_d;
  observation["zeta_i"] = config.link.zeta_i;
  observation["zeta_d"] = config.link.zeta_d;
  observation["sigma_i"] = config.link.sigma_i;
  observation["sigma_d"] = config.link.sigma_d;
  observation["mode"] = config.link.mode == LinkMode::log_log ? "log-log" : "literal";
  root["observation"] = std::move(observation);

  return root.dump(2) + "\n";
}

AppConfig load_default_config() {
  const char* path = std::getenv("EPIFILTER_CONFIG");
  if (path != nullptr && *path != '\0') return parse_config(path);
  return AppConfig{};
}

}  // namespace epifilter
