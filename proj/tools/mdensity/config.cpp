#include "mdensity/config.hpp"

#include <fstream>
#include <regex>
#include <set>

namespace mdensity::cli {

using nlohmann::json;

Command parse_command(const std::string& name) {
  if (name == "demo-figure1") return Command::demo_figure1;
  if (name == "sample") return Command::sample;
  if (name == "train") return Command::train;
  if (name == "validate") return Command::validate;
  if (name == "concentration") return Command::concentration;
  throw ConfigError("unknown command '" + name + "'");
}

std::string to_string(Command command) {
  switch (command) {
    case Command::demo_figure1: return "demo-figure1";
    case Command::sample: return "sample";
    case Command::train: return "train";
    case Command::validate: return "validate";
    case Command::concentration: return "concentration";
  }
  return "?";
}

GaussianMixturePrior PriorSpec::build() const {
  std::vector<Vec> mu;
  for (const auto& m : means) mu.push_back(Eigen::Map<const Vec>(m.data(), static_cast<Eigen::Index>(m.size())));
  return GaussianMixturePrior(weights, std::move(mu), stds);
}

namespace {

void reject_unknown(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) throw ConfigError("unknown key '" + item.key() + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& dst, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

PriorSpec parse_prior(const json& j) {
  reject_unknown(j, "prior", {"weights", "means", "stds"});
  PriorSpec p;
  read(j, "weights", p.weights, "prior");
  read(j, "stds", p.stds, "prior");
  if (j.contains("means")) {
    for (const auto& m : j.at("means")) {
      if (m.is_number()) p.means.push_back({m.get<double>()});
      else if (m.is_array()) p.means.push_back(m.get<std::vector<double>>());
      else throw ConfigError("prior.means entries must be numbers or arrays");
    }
  }
  return p;
}

PriorSpec default_prior() { return PriorSpec{{0.5, 0.5}, {{-2.0}, {2.0}}, {0.1, 0.1}}; }

}  // namespace

NoiseSpec parse_noise(const json& j) {
  NoiseSpec spec;
  if (j.is_string()) {
    spec.text = j.get<std::string>();
    static const std::regex shorthand(R"(^\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*x\s*([0-9]+)\s*$)");
    std::smatch m;
    if (!std::regex_match(spec.text, m, shorthand))
      throw ConfigError("noise shorthand must look like '<sigma>x<M>', got '" + spec.text + "'");
    const double sigma = std::stod(m[1].str());
    const int M = std::stoi(m[2].str());
    if (M < 1) throw ConfigError("noise shorthand needs M >= 1");
    spec.sigmas.assign(static_cast<std::size_t>(M), sigma);
  } else if (j.is_array()) {
    try {
      spec.sigmas = j.get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("noise list: ") + e.what());
    }
    spec.text = j.dump();
  } else if (j.is_number()) {
    spec.sigmas = {j.get<double>()};
    spec.text = j.dump();
  } else {
    throw ConfigError("noise must be a '<sigma>x<M>' string or a list of sigmas");
  }
  return spec;
}

RunConfig config_from_json(Command command, const json& j) {
  RunConfig c;
  c.command = command;
  if (command == Command::demo_figure1 || command == Command::sample) {
    c.prior = default_prior();
    c.noise = parse_noise("1x2");
  } else if (command == Command::train) {
    c.prior = default_prior();
    c.noise = parse_noise("1x4");
  } else if (command == Command::concentration) {
    c.noise = parse_noise("1x16");
    c.concentration.congruent = parse_noise("0.25x1");
  }
  if (j.is_null()) return c;

  reject_unknown(j, "config",
                 {"seed", "out", "prior", "noise", "grid", "sampler", "train", "validate", "concentration", "comment"});
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("out")) {
    std::string out;
    read(j, "out", out, "config");
    c.out = out;
  }
  if (j.contains("prior")) c.prior = j.at("prior").is_null() ? std::nullopt : std::optional(parse_prior(j.at("prior")));
  if (j.contains("noise")) c.noise = parse_noise(j.at("noise"));

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    reject_unknown(g, "grid", {"min", "max", "n", "arrows"});
    read(g, "min", c.grid.lo, "grid");
    read(g, "max", c.grid.hi, "grid");
    read(g, "n", c.grid.n, "grid");
    read(g, "arrows", c.grid.arrows, "grid");
  }
  if (j.contains("sampler")) {
    const json& s = j.at("sampler");
    reject_unknown(s, "sampler", {"delta", "gamma", "u", "K", "jump_every", "integrator", "init", "net", "trace_svg"});
    read(s, "delta", c.sample.params.delta, "sampler");
    read(s, "gamma", c.sample.params.gamma, "sampler");
    read(s, "u", c.sample.params.u, "sampler");
    read(s, "K", c.sample.params.K, "sampler");
    read(s, "jump_every", c.sample.jump_every, "sampler");
    read(s, "trace_svg", c.sample.trace_svg, "sampler");
    try {
      std::string name;
      read(s, "integrator", name, "sampler");
      if (!name.empty()) c.sample.integrator = parse_integrator(name);
      name.clear();
      read(s, "init", name, "sampler");
      if (!name.empty()) c.sample.init = parse_init_scheme(name);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("sampler: ") + e.what());
    }
    if (s.contains("net")) {
      std::string net;
      read(s, "net", net, "sampler");
      c.sample.net = net;
    }
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown(t, "train", {"dataset", "widths", "steps", "batch", "lr", "resume", "eval_samples"});
    if (t.contains("dataset")) {
      const json& d = t.at("dataset");
      reject_unknown(d, "train.dataset", {"kind", "r_inner", "r_outer", "width"});
      read(d, "kind", c.train.dataset.kind, "train.dataset");
      read(d, "r_inner", c.train.dataset.r_inner, "train.dataset");
      read(d, "r_outer", c.train.dataset.r_outer, "train.dataset");
      read(d, "width", c.train.dataset.width, "train.dataset");
    }
    read(t, "widths", c.train.widths, "train");
    read(t, "steps", c.train.options.steps, "train");
    read(t, "batch", c.train.options.batch, "train");
    read(t, "lr", c.train.options.lr, "train");
    read(t, "eval_samples", c.train.eval_samples, "train");
    if (t.contains("resume")) {
      std::string resume;
      read(t, "resume", resume, "train");
      c.train.resume = resume;
    }
  }
  if (j.contains("validate")) {
    const json& v = j.at("validate");
    reject_unknown(v, "validate", {"corrupt_score", "sampler_steps", "concentration_trials"});
    read(v, "corrupt_score", c.validate.corrupt_score, "validate");
    read(v, "sampler_steps", c.validate.sampler_steps, "validate");
    read(v, "concentration_trials", c.validate.concentration_trials, "validate");
  }
  if (j.contains("concentration")) {
    const json& k = j.at("concentration");
    reject_unknown(k, "concentration", {"d", "trials", "congruent"});
    read(k, "d", c.concentration.d, "concentration");
    read(k, "trials", c.concentration.trials, "concentration");
    if (k.contains("congruent"))
      c.concentration.congruent = k.at("congruent").is_null() ? std::nullopt : std::optional(parse_noise(k.at("congruent")));
  }
  return c;
}

RunConfig load_config(Command command, const std::optional<std::filesystem::path>& path) {
  if (!path) return config_from_json(command, json());
  std::ifstream in(*path);
  if (!in) throw ConfigError("cannot open config file " + path->string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path->string() + ": " + e.what());
  }
  return config_from_json(command, j);
}

NoiseModel noise_model(const RunConfig& config, int d) {
  if (!config.noise) throw ConfigError("noise is required for " + to_string(config.command));
  try {
    return NoiseModel(config.noise->sigmas, d);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("noise: ") + e.what());
  }
}

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

int prior_dim(const RunConfig& c) {
  try {
    return c.prior->build().d();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("prior: ") + e.what());
  }
}

}  // namespace

void validate_config(const RunConfig& c) {
  switch (c.command) {
    case Command::demo_figure1: {
      require(c.prior.has_value(), "demo-figure1 needs a prior");
      require(prior_dim(c) == 1, "demo-figure1 needs a one-dimensional prior");
      const NoiseModel noise = noise_model(c, 1);
      require(noise.M() == 2 && noise.is_homogeneous(), "demo-figure1 needs a homogeneous M=2 noise model");
      require(c.grid.n >= 3 && c.grid.hi > c.grid.lo, "grid needs n >= 3 and max > min");
      require(c.grid.arrows >= 2, "grid.arrows must be >= 2");
      break;
    }
    case Command::sample: {
      require(c.sample.jump_every >= 1, "sampler.jump_every must be >= 1");
      try {
        c.sample.params.validate();
      } catch (const std::exception& e) {
        throw ConfigError(std::string("sampler: ") + e.what());
      }
      if (!c.sample.net) {
        require(c.prior.has_value(), "sample needs a prior or sampler.net");
        noise_model(c, prior_dim(c));
      } else {
        require(std::filesystem::exists(*c.sample.net), "net file not found: " + c.sample.net->string());
      }
      break;
    }
    case Command::train: {
      const std::string& kind = c.train.dataset.kind;
      require(kind == "gaussian_mixture" || kind == "two_rings",
              "train.dataset.kind must be gaussian_mixture or two_rings");
      int d = 2;
      if (kind == "gaussian_mixture") {
        require(c.prior.has_value(), "gaussian_mixture dataset needs a prior");
        d = prior_dim(c);
        require(d == 1 || d == 2, "gaussian_mixture dataset must be 1D or 2D");
      } else {
        require(c.train.dataset.r_inner > 0 && c.train.dataset.r_outer > 0 && c.train.dataset.width > 0,
                "two_rings radii and width must be positive");
      }
      const NoiseModel noise = noise_model(c, d);
      require(c.train.options.steps >= 1, "train.steps must be >= 1");
      require(c.train.options.batch >= 1, "train.batch must be >= 1");
      require(c.train.options.lr > 0.0, "train.lr must be positive");
      require(c.train.eval_samples >= 1, "train.eval_samples must be >= 1");
      if (!c.train.widths.empty()) {
        try {
          MlpScoreNet(c.train.widths, noise);
        } catch (const std::exception& e) {
          throw ConfigError(std::string("train.widths: ") + e.what());
        }
      }
      if (c.train.resume)
        require(std::filesystem::exists(*c.train.resume), "resume file not found: " + c.train.resume->string());
      break;
    }
    case Command::validate:
      require(c.validate.sampler_steps >= 10000, "validate.sampler_steps must be >= 10000");
      require(c.validate.concentration_trials >= 2, "validate.concentration_trials must be >= 2");
      break;
    case Command::concentration:
      require(c.concentration.d >= 1, "concentration.d must be >= 1");
      require(c.concentration.trials >= 1, "concentration.trials must be >= 1");
      noise_model(c, c.concentration.d);
      if (c.concentration.congruent) {
        try {
          NoiseModel(c.concentration.congruent->sigmas, c.concentration.d);
        } catch (const std::exception& e) {
          throw ConfigError(std::string("concentration.congruent: ") + e.what());
        }
      }
      break;
  }
}

json to_json(const RunConfig& c) {
  json j;
  j["command"] = to_string(c.command);
  j["seed"] = c.seed;
  j["out"] = c.out.string();
  if (c.prior) {
    j["prior"] = {{"weights", c.prior->weights}, {"means", c.prior->means}, {"stds", c.prior->stds}};
  }
  if (c.noise) j["noise"] = c.noise->sigmas;
  switch (c.command) {
    case Command::demo_figure1:
      j["grid"] = {{"min", c.grid.lo}, {"max", c.grid.hi}, {"n", c.grid.n}, {"arrows", c.grid.arrows}};
      break;
    case Command::sample: {
      json s = {{"delta", c.sample.params.delta},
                {"gamma", c.sample.params.gamma},
                {"u", c.sample.params.u},
                {"K", c.sample.params.K},
                {"jump_every", c.sample.jump_every},
                {"integrator", std::string(to_string(c.sample.integrator))},
                {"init", std::string(to_string(c.sample.init))},
                {"trace_svg", c.sample.trace_svg}};
      if (c.sample.net) s["net"] = c.sample.net->string();
      j["sampler"] = s;
      break;
    }
    case Command::train: {
      json t = {{"dataset",
                 {{"kind", c.train.dataset.kind},
                  {"r_inner", c.train.dataset.r_inner},
                  {"r_outer", c.train.dataset.r_outer},
                  {"width", c.train.dataset.width}}},
                {"widths", c.train.widths},
                {"steps", c.train.options.steps},
                {"batch", c.train.options.batch},
                {"lr", c.train.options.lr},
                {"eval_samples", c.train.eval_samples}};
      if (c.train.resume) t["resume"] = c.train.resume->string();
      j["train"] = t;
      break;
    }
    case Command::validate:
      j["validate"] = {{"corrupt_score", c.validate.corrupt_score},
                       {"sampler_steps", c.validate.sampler_steps},
                       {"concentration_trials", c.validate.concentration_trials}};
      break;
    case Command::concentration:
      j["concentration"] = {{"d", c.concentration.d}, {"trials", c.concentration.trials}};
      if (c.concentration.congruent) j["concentration"]["congruent"] = c.concentration.congruent->sigmas;
      break;
  }
  return j;
}

}  // namespace mdensity::cli
