#include "a2sbnn/experiment/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "a2sbnn/errors.hpp"

namespace a2sbnn::experiment {
namespace {

using nlohmann::json;

// Reads keys from one JSON object, rejecting anything not consumed.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where() + "." + key + " has the wrong type");
    }
  }

  void read_size(const char* key, std::size_t& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
      throw ConfigError(where() + "." + key + " must be a non-negative integer");
    }
    out = it->get<std::size_t>();
  }

  void read_double(const char* key, double& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_number()) throw ConfigError(where() + "." + key + " must be a number");
    out = it->get<double>();
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown key " + where() + "." + it.key());
    }
  }

  std::string where() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

model::ModelConfig ExperimentConfig::model_config() const {
  model::ModelConfig m;
  m.embedding = model::EmbeddingConfig::regular(centers_per_side, tau);
  m.hidden_width = hidden_width;
  m.elu_alpha = elu_alpha;
  m.bn_momentum = bn_momentum;
  m.bn_eps = bn_eps;
  return m;
}

void ExperimentConfig::validate() const {
  if (theta_grid.empty()) throw ConfigError("theta_grid must not be empty");
  for (double t : theta_grid) {
    if (!(t >= 1.0) || !std::isfinite(t)) throw ConfigError("every theta must be >= 1");
  }
  if (std::set<double>(theta_grid.begin(), theta_grid.end()).size() != theta_grid.size()) {
    throw ConfigError("theta_grid contains duplicates");
  }
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("seeds contains duplicates");
  }
  if (grid_size < 2) throw ConfigError("field.grid_size must be >= 2");
  if (centers_per_side == 0) throw ConfigError("model.centers_per_side must be >= 1");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  if (shapiro_subsample < 3 || shapiro_subsample > 5000) {
    throw ConfigError("shapiro.subsample must lie in [3, 5000]");
  }
  const std::size_t n = grid_size * grid_size;
  if (shapiro_full_grid ? n > 5000 : shapiro_subsample > n) {
    throw ConfigError("shapiro sample size exceeds the grid or the test's 5000-point limit");
  }
  try {
    field.validate();
    model_config().validate();
    copula::A2Params probe = copula;
    for (double t : theta_grid) {
      probe.theta = t;
      probe.validate();
    }
    calibration.validate(n);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  ObjectReader top(j, "config");
  top.read("theta_grid", cfg.theta_grid);
  top.read("seeds", cfg.seeds);
  std::string out_dir = cfg.output_dir.string();
  top.read("output_dir", out_dir);
  cfg.output_dir = out_dir;
  top.read("emit_plots", cfg.emit_plots);
  top.read_size("threads", cfg.threads);

  if (const json* f = top.child("field")) {
    ObjectReader r(*f, "config.field");
    r.read_size("grid_size", cfg.grid_size);
    r.read_double("kernel_variance", cfg.field.kernel_variance);
    r.read_double("length_scale", cfg.field.length_scale);
    r.read_double("t_dof", cfg.field.t_dof);
    r.read_double("noise_scale", cfg.field.noise_scale);
    r.read_double("jitter", cfg.field.jitter);
    r.finish();
  }
  if (const json* m = top.child("model")) {
    ObjectReader r(*m, "config.model");
    r.read_size("centers_per_side", cfg.centers_per_side);
    r.read_double("tau", cfg.tau);
    r.read_size("hidden_width", cfg.hidden_width);
    r.read_double("elu_alpha", cfg.elu_alpha);
    r.read_double("bn_momentum", cfg.bn_momentum);
    r.read_double("bn_eps", cfg.bn_eps);
    r.finish();
  }
  if (const json* c = top.child("copula")) {
    ObjectReader r(*c, "config.copula");
    r.read_double("scale", cfg.copula.scale);
    r.read_double("clip_epsilon", cfg.copula.clip_epsilon);
    r.read_double("clamp_lo", cfg.copula.clamp_lo);
    r.read_double("clamp_hi", cfg.copula.clamp_hi);
    r.finish();
  }
  if (const json* c = top.child("calibration")) {
    ObjectReader r(*c, "config.calibration");
    auto& k = cfg.calibration;
    r.read_double("lambda_w", k.lambda_w);
    r.read_double("lambda_moment", k.lambda_moment);
    r.read_double("lambda_corr", k.lambda_corr);
    r.read_double("gp_coefficient", k.gp_coefficient);
    r.read_size("critic_steps_per_update", k.critic_steps_per_update);
    r.read_double("learning_rate", k.learning_rate);
    r.read_double("critic_learning_rate", k.critic_learning_rate);
    r.read_size("iterations", k.iterations);
    r.read_size("batch_size", k.batch_size);
    r.read_size("critic_hidden", k.critic_hidden);
    r.read_double("critic_leaky_slope", k.critic_leaky_slope);
    r.read("moment_includes_variance", k.moment_includes_variance);
    r.read_size("eval_every", k.eval_every);
    r.finish();
  }
  if (const json* s = top.child("shapiro")) {
    ObjectReader r(*s, "config.shapiro");
    r.read_size("subsample", cfg.shapiro_subsample);
    r.read("full_grid", cfg.shapiro_full_grid);
    r.finish();
  }
  top.finish();
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  const auto& k = cfg.calibration;
  return json{
      {"theta_grid", cfg.theta_grid},
      {"seeds", cfg.seeds},
      {"output_dir", cfg.output_dir.string()},
      {"emit_plots", cfg.emit_plots},
      {"threads", cfg.threads},
      {"field",
       {{"grid_size", cfg.grid_size},
        {"kernel_variance", cfg.field.kernel_variance},
        {"length_scale", cfg.field.length_scale},
        {"t_dof", cfg.field.t_dof},
        {"noise_scale", cfg.field.noise_scale},
        {"jitter", cfg.field.jitter}}},
      {"model",
       {{"centers_per_side", cfg.centers_per_side},
        {"tau", cfg.tau},
        {"hidden_width", cfg.hidden_width},
        {"elu_alpha", cfg.elu_alpha},
        {"bn_momentum", cfg.bn_momentum},
        {"bn_eps", cfg.bn_eps}}},
      {"copula",
       {{"scale", cfg.copula.scale},
        {"clip_epsilon", cfg.copula.clip_epsilon},
        {"clamp_lo", cfg.copula.clamp_lo},
        {"clamp_hi", cfg.copula.clamp_hi}}},
      {"calibration",
       {{"lambda_w", k.lambda_w},
        {"lambda_moment", k.lambda_moment},
        {"lambda_corr", k.lambda_corr},
        {"gp_coefficient", k.gp_coefficient},
        {"critic_steps_per_update", k.critic_steps_per_update},
        {"learning_rate", k.learning_rate},
        {"critic_learning_rate", k.critic_learning_rate},
        {"iterations", k.iterations},
        {"batch_size", k.batch_size},
        {"critic_hidden", k.critic_hidden},
        {"critic_leaky_slope", k.critic_leaky_slope},
        {"moment_includes_variance", k.moment_includes_variance},
        {"eval_every", k.eval_every}}},
      {"shapiro", {{"subsample", cfg.shapiro_subsample}, {"full_grid", cfg.shapiro_full_grid}}},
  };
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  ExperimentConfig cfg = config_from_json(j);
  cfg.validate();
  return cfg;
}

}  // namespace a2sbnn::experiment
