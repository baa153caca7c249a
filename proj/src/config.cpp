#include "rattn/config.hpp"

#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "rattn/io.hpp"

namespace rattn {

namespace {

std::string trim(const std::string& s) {
  const size_t first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const size_t last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  throw std::invalid_argument("config: key '" + key + "' has value '" + value +
                              "', expected " + expected);
}

double parse_double(const std::string& key, const std::string& value) {
  size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    bad_value(key, value, "a number");
  }
  if (used != value.size()) bad_value(key, value, "a number");
  return out;
}

long long parse_int(const std::string& key, const std::string& value) {
  size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(value, &used);
  } catch (const std::exception&) {
    bad_value(key, value, "an integer");
  }
  if (used != value.size()) bad_value(key, value, "an integer");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value, "true or false");
}

KernelKind parse_kernel(const std::string& key, const std::string& value) {
  if (value == "rbf-median") return KernelKind::rbf_median;
  if (value == "rbf-fixed") return KernelKind::rbf_fixed;
  if (value == "cosine") return KernelKind::cosine;
  bad_value(key, value, "rbf-median, rbf-fixed, or cosine");
}

PriorKind parse_prior(const std::string& key, const std::string& value) {
  if (value == "uniform") return PriorKind::uniform;
  if (value == "gaussian") return PriorKind::gaussian;
  bad_value(key, value, "uniform or gaussian");
}

RegKind parse_reg_kind(const std::string& key, const std::string& value) {
  if (value == "none") return RegKind::none;
  if (value == "frobenius") return RegKind::frobenius;
  if (value == "disagreement") return RegKind::disagreement;
  if (value == "cosine") return RegKind::cosine_param;
  bad_value(key, value, "none, frobenius, disagreement, or cosine");
}

CosineVariant parse_variant(const std::string& key, const std::string& value) {
  if (value == "plain") return CosineVariant::plain;
  if (value == "swap") return CosineVariant::swap_ij;
  if (value == "swap-smooth") return CosineVariant::swap_ij_smooth;
  bad_value(key, value, "plain, swap, or swap-smooth");
}

std::string kernel_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::rbf_median: return "rbf-median";
    case KernelKind::rbf_fixed: return "rbf-fixed";
    case KernelKind::cosine: return "cosine";
  }
  return "rbf-median";
}

std::string prior_name(PriorKind kind) {
  return kind == PriorKind::uniform ? "uniform" : "gaussian";
}

std::string reg_kind_name(RegKind kind) {
  switch (kind) {
    case RegKind::none: return "none";
    case RegKind::frobenius: return "frobenius";
    case RegKind::disagreement: return "disagreement";
    case RegKind::cosine_param: return "cosine";
  }
  return "none";
}

std::string variant_name(CosineVariant variant) {
  switch (variant) {
    case CosineVariant::plain: return "plain";
    case CosineVariant::swap_ij: return "swap";
    case CosineVariant::swap_ij_smooth: return "swap-smooth";
  }
  return "plain";
}

double default_lambda(RegKind kind) {
  return kind == RegKind::cosine_param ? 0.1 : 1.0;
}

}  // namespace

UpdateRule parse_rule(const std::string& name) {
  if (name == "plain") return UpdateRule::plain;
  if (name == "svgd") return UpdateRule::svgd;
  if (name == "spos") return UpdateRule::spos;
  if (name == "sgld") return UpdateRule::sgld;
  throw std::invalid_argument("unknown update rule '" + name +
                              "' (expected plain, svgd, spos, or sgld)");
}

std::string rule_name(UpdateRule rule) {
  switch (rule) {
    case UpdateRule::plain: return "plain";
    case UpdateRule::svgd: return "svgd";
    case UpdateRule::spos: return "spos";
    case UpdateRule::sgld: return "sgld";
  }
  return "plain";
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  bool lambda_seen = false;

  std::istringstream lines(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(lines, raw)) {
    ++line_no;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": empty key or value");
    }

    if (key == "task.vocab") config.task.vocab = parse_int(key, value);
    else if (key == "task.aspects") config.task.aspects = parse_int(key, value);
    else if (key == "task.tokens_per_aspect") config.task.tokens_per_aspect = parse_int(key, value);
    else if (key == "task.noise_fraction") config.task.noise_fraction = parse_double(key, value);
    else if (key == "task.min_len") config.task.min_len = parse_int(key, value);
    else if (key == "task.max_len") config.task.max_len = parse_int(key, value);
    else if (key == "task.classes") config.task.classes = parse_int(key, value);
    else if (key == "task.train_examples") config.task.train_examples = parse_int(key, value);
    else if (key == "task.val_examples") config.task.val_examples = parse_int(key, value);
    else if (key == "task.test_examples") config.task.test_examples = parse_int(key, value);
    else if (key == "task.seed") config.task.seed = static_cast<uint64_t>(parse_int(key, value));
    else if (key == "data.path") config.data_path = value;
    else if (key == "model.d") config.train.d = parse_int(key, value);
    else if (key == "model.d_a") config.train.d_a = parse_int(key, value);
    else if (key == "model.heads") config.train.m = parse_int(key, value);
    else if (key == "train.rule") config.train.sampler.rule = parse_rule(value);
    else if (key == "train.epochs") config.train.epochs = static_cast<int>(parse_int(key, value));
    else if (key == "train.batch_size") config.train.batch_size = parse_int(key, value);
    else if (key == "train.lr") config.train.omega.lr = parse_double(key, value);
    else if (key == "train.clip_norm") config.train.clip_norm = parse_double(key, value);
    else if (key == "train.stepsize") config.train.sampler.stepsize = parse_double(key, value);
    else if (key == "train.stepsize_decay") config.train.sampler.stepsize_decay = parse_double(key, value);
    else if (key == "train.alpha") config.train.sampler.repulsive_weight = parse_double(key, value);
    else if (key == "train.beta_inv") config.train.sampler.beta_inv = parse_double(key, value);
    else if (key == "train.likelihood_scale") config.train.sampler.likelihood_scale = parse_double(key, value);
    else if (key == "train.kernel") config.train.sampler.kernel.kind = parse_kernel(key, value);
    else if (key == "train.bandwidth") config.train.sampler.kernel.bandwidth = parse_double(key, value);
    else if (key == "train.prior") config.train.sampler.prior.kind = parse_prior(key, value);
    else if (key == "train.prior_sigma") config.train.sampler.prior.sigma = parse_double(key, value);
    else if (key == "train.particles_adam") config.train.particles_use_adam = parse_bool(key, value);
    else if (key == "train.allow_adaptive_spos") config.train.sampler.allow_adaptive_spos = parse_bool(key, value);
    else if (key == "train.record_timing") config.train.record_timing = parse_bool(key, value);
    else if (key == "reg.kind") config.train.reg.kind = parse_reg_kind(key, value);
    else if (key == "reg.lambda") { config.train.reg.lambda = parse_double(key, value); lambda_seen = true; }
    else if (key == "reg.variant") config.train.reg.variant = parse_variant(key, value);
    else if (key == "run.seeds") config.seed_count = static_cast<int>(parse_int(key, value));
    else if (key == "run.base_seed") config.base_seed = static_cast<uint64_t>(parse_int(key, value));
    else if (key == "metrics.calibration") config.metrics.calibration = parse_bool(key, value);
    else if (key == "metrics.redundancy") config.metrics.redundancy = parse_bool(key, value);
    else if (key == "metrics.entropy") config.metrics.entropy = parse_bool(key, value);
    else if (key == "metrics.redundancy_threshold") config.redundancy_threshold = parse_double(key, value);
    else {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
    }
  }

  if (!lambda_seen) {
    config.train.reg.lambda = default_lambda(config.train.reg.kind);
  }
  if (config.seed_count < 1) {
    throw std::invalid_argument("config: run.seeds must be >= 1");
  }
  if (config.train.m < 1) {
    throw std::invalid_argument("config: model.heads must be >= 1");
  }
  return config;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw std::invalid_argument("config file does not exist: " + path.string());
  }
  try {
    return parse_config(read_text(path));
  } catch (const std::invalid_argument& err) {
    throw std::invalid_argument(path.string() + ": " + err.what());
  }
}

std::string render_config(const ExperimentConfig& config) {
  std::string out;
  auto put = [&](const std::string& key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  put("task.vocab", std::to_string(config.task.vocab));
  put("task.aspects", std::to_string(config.task.aspects));
  put("task.tokens_per_aspect", std::to_string(config.task.tokens_per_aspect));
  put("task.noise_fraction", format_double(config.task.noise_fraction));
  put("task.min_len", std::to_string(config.task.min_len));
  put("task.max_len", std::to_string(config.task.max_len));
  put("task.classes", std::to_string(config.task.classes));
  put("task.train_examples", std::to_string(config.task.train_examples));
  put("task.val_examples", std::to_string(config.task.val_examples));
  put("task.test_examples", std::to_string(config.task.test_examples));
  put("task.seed", std::to_string(config.task.seed));
  if (!config.data_path.empty()) put("data.path", config.data_path);
  put("model.d", std::to_string(config.train.d));
  put("model.d_a", std::to_string(config.train.d_a));
  put("model.heads", std::to_string(config.train.m));
  put("train.rule", rule_name(config.train.sampler.rule));
  put("train.epochs", std::to_string(config.train.epochs));
  put("train.batch_size", std::to_string(config.train.batch_size));
  put("train.lr", format_double(config.train.omega.lr));
  put("train.clip_norm", format_double(config.train.clip_norm));
  put("train.stepsize", format_double(config.train.sampler.stepsize));
  put("train.stepsize_decay", format_double(config.train.sampler.stepsize_decay));
  put("train.alpha", format_double(config.train.sampler.repulsive_weight));
  put("train.beta_inv", format_double(config.train.sampler.beta_inv));
  put("train.likelihood_scale", format_double(config.train.sampler.likelihood_scale));
  put("train.kernel", kernel_name(config.train.sampler.kernel.kind));
  put("train.bandwidth", format_double(config.train.sampler.kernel.bandwidth));
  put("train.prior", prior_name(config.train.sampler.prior.kind));
  put("train.prior_sigma", format_double(config.train.sampler.prior.sigma));
  put("train.particles_adam", config.train.particles_use_adam ? "true" : "false");
  put("train.allow_adaptive_spos", config.train.sampler.allow_adaptive_spos ? "true" : "false");
  put("train.record_timing", config.train.record_timing ? "true" : "false");
  put("reg.kind", reg_kind_name(config.train.reg.kind));
  put("reg.lambda", format_double(config.train.reg.lambda));
  put("reg.variant", variant_name(config.train.reg.variant));
  put("run.seeds", std::to_string(config.seed_count));
  put("run.base_seed", std::to_string(config.base_seed));
  put("metrics.calibration", config.metrics.calibration ? "true" : "false");
  put("metrics.redundancy", config.metrics.redundancy ? "true" : "false");
  put("metrics.entropy", config.metrics.entropy ? "true" : "false");
  put("metrics.redundancy_threshold", format_double(config.redundancy_threshold));
  return out;
}

}  // namespace rattn
