#include "dsgrl/train_config.hpp"

#include <json.hpp>

#include "dsgrl/error.hpp"

namespace dsgrl {

namespace {

using json = nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double get_num(const json& obj, const char* key, double fallback,
               const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number())
    throw ConfigError(where + "." + key + " must be a number");
  return obj[key].get<double>();
}

index_t get_int(const json& obj, const char* key, index_t fallback,
                const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer())
    throw ConfigError(where + "." + key + " must be an integer");
  return obj[key].get<index_t>();
}

bool get_bool(const json& obj, const char* key, bool fallback,
              const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean())
    throw ConfigError(where + "." + key + " must be a boolean");
  return obj[key].get<bool>();
}

std::string get_str(const json& obj, const char* key, const std::string& fallback,
                    const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string())
    throw ConfigError(where + "." + key + " must be a string");
  return obj[key].get<std::string>();
}

}  // namespace

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Feature: return "feature";
    case Mode::Topology: return "topology";
    case Mode::Combined: return "combined";
  }
  return "feature";
}

Mode mode_from_name(const std::string& name) {
  if (name == "feature") return Mode::Feature;
  if (name == "topology") return Mode::Topology;
  if (name == "combined") return Mode::Combined;
  throw ConfigError("unknown mode '" + name +
                    "' (expected feature, topology or combined)");
}

void TrainConfig::validate() const {
  if (d < 1 || d1 < 1) throw ConfigError("config: d and d1 must be >= 1");
  if (encoder_hidden < 0 || aug_hidden < 0)
    throw ConfigError("config: widths must be non-negative");
  if (encoder_layers < 1 || feature_aug_layers < 1 || topo_layers < 1)
    throw ConfigError("config: depths must be >= 1");
  if (epochs < 0) throw ConfigError("config: epochs must be >= 0");
  if (batch < 0) throw ConfigError("config: batch must be >= 0");
  if (aprime_refresh < 1) throw ConfigError("config: aprime_refresh must be >= 1");
  if (adam.lr <= 0.0) throw ConfigError("config: learning rate must be > 0");
  if (weights.alpha < 0 || weights.beta < 0 || weights.gamma < 0 ||
      weights.lambda < 0)
    throw ConfigError("config: loss weights must be non-negative");
  if (weights.epsilon <= 0) throw ConfigError("config: epsilon must be > 0");
}

std::string train_config_to_json(const TrainConfig& cfg, int indent) {
  json j;
  j["mode"] = mode_name(cfg.mode);
  j["model"] = {
      {"d1", cfg.d1},
      {"d", cfg.d},
      {"encoder_hidden", cfg.encoder_hidden},
      {"aug_hidden", cfg.aug_hidden},
      {"encoder_layers", cfg.encoder_layers},
      {"feature_aug_layers", cfg.feature_aug_layers},
      {"topo_layers", cfg.topo_layers},
  };
  j["loss"] = {
      {"alpha", cfg.weights.alpha},
      {"beta", cfg.weights.beta},
      {"gamma", cfg.weights.gamma},
      {"lambda", cfg.weights.lambda},
      {"epsilon", cfg.weights.epsilon},
      {"latent_reg", cfg.latent_reg == LatentReg::Vic ? "vic" : "ortho"},
      {"invariance",
       cfg.invariance_form == InvarianceForm::Frobenius ? "frobenius"
                                                        : "mean_squared"},
  };
  j["optimizer"] = {
      {"lr", cfg.adam.lr},
      {"beta1", cfg.adam.beta1},
      {"beta2", cfg.adam.beta2},
      {"eps", cfg.adam.eps},
  };
  j["train"] = {
      {"epochs", cfg.epochs},
      {"seed", cfg.seed},
      {"batch", cfg.batch},
      {"untrained", cfg.untrained},
      {"aprime_refresh", cfg.aprime_refresh},
      {"readout", cfg.readout == ReadoutMode::Mean ? "mean" : "sum"},
  };
  return indent >= 0 ? j.dump(indent) : j.dump();
}

TrainConfig train_config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  reject_unknown(j, {"mode", "model", "loss", "optimizer", "train"}, "config");

  TrainConfig cfg;
  if (j.contains("mode")) {
    if (!j["mode"].is_string()) throw ConfigError("config.mode must be a string");
    cfg.mode = mode_from_name(j["mode"].get<std::string>());
  }

  if (j.contains("model")) {
    const json& m = j["model"];
    if (!m.is_object()) throw ConfigError("config.model must be an object");
    reject_unknown(m,
                   {"d1", "d", "encoder_hidden", "aug_hidden", "encoder_layers",
                    "feature_aug_layers", "topo_layers"},
                   "config.model");
    cfg.d1 = get_int(m, "d1", cfg.d1, "config.model");
    cfg.d = get_int(m, "d", cfg.d, "config.model");
    cfg.encoder_hidden = get_int(m, "encoder_hidden", cfg.encoder_hidden, "config.model");
    cfg.aug_hidden = get_int(m, "aug_hidden", cfg.aug_hidden, "config.model");
    cfg.encoder_layers = get_int(m, "encoder_layers", cfg.encoder_layers, "config.model");
    cfg.feature_aug_layers =
        get_int(m, "feature_aug_layers", cfg.feature_aug_layers, "config.model");
    cfg.topo_layers = get_int(m, "topo_layers", cfg.topo_layers, "config.model");
  }

  if (j.contains("loss")) {
    const json& l = j["loss"];
    if (!l.is_object()) throw ConfigError("config.loss must be an object");
    reject_unknown(l,
                   {"alpha", "beta", "gamma", "lambda", "epsilon", "latent_reg",
                    "invariance"},
                   "config.loss");
    cfg.weights.alpha = get_num(l, "alpha", cfg.weights.alpha, "config.loss");
    cfg.weights.beta = get_num(l, "beta", cfg.weights.beta, "config.loss");
    cfg.weights.gamma = get_num(l, "gamma", cfg.weights.gamma, "config.loss");
    cfg.weights.lambda = get_num(l, "lambda", cfg.weights.lambda, "config.loss");
    cfg.weights.epsilon = get_num(l, "epsilon", cfg.weights.epsilon, "config.loss");
    std::string lr = get_str(l, "latent_reg", "vic", "config.loss");
    if (lr == "vic") cfg.latent_reg = LatentReg::Vic;
    else if (lr == "ortho") cfg.latent_reg = LatentReg::Ortho;
    else throw ConfigError("config.loss.latent_reg must be 'vic' or 'ortho'");
    std::string inv = get_str(l, "invariance", "frobenius", "config.loss");
    if (inv == "frobenius") cfg.invariance_form = InvarianceForm::Frobenius;
    else if (inv == "mean_squared") cfg.invariance_form = InvarianceForm::MeanSquared;
    else throw ConfigError("config.loss.invariance must be 'frobenius' or 'mean_squared'");
  }

  if (j.contains("optimizer")) {
    const json& o = j["optimizer"];
    if (!o.is_object()) throw ConfigError("config.optimizer must be an object");
    reject_unknown(o, {"lr", "beta1", "beta2", "eps"}, "config.optimizer");
    cfg.adam.lr = get_num(o, "lr", cfg.adam.lr, "config.optimizer");
    cfg.adam.beta1 = get_num(o, "beta1", cfg.adam.beta1, "config.optimizer");
    cfg.adam.beta2 = get_num(o, "beta2", cfg.adam.beta2, "config.optimizer");
    cfg.adam.eps = get_num(o, "eps", cfg.adam.eps, "config.optimizer");
  }

  if (j.contains("train")) {
    const json& t = j["train"];
    if (!t.is_object()) throw ConfigError("config.train must be an object");
    reject_unknown(t, {"epochs", "seed", "batch", "untrained", "aprime_refresh", "readout"},
                   "config.train");
    cfg.epochs = get_int(t, "epochs", cfg.epochs, "config.train");
    if (t.contains("seed")) {
      if (!t["seed"].is_number_unsigned() && !t["seed"].is_number_integer())
        throw ConfigError("config.train.seed must be an integer");
      cfg.seed = t["seed"].get<std::uint64_t>();
    }
    cfg.batch = get_int(t, "batch", cfg.batch, "config.train");
    cfg.untrained = get_bool(t, "untrained", cfg.untrained, "config.train");
    cfg.aprime_refresh =
        get_int(t, "aprime_refresh", cfg.aprime_refresh, "config.train");
    std::string ro = get_str(t, "readout", "mean", "config.train");
    if (ro == "mean") cfg.readout = ReadoutMode::Mean;
    else if (ro == "sum") cfg.readout = ReadoutMode::Sum;
    else throw ConfigError("config.train.readout must be 'mean' or 'sum'");
  }

  cfg.validate();
  return cfg;
}

}  // namespace dsgrl
