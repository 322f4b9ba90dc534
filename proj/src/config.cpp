#include "yaware/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "yaware/errors.hpp"

namespace yaware {

namespace {

void reject_unknown_keys(const nlohmann::json& obj,
                         const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key))
      throw ValidationError("unknown config key \"" + where + key + "\"");
}

template <class T>
void read_field(const nlohmann::json& obj, const char* key, T& out,
                const std::string& where) {
  if (!obj.contains(key) || obj[key].is_null()) return;
  try {
    out = obj[key].get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config key \"" + where + key + "\": " + e.what());
  }
}

TransformSpec parse_transform_spec(const nlohmann::json& j,
                                   const std::string& where) {
  if (!j.is_object())
    throw ValidationError(where + " must be an object");
  reject_unknown_keys(j,
                      {"kind", "p", "p_prime", "range_min", "range_max",
                       "flip_prob", "probability"},
                      where + ".");
  TransformSpec s;
  std::string kind;
  read_field(j, "kind", kind, where + ".");
  if (kind.empty())
    throw ValidationError(where + ".kind is required");
  s.kind = transform_kind_from_string(kind);
  read_field(j, "p", s.p, where + ".");
  read_field(j, "p_prime", s.p_prime, where + ".");
  read_field(j, "range_min", s.range_min, where + ".");
  read_field(j, "range_max", s.range_max, where + ".");
  read_field(j, "flip_prob", s.flip_prob, where + ".");
  read_field(j, "probability", s.probability, where + ".");
  return s;
}

nlohmann::ordered_json transform_spec_to_json(const TransformSpec& s) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(s.kind);
  switch (s.kind) {
    case TransformKind::cutout: j["p"] = s.p; break;
    case TransformKind::crop_resize: j["p_prime"] = s.p_prime; break;
    case TransformKind::noise:
    case TransformKind::blur:
      j["range_min"] = s.range_min;
      j["range_max"] = s.range_max;
      break;
    case TransformKind::flip: j["flip_prob"] = s.flip_prob; break;
  }
  j["probability"] = s.probability;
  return j;
}

}  // namespace

double parse_sigma(const std::string& text) {
  if (text == "inf" || text == "Inf" || text == "INF")
    return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ValidationError("sigma \"" + text + "\" is not a number or inf");
  }
  if (used != text.size())
    throw ValidationError("sigma \"" + text + "\" is not a number or inf");
  if (v < 0.0) throw ValidationError("sigma must be nonnegative");
  return v;
}

nlohmann::ordered_json sigma_to_json(double sigma) {
  if (std::isinf(sigma)) return "inf";
  return sigma;
}

TrainConfig ExperimentConfig::effective_train() const {
  TrainConfig t = train;
  t.loss = loss;
  t.loss.kernel = kernel;
  t.transforms = transforms;
  return t;
}

ExperimentConfig parse_experiment_config(const nlohmann::json& doc) {
  if (!doc.is_object())
    throw ValidationError("experiment config must be a JSON object");
  reject_unknown_keys(doc,
                      {"data", "transforms", "kernel", "loss", "model",
                       "train", "eval", "ablation", "reports"},
                      "");
  ExperimentConfig cfg;

  if (doc.contains("data") && !doc["data"].is_null()) {
    const auto& d = doc["data"];
    if (!d.is_object()) throw ValidationError("data must be an object");
    reject_unknown_keys(d, {"manifest", "synth"}, "data.");
    if (d.contains("manifest") && !d["manifest"].is_null())
      cfg.data_manifest = d["manifest"].get<std::string>();
    if (d.contains("synth") && !d["synth"].is_null()) {
      const auto& s = d["synth"];
      reject_unknown_keys(s,
                          {"n_samples", "dim", "y_range", "n_sites",
                           "site_effect_strength", "class_effect_strength",
                           "seed"},
                          "data.synth.");
      read_field(s, "n_samples", cfg.synth.n_samples, "data.synth.");
      read_field(s, "dim", cfg.synth.dim, "data.synth.");
      read_field(s, "y_range", cfg.synth.y_range, "data.synth.");
      read_field(s, "n_sites", cfg.synth.n_sites, "data.synth.");
      read_field(s, "site_effect_strength", cfg.synth.site_effect_strength,
                 "data.synth.");
      read_field(s, "class_effect_strength", cfg.synth.class_effect_strength,
                 "data.synth.");
      read_field(s, "seed", cfg.synth.seed, "data.synth.");
    }
    if (cfg.data_manifest && d.contains("synth") && !d["synth"].is_null())
      throw ValidationError("data: give either manifest or synth, not both");
  }

  if (doc.contains("transforms") && !doc["transforms"].is_null()) {
    const auto& t = doc["transforms"];
    if (t.is_string()) {
      cfg.transform_set = t.get<std::string>();
      cfg.transforms = named_transform_set(cfg.transform_set);
    } else if (t.is_array()) {
      cfg.transform_set = "custom";
      cfg.transforms.specs.clear();
      for (std::size_t i = 0; i < t.size(); ++i)
        cfg.transforms.specs.push_back(parse_transform_spec(
            t[i], "transforms[" + std::to_string(i) + "]"));
    } else {
      throw ValidationError(
          "transforms must be a set name or a list of specs");
    }
  }

  if (doc.contains("kernel") && !doc["kernel"].is_null()) {
    const auto& k = doc["kernel"];
    reject_unknown_keys(k, {"kind", "sigma", "tolerance"}, "kernel.");
    std::string kind = to_string(cfg.kernel.kind);
    read_field(k, "kind", kind, "kernel.");
    cfg.kernel.kind = kernel_kind_from_string(kind);
    if (k.contains("sigma") && !k["sigma"].is_null()) {
      if (k["sigma"].is_string())
        cfg.kernel.sigma = parse_sigma(k["sigma"].get<std::string>());
      else
        cfg.kernel.sigma = k["sigma"].get<double>();
    }
    read_field(k, "tolerance", cfg.kernel.tolerance, "kernel.");
  }

  if (doc.contains("loss") && !doc["loss"].is_null()) {
    const auto& l = doc["loss"];
    reject_unknown_keys(l, {"temperature", "symmetric", "objective"},
                        "loss.");
    read_field(l, "temperature", cfg.loss.temperature, "loss.");
    read_field(l, "symmetric", cfg.loss.symmetric, "loss.");
    std::string obj = to_string(cfg.loss.objective);
    read_field(l, "objective", obj, "loss.");
    cfg.loss.objective = objective_from_string(obj);
  }

  if (doc.contains("model") && !doc["model"].is_null()) {
    const auto& m = doc["model"];
    reject_unknown_keys(
        m, {"conv_blocks", "feature_dim", "projection_hidden",
            "embedding_dim"},
        "model.");
    read_field(m, "conv_blocks", cfg.model.conv_blocks, "model.");
    read_field(m, "feature_dim", cfg.model.feature_dim, "model.");
    read_field(m, "projection_hidden", cfg.model.projection_hidden, "model.");
    read_field(m, "embedding_dim", cfg.model.embedding_dim, "model.");
  }

  if (doc.contains("train") && !doc["train"].is_null()) {
    const auto& t = doc["train"];
    reject_unknown_keys(t,
                        {"batch_size", "epochs", "base_lr", "lr_decay",
                         "lr_decay_every", "seed", "adam"},
                        "train.");
    read_field(t, "batch_size", cfg.train.batch_size, "train.");
    read_field(t, "epochs", cfg.train.epochs, "train.");
    read_field(t, "base_lr", cfg.train.base_lr, "train.");
    read_field(t, "lr_decay", cfg.train.lr_decay, "train.");
    read_field(t, "lr_decay_every", cfg.train.lr_decay_every, "train.");
    read_field(t, "seed", cfg.train.seed, "train.");
    if (t.contains("adam") && !t["adam"].is_null()) {
      const auto& a = t["adam"];
      reject_unknown_keys(a, {"beta1", "beta2", "eps"}, "train.adam.");
      read_field(a, "beta1", cfg.train.adam.beta1, "train.adam.");
      read_field(a, "beta2", cfg.train.adam.beta2, "train.adam.");
      read_field(a, "eps", cfg.train.adam.eps, "train.adam.");
    }
  }

  if (doc.contains("eval") && !doc["eval"].is_null()) {
    const auto& e = doc["eval"];
    reject_unknown_keys(e, {"strategy", "n_target", "augment", "checkpoint"},
                        "eval.");
    std::string strategy = to_string(cfg.eval.strategy);
    read_field(e, "strategy", strategy, "eval.");
    cfg.eval.strategy = fold_strategy_from_string(strategy);
    if (e.contains("n_target") && !e["n_target"].is_null())
      cfg.eval.n_target = e["n_target"].get<int>();
    read_field(e, "augment", cfg.eval.augment, "eval.");
    if (e.contains("checkpoint") && !e["checkpoint"].is_null())
      cfg.eval.checkpoint = e["checkpoint"].get<std::string>();
  }

  if (doc.contains("ablation") && !doc["ablation"].is_null()) {
    const auto& a = doc["ablation"];
    reject_unknown_keys(a, {"sigmas", "transform_sets", "repeats"},
                        "ablation.");
    AblationSection ab;
    if (a.contains("sigmas") && !a["sigmas"].is_null()) {
      ab.sigmas.clear();
      for (const auto& s : a["sigmas"]) {
        if (s.is_string())
          ab.sigmas.push_back(parse_sigma(s.get<std::string>()));
        else
          ab.sigmas.push_back(s.get<double>());
      }
    }
    read_field(a, "transform_sets", ab.transform_sets, "ablation.");
    read_field(a, "repeats", ab.repeats, "ablation.");
    if (ab.sigmas.empty() || ab.transform_sets.empty())
      throw ValidationError("ablation lists must be nonempty");
    if (ab.repeats < 1)
      throw ValidationError("ablation.repeats must be positive");
    cfg.ablation = std::move(ab);
  }

  read_field(doc, "reports", cfg.reports, "");

  // Fail fast on inconsistent sections.
  if (!cfg.data_manifest) cfg.synth.validate();
  cfg.transforms.validate();
  cfg.kernel.validate();
  cfg.loss.validate();
  cfg.model.validate();
  TrainConfig wired = cfg.effective_train();
  wired.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_experiment_config(doc);
}

nlohmann::ordered_json experiment_config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  if (cfg.data_manifest) {
    j["data"]["manifest"] = *cfg.data_manifest;
  } else {
    nlohmann::ordered_json s;
    s["n_samples"] = cfg.synth.n_samples;
    s["dim"] = cfg.synth.dim;
    s["y_range"] = cfg.synth.y_range;
    s["n_sites"] = cfg.synth.n_sites;
    s["site_effect_strength"] = cfg.synth.site_effect_strength;
    s["class_effect_strength"] = cfg.synth.class_effect_strength;
    s["seed"] = cfg.synth.seed;
    j["data"]["synth"] = std::move(s);
  }
  if (cfg.transform_set == "custom") {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& s : cfg.transforms.specs)
      list.push_back(transform_spec_to_json(s));
    j["transforms"] = std::move(list);
  } else {
    j["transforms"] = cfg.transform_set;
  }
  j["kernel"]["kind"] = to_string(cfg.kernel.kind);
  j["kernel"]["sigma"] = sigma_to_json(cfg.kernel.sigma);
  j["kernel"]["tolerance"] = cfg.kernel.tolerance;
  j["loss"]["temperature"] = cfg.loss.temperature;
  j["loss"]["symmetric"] = cfg.loss.symmetric;
  j["loss"]["objective"] = to_string(cfg.loss.objective);
  j["model"]["conv_blocks"] = cfg.model.conv_blocks;
  j["model"]["feature_dim"] = cfg.model.feature_dim;
  j["model"]["projection_hidden"] = cfg.model.projection_hidden;
  j["model"]["embedding_dim"] = cfg.model.embedding_dim;
  j["train"]["batch_size"] = cfg.train.batch_size;
  j["train"]["epochs"] = cfg.train.epochs;
  j["train"]["base_lr"] = cfg.train.base_lr;
  j["train"]["lr_decay"] = cfg.train.lr_decay;
  j["train"]["lr_decay_every"] = cfg.train.lr_decay_every;
  j["train"]["seed"] = cfg.train.seed;
  j["train"]["adam"]["beta1"] = cfg.train.adam.beta1;
  j["train"]["adam"]["beta2"] = cfg.train.adam.beta2;
  j["train"]["adam"]["eps"] = cfg.train.adam.eps;
  j["eval"]["strategy"] = to_string(cfg.eval.strategy);
  if (cfg.eval.n_target)
    j["eval"]["n_target"] = *cfg.eval.n_target;
  else
    j["eval"]["n_target"] = nullptr;
  j["eval"]["augment"] = cfg.eval.augment;
  if (cfg.eval.checkpoint)
    j["eval"]["checkpoint"] = *cfg.eval.checkpoint;
  else
    j["eval"]["checkpoint"] = nullptr;
  if (cfg.ablation) {
    nlohmann::ordered_json a;
    a["sigmas"] = nlohmann::ordered_json::array();
    for (double s : cfg.ablation->sigmas)
      a["sigmas"].push_back(sigma_to_json(s));
    a["transform_sets"] = cfg.ablation->transform_sets;
    a["repeats"] = cfg.ablation->repeats;
    j["ablation"] = std::move(a);
  }
  if (!cfg.reports.empty()) j["reports"] = cfg.reports;
  return j;
}

}  // namespace yaware
