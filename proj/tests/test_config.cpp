#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "yaware/config.hpp"
#include "yaware/errors.hpp"

using namespace yaware;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / "yaware_config_test" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// True when parsing throws ValidationError mentioning `needle`.
bool rejects_with(const json& doc, const std::string& needle) {
  try {
    parse_experiment_config(doc);
  } catch (const ValidationError& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("an empty document yields the reference defaults") {
  ExperimentConfig cfg = parse_experiment_config(json::object());
  CHECK(!cfg.data_manifest);
  CHECK(cfg.synth.n_samples == 512);
  CHECK(cfg.synth.dim == 16);
  CHECK(cfg.transform_set == "cutout");
  CHECK(cfg.transforms.specs.size() == 1);
  CHECK(cfg.kernel.kind == KernelKind::rbf);
  CHECK(cfg.kernel.sigma == 5.0);
  CHECK(cfg.loss.temperature == 0.1);
  CHECK(cfg.loss.objective == Objective::yaware);
  CHECK(!cfg.loss.symmetric);
  CHECK(cfg.model.feature_dim == 64);
  CHECK(cfg.model.embedding_dim == 32);
  CHECK(cfg.train.batch_size == 64);
  CHECK(cfg.train.epochs == 20);
  CHECK(cfg.train.base_lr == 1e-4);
  CHECK(cfg.train.lr_decay == 0.9);
  CHECK(cfg.train.lr_decay_every == 10);
  CHECK(cfg.train.adam.beta1 == 0.9);
  CHECK(cfg.train.adam.beta2 == 0.999);
  CHECK(cfg.eval.strategy == FoldStrategy::stratified_nested);
  CHECK(!cfg.eval.n_target);
  CHECK(!cfg.eval.checkpoint);
  CHECK(!cfg.ablation);
  CHECK(cfg.reports.empty());
}

TEST_CASE("a fully specified document parses into every section") {
  json doc = {
      {"data",
       {{"synth",
         {{"n_samples", 64},
          {"dim", 12},
          {"y_range", {10.0, 30.0}},
          {"n_sites", 6},
          {"seed", 99}}}}},
      {"transforms",
       json::array({{{"kind", "cutout"}, {"p", 0.3}},
                    {{"kind", "blur"},
                     {"range_min", 0.2},
                     {"range_max", 1.5},
                     {"probability", 0.7}}})},
      {"kernel", {{"kind", "rbf"}, {"sigma", "inf"}}},
      {"loss", {{"temperature", 0.2}, {"symmetric", true},
                {"objective", "infonce"}}},
      {"model",
       {{"conv_blocks", json::array({{4, 2}, {8, 2}})},
        {"feature_dim", 8},
        {"projection_hidden", 16},
        {"embedding_dim", 4}}},
      {"train",
       {{"batch_size", 16},
        {"epochs", 5},
        {"base_lr", 2e-4},
        {"seed", 42},
        {"adam", {{"beta2", 0.99}}}}},
      {"eval",
       {{"strategy", "leave_site_out"},
        {"n_target", 32},
        {"augment", true},
        {"checkpoint", "random"}}},
      {"ablation",
       {{"sigmas", json::array({"inf", 0, 2.5})},
        {"transform_sets", {"cutout", "all_tf"}},
        {"repeats", 3}}},
      {"reports", {"a/report.json", "b/report.json"}},
  };
  ExperimentConfig cfg = parse_experiment_config(doc);

  CHECK(cfg.synth.n_samples == 64);
  CHECK(cfg.synth.dim == 12);
  CHECK(cfg.synth.y_range == std::array<double, 2>{10.0, 30.0});
  CHECK(cfg.synth.seed == 99);
  CHECK(cfg.transform_set == "custom");
  REQUIRE(cfg.transforms.specs.size() == 2);
  CHECK(cfg.transforms.specs[0].kind == TransformKind::cutout);
  CHECK(cfg.transforms.specs[0].p == 0.3);
  CHECK(cfg.transforms.specs[1].kind == TransformKind::blur);
  CHECK(cfg.transforms.specs[1].probability == 0.7);
  CHECK(std::isinf(cfg.kernel.sigma));
  CHECK(cfg.loss.temperature == 0.2);
  CHECK(cfg.loss.symmetric);
  CHECK(cfg.loss.objective == Objective::infonce);
  CHECK(cfg.model.conv_blocks ==
        std::vector<std::array<int, 2>>{{4, 2}, {8, 2}});
  CHECK(cfg.train.batch_size == 16);
  CHECK(cfg.train.seed == 42);
  CHECK(cfg.train.adam.beta2 == 0.99);
  CHECK(cfg.train.adam.beta1 == 0.9);  // untouched sibling keeps its default
  CHECK(cfg.eval.strategy == FoldStrategy::leave_site_out);
  CHECK(cfg.eval.n_target == 32);
  CHECK(cfg.eval.augment);
  CHECK(cfg.eval.checkpoint == "random");
  REQUIRE(cfg.ablation);
  REQUIRE(cfg.ablation->sigmas.size() == 3);
  CHECK(std::isinf(cfg.ablation->sigmas[0]));
  CHECK(cfg.ablation->sigmas[1] == 0.0);
  CHECK(cfg.ablation->sigmas[2] == 2.5);
  CHECK(cfg.ablation->repeats == 3);
  CHECK(cfg.reports.size() == 2);
}

TEST_CASE("effective_train wires the kernel and transforms in") {
  json doc = {{"kernel", {{"kind", "delta"}, {"tolerance", 0.5}}},
              {"transforms", "all_tf"},
              {"loss", {{"temperature", 0.3}}},
              {"train", {{"batch_size", 4}}}};
  ExperimentConfig cfg = parse_experiment_config(doc);
  TrainConfig t = cfg.effective_train();
  CHECK(t.batch_size == 4);
  CHECK(t.loss.temperature == 0.3);
  CHECK(t.loss.kernel.kind == KernelKind::delta);
  CHECK(t.loss.kernel.tolerance == 0.5);
  CHECK(t.transforms.specs.size() == cfg.transforms.specs.size());
}

TEST_CASE("unknown keys are rejected with their full path") {
  CHECK(rejects_with({{"voodoo", 1}}, "\"voodoo\""));
  CHECK(rejects_with({{"data", {{"source", "x"}}}}, "\"data.source\""));
  CHECK(rejects_with({{"data", {{"synth", {{"shape", 8}}}}}},
                     "\"data.synth.shape\""));
  CHECK(rejects_with({{"train", {{"adam", {{"gamma", 0.1}}}}}},
                     "\"train.adam.gamma\""));
  CHECK(rejects_with({{"kernel", {{"bandwidth", 2.0}}}},
                     "\"kernel.bandwidth\""));
  CHECK(rejects_with(
      {{"transforms", json::array({{{"kind", "cutout"}, {"radius", 1}}})}},
      "\"transforms[0].radius\""));
}

TEST_CASE("malformed sections are rejected with context") {
  CHECK(rejects_with(json::array({1, 2}), "must be a JSON object"));
  CHECK(rejects_with(
      {{"data", {{"manifest", "m.jsonl"}, {"synth", {{"dim", 8}}}}}},
      "either manifest or synth"));
  CHECK(rejects_with({{"train", {{"epochs", "ten"}}}}, "train.epochs"));
  CHECK(rejects_with({{"transforms", 7}}, "set name or a list"));
  CHECK(rejects_with(
      {{"transforms", json::array({{{"p", 0.3}}})}}, "kind is required"));
  CHECK(rejects_with({{"ablation", {{"sigmas", json::array()}}}},
                     "nonempty"));
  CHECK(rejects_with({{"ablation", {{"repeats", 0}}}}, "repeats"));
}

TEST_CASE("section invariants are checked at parse time") {
  CHECK_THROWS_AS(parse_experiment_config({{"kernel", {{"sigma", -1.0}}}}),
                  ParameterError);
  CHECK_THROWS_AS(
      parse_experiment_config({{"loss", {{"temperature", 0.0}}}}),
      ParameterError);
  CHECK_THROWS_AS(
      parse_experiment_config({{"model", {{"feature_dim", 7}}}}),
      ParameterError);
  CHECK_THROWS_AS(
      parse_experiment_config({{"train", {{"batch_size", 1}}}}),
      ParameterError);
  CHECK_THROWS_AS(
      parse_experiment_config(
          {{"transforms", json::array({{{"kind", "cutout"}, {"p", 0.0}}})}}),
      ParameterError);
  CHECK_THROWS_AS(
      parse_experiment_config({{"data", {{"synth", {{"dim", 4}}}}}}),
      ValidationError);
}

TEST_CASE("sigma text accepts limit sentinels") {
  CHECK(parse_sigma("2.5") == 2.5);
  CHECK(parse_sigma("0") == 0.0);
  CHECK(parse_sigma("1e-12") == 1e-12);
  CHECK(std::isinf(parse_sigma("inf")));
  CHECK(std::isinf(parse_sigma("Inf")));
  CHECK(std::isinf(parse_sigma("INF")));
  CHECK_THROWS_AS(parse_sigma("-1"), ValidationError);
  CHECK_THROWS_AS(parse_sigma("5x"), ValidationError);
  CHECK_THROWS_AS(parse_sigma(""), ValidationError);
  CHECK_THROWS_AS(parse_sigma("sigma"), ValidationError);

  CHECK(sigma_to_json(5.0) == nlohmann::ordered_json(5.0));
  CHECK(sigma_to_json(std::numeric_limits<double>::infinity()) ==
        nlohmann::ordered_json("inf"));
}

TEST_CASE("the config echo is a parseable fixed point") {
  json doc = {{"kernel", {{"sigma", "inf"}}},
              {"transforms",
               json::array({{{"kind", "crop_resize"}, {"p_prime", 0.6}}})},
              {"train", {{"epochs", 2}, {"seed", 5}}},
              {"eval", {{"n_target", 10}}},
              {"ablation", {{"sigmas", json::array({0, "inf"})}}}};
  ExperimentConfig cfg = parse_experiment_config(doc);
  nlohmann::ordered_json echo = experiment_config_to_json(cfg);

  // Echoes carry every effective value, including defaulted ones.
  CHECK(echo["kernel"]["sigma"] == "inf");
  CHECK(echo["train"]["batch_size"] == 64);
  CHECK(echo["eval"]["checkpoint"].is_null());
  CHECK(echo["transforms"][0]["kind"] == "crop_resize");

  ExperimentConfig again = parse_experiment_config(echo);
  CHECK(experiment_config_to_json(again) == echo);
}

TEST_CASE("configs load from disk with filename context on errors") {
  auto dir = fresh_dir("load");
  CHECK_THROWS_AS(load_experiment_config(dir / "absent.json"), IoError);

  std::ofstream(dir / "broken.json") << "{\"train\": ";
  try {
    load_experiment_config(dir / "broken.json");
    CHECK(false);
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("broken.json") != std::string::npos);
  }

  std::ofstream(dir / "good.json")
      << R"({"train": {"epochs": 3}, "kernel": {"sigma": 2.0}})";
  ExperimentConfig cfg = load_experiment_config(dir / "good.json");
  CHECK(cfg.train.epochs == 3);
  CHECK(cfg.kernel.sigma == 2.0);
}
