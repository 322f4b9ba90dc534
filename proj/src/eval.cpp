#include "yaware/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include "yaware/errors.hpp"
#include "yaware/metrics.hpp"
#include "yaware/parallel.hpp"
#include "yaware/rng.hpp"

namespace yaware {

std::string format_mean_std(double mean_pct, double std_pct) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", mean_pct, std_pct);
  return buf;
}

namespace {

nlohmann::ordered_json report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = r.schema_version;
  j["experiment"] = r.experiment;
  j["strategy"] = r.strategy;
  j["sigma"] = r.sigma.is_null() ? nlohmann::ordered_json() : r.sigma;
  j["transform_set"] = r.transform_set;
  if (r.n_target)
    j["n_target"] = *r.n_target;
  else
    j["n_target"] = nullptr;
  j["folds"] = nlohmann::ordered_json::array();
  for (const auto& f : r.folds) {
    nlohmann::ordered_json e;
    e["fold"] = f.fold;
    e["auc"] = f.auc;
    e["accuracy"] = f.accuracy;
    j["folds"].push_back(std::move(e));
  }
  j["mean_auc"] = r.mean_auc;
  j["std_auc"] = r.std_auc;
  j["mean_accuracy"] = r.mean_accuracy;
  j["std_accuracy"] = r.std_accuracy;
  j["formatted"] = r.formatted;
  j["config_echo"] = r.config_echo.is_null()
                         ? nlohmann::ordered_json::object()
                         : r.config_echo;
  return j;
}

}  // namespace

void write_report(const EvalReport& r, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << report_to_json(r).dump(2) << "\n";
  if (!os) throw IoError("short write to " + path.string());
}

EvalReport read_report(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open report " + path.string());
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
  EvalReport r;
  try {
    r.schema_version = j.at("schema_version").get<int>();
    r.experiment = j.at("experiment").get<std::string>();
    r.strategy = j.at("strategy").get<std::string>();
    r.sigma = j.at("sigma");
    r.transform_set = j.at("transform_set").get<std::string>();
    if (!j.at("n_target").is_null())
      r.n_target = j.at("n_target").get<int>();
    for (const auto& e : j.at("folds")) {
      FoldScore f;
      f.fold = e.at("fold").get<int>();
      f.auc = e.at("auc").get<double>();
      f.accuracy = e.at("accuracy").get<double>();
      r.folds.push_back(f);
    }
    r.mean_auc = j.at("mean_auc").get<double>();
    r.std_auc = j.at("std_auc").get<double>();
    r.mean_accuracy = j.at("mean_accuracy").get<double>();
    r.std_accuracy = j.at("std_accuracy").get<double>();
    r.formatted = j.at("formatted").get<std::string>();
    r.config_echo = j.value("config_echo", nlohmann::ordered_json::object());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": report schema mismatch: " +
                          e.what());
  }
  return r;
}

namespace {

double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}

struct FeatureTable {
  Matrix x;  // n_samples x feature_dim, manifest order
  std::map<std::string, int> row_of;
  std::vector<int> labels;  // -1 when absent
};

FeatureTable extract_features(const Model& model, const Manifest& manifest) {
  FeatureTable t;
  const int n = static_cast<int>(manifest.samples.size());
  std::vector<Volume> batch(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    Volume v = read_volume(manifest.resolve(manifest.samples[i]));
    standardize(v);
    batch[i] = std::move(v);
  });
  t.x = model.features(batch);
  t.labels.resize(n, -1);
  for (int i = 0; i < n; ++i) {
    t.row_of[manifest.samples[i].id] = i;
    if (manifest.samples[i].label) t.labels[i] = *manifest.samples[i].label;
  }
  return t;
}

struct Standardizer {
  std::vector<double> mean, std;
};

Standardizer fit_standardizer(const Matrix& x, const std::vector<int>& rows) {
  Standardizer s;
  s.mean.assign(x.cols, 0.0);
  s.std.assign(x.cols, 0.0);
  for (int r : rows)
    for (int c = 0; c < x.cols; ++c) s.mean[c] += x(r, c);
  for (double& m : s.mean) m /= static_cast<double>(rows.size());
  for (int r : rows)
    for (int c = 0; c < x.cols; ++c) {
      double d = x(r, c) - s.mean[c];
      s.std[c] += d * d;
    }
  for (double& v : s.std) {
    v = std::sqrt(v / static_cast<double>(rows.size()));
    if (v == 0.0) v = 1.0;  // constant feature: leave it centered
  }
  return s;
}

Matrix apply_standardizer(const Standardizer& s, const Matrix& x,
                          const std::vector<int>& rows) {
  Matrix out(static_cast<int>(rows.size()), x.cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int c = 0; c < x.cols; ++c)
      out(static_cast<int>(i), c) = (x(rows[i], c) - s.mean[c]) / s.std[c];
  return out;
}

std::vector<int> rows_for_ids(const FeatureTable& t,
                              const std::vector<std::string>& ids) {
  std::vector<int> rows;
  rows.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = t.row_of.find(id);
    if (it == t.row_of.end())
      throw ValidationError("fold id \"" + id + "\" not in manifest");
    if (t.labels[it->second] < 0)
      throw ValidationError("sample \"" + id + "\" has no label");
    rows.push_back(it->second);
  }
  return rows;
}

std::vector<int> labels_for_rows(const FeatureTable& t,
                                 const std::vector<int>& rows) {
  std::vector<int> y;
  y.reserve(rows.size());
  for (int r : rows) y.push_back(t.labels[r]);
  return y;
}

void finish_report(EvalReport& r) {
  std::vector<double> aucs, accs;
  for (const auto& f : r.folds) {
    aucs.push_back(f.auc);
    accs.push_back(f.accuracy);
  }
  r.mean_auc = mean(aucs);
  r.std_auc = sample_stddev(aucs);
  r.mean_accuracy = mean(accs);
  r.std_accuracy = sample_stddev(accs);
  r.formatted = format_mean_std(100.0 * r.mean_auc, 100.0 * r.std_auc);
}

}  // namespace

LinearHead train_logistic(const Matrix& x, const std::vector<int>& labels,
                          double grad_tol, int max_iters) {
  if (x.rows != static_cast<int>(labels.size()))
    throw ShapeError("train_logistic: rows and labels differ");
  if (x.rows == 0) throw ParameterError("train_logistic: empty input");

  // Step size 1/L with L = mean(|x|^2 + 1)/4, a bound on the logistic
  // Hessian's largest eigenvalue; guarantees monotone convergence.
  double mean_sq = 0.0;
  for (int i = 0; i < x.rows; ++i) {
    double s = 1.0;
    for (int c = 0; c < x.cols; ++c) s += x(i, c) * x(i, c);
    mean_sq += s;
  }
  mean_sq /= static_cast<double>(x.rows);
  const double lr = 4.0 / mean_sq;

  LinearHead h;
  h.w.assign(x.cols, 0.0);
  h.b = 0.0;
  std::vector<double> gw(x.cols);
  const double inv_n = 1.0 / static_cast<double>(x.rows);
  for (int it = 0; it < max_iters; ++it) {
    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0.0;
    for (int i = 0; i < x.rows; ++i) {
      double z = h.b;
      for (int c = 0; c < x.cols; ++c) z += h.w[c] * x(i, c);
      double err = (sigmoid(z) - labels[i]) * inv_n;
      for (int c = 0; c < x.cols; ++c) gw[c] += err * x(i, c);
      gb += err;
    }
    double norm_sq = gb * gb;
    for (double g : gw) norm_sq += g * g;
    if (std::sqrt(norm_sq) < grad_tol) break;
    for (int c = 0; c < x.cols; ++c) h.w[c] -= lr * gw[c];
    h.b -= lr * gb;
  }
  return h;
}

EvalReport linear_probe(const Checkpoint& ckpt, const Manifest& manifest,
                        const FoldPlan& plan, const ProbeOptions& opt) {
  Model model(ckpt.params);
  FeatureTable table = extract_features(model, manifest);

  EvalReport report;
  report.experiment = "probe";
  report.strategy = to_string(plan.strategy);
  report.n_target = plan.n_target;
  for (std::size_t f = 0; f < plan.outer.size(); ++f) {
    const auto& fold = plan.outer[f];
    std::vector<int> train_rows = rows_for_ids(table, fold.train_pool);
    std::vector<int> test_rows = rows_for_ids(table, fold.test_ids);

    Standardizer st = fit_standardizer(table.x, train_rows);
    Matrix x_train = apply_standardizer(st, table.x, train_rows);
    Matrix x_test = apply_standardizer(st, table.x, test_rows);
    std::vector<int> y_train = labels_for_rows(table, train_rows);
    std::vector<int> y_test = labels_for_rows(table, test_rows);

    LinearHead head =
        train_logistic(x_train, y_train, opt.grad_tol, opt.max_iters);
    std::vector<double> scores(test_rows.size());
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
      double z = head.b;
      for (int c = 0; c < x_test.cols; ++c)
        z += head.w[c] * x_test(static_cast<int>(i), c);
      scores[i] = z;
    }
    FoldScore fs;
    fs.fold = static_cast<int>(f);
    fs.auc = auc(scores, y_test);
    fs.accuracy = accuracy(scores, y_test);
    report.folds.push_back(fs);
  }
  finish_report(report);
  return report;
}

EvalReport fine_tune(const Checkpoint& ckpt, const Manifest& manifest,
                     const FoldPlan& plan, const TrainConfig& cfg,
                     bool augment) {
  if (cfg.epochs < 0) throw ParameterError("epochs must be nonnegative");
  cfg.adam.validate();
  if (augment) cfg.transforms.validate();

  // Standardized volumes and labels in manifest order.
  const int n = static_cast<int>(manifest.samples.size());
  std::vector<Volume> volumes(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    Volume v = read_volume(manifest.resolve(manifest.samples[i]));
    standardize(v);
    volumes[i] = std::move(v);
  });
  std::map<std::string, int> row_of;
  for (int i = 0; i < n; ++i) row_of[manifest.samples[i].id] = i;
  auto label_of = [&](int row) {
    const auto& s = manifest.samples[row];
    if (!s.label)
      throw ValidationError("sample \"" + s.id + "\" has no label");
    return *s.label;
  };

  EvalReport report;
  report.experiment = "finetune";
  report.strategy = to_string(plan.strategy);
  report.n_target = plan.n_target;

  const int F = ckpt.params.cfg.feature_dim;
  for (std::size_t f = 0; f < plan.outer.size(); ++f) {
    const auto& fold = plan.outer[f];
    std::vector<int> train_rows, test_rows;
    for (const auto& id : fold.train_pool) train_rows.push_back(row_of.at(id));
    for (const auto& id : fold.test_ids) test_rows.push_back(row_of.at(id));

    Model model(ckpt.params);  // fresh copy per fold
    ParamArray head_w;
    head_w.name = "head.weight";
    head_w.shape = {1, F};
    head_w.value.assign(F, 0.0);
    head_w.grad.assign(F, 0.0);
    ParamArray head_b;
    head_b.name = "head.bias";
    head_b.shape = {1};
    head_b.value.assign(1, 0.0);
    head_b.grad.assign(1, 0.0);
    std::vector<ParamArray> head{std::move(head_w), std::move(head_b)};

    Adam adam_enc(model.params().arrays, cfg.adam);
    Adam adam_head(head, cfg.adam);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::vector<int> order = train_rows;
      RngStream(cfg.seed, stream_tag::shuffle, static_cast<std::uint64_t>(f),
                static_cast<std::uint64_t>(epoch))
          .shuffle(order);
      const double lr = lr_at_epoch(cfg, epoch);

      for (std::size_t start = 0; start < order.size();
           start += static_cast<std::size_t>(cfg.batch_size)) {
        const std::size_t b =
            std::min<std::size_t>(cfg.batch_size, order.size() - start);
        std::vector<Volume> batch(b);
        std::vector<int> y(b);
        parallel_for(b, [&](std::size_t j) {
          const int row = order[start + j];
          if (augment) {
            RngStream r(cfg.seed, static_cast<std::uint64_t>(row),
                        static_cast<std::uint64_t>(epoch), 2);
            batch[j] = sample_view(volumes[row], cfg.transforms, r);
          } else {
            batch[j] = volumes[row];
          }
          y[j] = label_of(row);
        });

        BatchTrace trace;
        Matrix feats = model.features(batch, trace);
        Matrix d_feat(static_cast<int>(b), F);
        const double inv_b = 1.0 / static_cast<double>(b);
        for (std::size_t i = 0; i < b; ++i) {
          double z = head[1].value[0];
          for (int c = 0; c < F; ++c)
            z += head[0].value[c] * feats(static_cast<int>(i), c);
          double err = (sigmoid(z) - y[i]) * inv_b;
          for (int c = 0; c < F; ++c) {
            head[0].grad[c] += err * feats(static_cast<int>(i), c);
            d_feat(static_cast<int>(i), c) = err * head[0].value[c];
          }
          head[1].grad[0] += err;
        }
        model.backward_features(trace, d_feat);
        adam_enc.step(model.params().arrays, lr);
        adam_head.step(head, lr);
      }
    }

    std::vector<double> scores;
    std::vector<int> y_test;
    std::vector<Volume> test_batch;
    for (int row : test_rows) {
      test_batch.push_back(volumes[row]);
      y_test.push_back(label_of(row));
    }
    Matrix feats = model.features(test_batch);
    for (int i = 0; i < feats.rows; ++i) {
      double z = head[1].value[0];
      for (int c = 0; c < F; ++c) z += head[0].value[c] * feats(i, c);
      scores.push_back(z);
    }
    FoldScore fs;
    fs.fold = static_cast<int>(f);
    fs.auc = auc(scores, y_test);
    fs.accuracy = accuracy(scores, y_test);
    report.folds.push_back(fs);
  }
  finish_report(report);
  return report;
}

}  // namespace yaware
