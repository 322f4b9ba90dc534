// Acceptance gate. Each numbered criterion prints exactly one PASS/FAIL line
// with the quantities it was judged on; the process exits nonzero when any
// criterion fails. Pass criterion numbers as arguments to run a subset, e.g.
// ./acceptance 9 10.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "yaware/checkpoint.hpp"
#include "yaware/cli.hpp"
#include "yaware/eval.hpp"
#include "yaware/folds.hpp"
#include "yaware/kernel.hpp"
#include "yaware/loss.hpp"
#include "yaware/manifest.hpp"
#include "yaware/metrics.hpp"
#include "yaware/model.hpp"
#include "yaware/optim.hpp"
#include "yaware/rng.hpp"
#include "yaware/synth.hpp"
#include "yaware/train.hpp"
#include "yaware/volume.hpp"

namespace fs = std::filesystem;
using namespace yaware;

namespace {

std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& why) {
    if (!ok && pass) {
      pass = false;
      detail = why;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

fs::path fresh_dir(const std::string& leaf) {
  fs::path p = fs::temp_directory_path() / "yaware_acceptance" / leaf;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

std::vector<double> distinct_uniform(int n, double lo, double hi,
                                     RngStream& rng) {
  std::vector<double> y(n);
  for (bool ok = false; !ok;) {
    for (double& v : y) v = rng.uniform(lo, hi);
    std::vector<double> s = y;
    std::sort(s.begin(), s.end());
    ok = std::adjacent_find(s.begin(), s.end()) == s.end();
  }
  return y;
}

// 1. A near-zero rbf bandwidth must reduce the weighted loss to the plain
// contrastive one, values and gradients alike.
Outcome criterion_1() {
  Outcome out;
  RngStream rng(0xacce01);
  KernelConfig narrow;
  narrow.sigma = 1e-12;
  double dv = 0.0, dg = 0.0;
  for (int b = 0; b < 10; ++b) {
    std::vector<double> y = distinct_uniform(16, 0.0, 100.0, rng);
    Matrix z1 = oracle::random_unit_rows(16, 8, rng);
    Matrix z2 = oracle::random_unit_rows(16, 8, rng);
    SimilarityMatrix sim = similarity_matrix(z1, z2, 0.1);
    LossResult plain = infonce(sim);
    LossResult weighted = y_aware_infonce(sim, batch_weight_matrix(y, narrow));
    dv = std::max(dv, std::abs(plain.value - weighted.value));
    dg = std::max(dg, max_abs_diff(plain.grad_z1, weighted.grad_z1));
    dg = std::max(dg, max_abs_diff(plain.grad_z2, weighted.grad_z2));
  }
  out.require(dv <= 1e-9, fmt("value diff %.2e exceeds 1e-9", dv));
  out.require(dg <= 1e-9, fmt("gradient diff %.2e exceeds 1e-9", dg));
  if (out.pass)
    out.detail = fmt("10 batches n=16: value diff %.1e, grad diff %.1e", dv, dg);
  return out;
}

// 2. Delta-kernel weight rows are exactly uniform over equal labels, and the
// discrete supervised loss is the delta-weighted loss.
Outcome criterion_2() {
  Outcome out;
  RngStream rng(0xacce02);
  KernelConfig delta;
  delta.kind = KernelKind::delta;
  delta.tolerance = 0.0;

  for (int t = 0; t < 30 && out.pass; ++t) {
    const int n = 2 + static_cast<int>(rng.uniform_below(9));
    std::vector<double> labels(n);
    for (double& v : labels) v = static_cast<double>(rng.uniform_below(3));
    WeightMatrix w = batch_weight_matrix(labels, delta);
    for (int i = 0; i < n; ++i) {
      int count = 0;
      for (int k = 0; k < n; ++k) count += labels[k] == labels[i];
      for (int k = 0; k < n; ++k) {
        const double want = labels[k] == labels[i] ? 1.0 / count : 0.0;
        out.require(w(i, k) == want,
                    fmt("trial %d: row %d not exactly uniform", t, i));
      }
    }
  }

  double dv = 0.0, dg = 0.0;
  for (int t = 0; t < 30; ++t) {
    const int n = 2 + static_cast<int>(rng.uniform_below(11));
    std::vector<double> labels(n);
    for (double& v : labels) v = static_cast<double>(rng.uniform_below(3));
    Matrix z1 = oracle::random_unit_rows(n, 6, rng);
    Matrix z2 = oracle::random_unit_rows(n, 6, rng);
    SimilarityMatrix sim = similarity_matrix(z1, z2, 0.1);
    LossResult a = supcon_discrete(sim, labels);
    LossResult b = y_aware_infonce(sim, batch_weight_matrix(labels, delta));
    dv = std::max(dv, std::abs(a.value - b.value));
    dg = std::max(dg, max_abs_diff(a.grad_z1, b.grad_z1));
    dg = std::max(dg, max_abs_diff(a.grad_z2, b.grad_z2));
  }
  out.require(dv <= 1e-10 && dg <= 1e-10,
              fmt("discrete vs delta diff %.2e / %.2e exceeds 1e-10", dv, dg));
  if (out.pass)
    out.detail = fmt("rows exactly uniform; discrete diff %.1e/%.1e", dv, dg);
  return out;
}

// 3. The production losses against definition-following loop references.
Outcome criterion_3() {
  Outcome out;
  RngStream rng(0xacce03);
  const double taus[] = {0.07, 0.1, 0.2, 1.0};
  double worst = 0.0;
  int trials = 0;
  for (int n : {1, 2, 3, 8, 32}) {
    for (int t = 0; t < 100; ++t, ++trials) {
      const double tau = taus[t % 4];
      const int d = 4 + (t % 2) * 4;
      std::vector<double> y(n);
      for (double& v : y) v = rng.uniform(0.0, 100.0);
      KernelConfig k;
      k.sigma = rng.uniform(2.0, 20.0);
      Matrix z1 = oracle::random_unit_rows(n, d, rng);
      Matrix z2 = oracle::random_unit_rows(n, d, rng);
      SimilarityMatrix sim = similarity_matrix(z1, z2, tau);
      WeightMatrix w = batch_weight_matrix(y, k);
      worst = std::max(
          worst, std::abs(infonce(sim).value - oracle::naive_infonce(z1, z2, tau)));
      worst = std::max(worst, std::abs(y_aware_infonce(sim, w).value -
                                       oracle::naive_y_aware(z1, z2, tau, w)));
    }
  }
  out.require(worst <= 1e-10, fmt("max diff %.2e exceeds 1e-10", worst));
  if (out.pass)
    out.detail = fmt("%d trials, n in {1,2,3,8,32}: max diff %.1e", trials, worst);
  return out;
}

// 4. Hand-computed values: the orthogonal two-sample batch, the degenerate
// identical-embedding batch, and one rbf weight.
Outcome criterion_4() {
  Outcome out;
  Matrix eye(2, 2);
  eye(0, 0) = eye(1, 1) = 1.0;
  SimilarityMatrix sim = similarity_matrix(eye, eye, 1.0);

  const double want_plain = std::log(std::exp(1.0) + 1.0) - std::log(2.0) - 1.0;
  const double d1 = std::abs(infonce(sim).value - want_plain);
  out.require(d1 <= 1e-9, fmt("orthogonal plain value off by %.2e", d1));

  Matrix uniform(2, 2, 0.5);
  const double want_uni = std::log(std::exp(1.0) + 1.0) - std::log(2.0) - 0.5;
  const double d2 = std::abs(y_aware_infonce(sim, uniform).value - want_uni);
  out.require(d2 <= 1e-9, fmt("orthogonal uniform-weight value off by %.2e", d2));

  Matrix same(5, 3);
  for (int i = 0; i < 5; ++i) {
    same(i, 0) = 0.6;
    same(i, 1) = 0.8;
  }
  SimilarityMatrix sim_same = similarity_matrix(same, same, 0.1);
  const double d3 = std::abs(infonce(sim_same).value);
  KernelConfig k;
  const std::vector<double> y{21, 34, 47, 60, 73};
  const double d4 =
      std::abs(y_aware_infonce(sim_same, batch_weight_matrix(y, k)).value);
  out.require(d3 <= 1e-12 && d4 <= 1e-12,
              fmt("identical-embedding loss %.2e / %.2e exceeds 1e-12", d3, d4));

  const double d5 = std::abs(rbf_weight(20, 25, 5) - std::exp(-0.5));
  out.require(d5 <= 1e-12, fmt("rbf_weight(20,25,5) off by %.2e", d5));
  if (out.pass)
    out.detail =
        fmt("orthogonal %.1e/%.1e, degenerate %.1e/%.1e, rbf %.1e", d1, d2, d3,
            d4, d5);
  return out;
}

double relative_gap(double analytic, double fd) {
  return std::abs(analytic - fd) / std::max(1.0, std::abs(fd));
}

// 5. Analytic gradients against central finite differences, first for the
// losses as functions of the embeddings, then through the whole model.
Outcome criterion_5() {
  Outcome out;
  RngStream rng(0xacce05);
  const double tau = 0.1, h = 1e-5;
  const std::vector<double> y{25, 31, 44, 52, 67};
  KernelConfig k;
  Matrix z1 = oracle::random_unit_rows(5, 4, rng);
  Matrix z2 = oracle::random_unit_rows(5, 4, rng);
  WeightMatrix w = batch_weight_matrix(y, k);

  double worst_z = 0.0;
  using Loss = std::function<LossResult()>;
  const Loss cases[] = {
      [&] { return infonce(similarity_matrix(z1, z2, tau)); },
      [&] { return y_aware_infonce(similarity_matrix(z1, z2, tau), w); },
      [&] { return y_aware_symmetric(z1, z2, tau, w); },
  };
  for (const Loss& loss : cases) {
    LossResult r = loss();
    auto value = [&] { return loss().value; };
    for (Matrix* z : {&z1, &z2}) {
      const Matrix& g = z == &z1 ? r.grad_z1 : r.grad_z2;
      for (std::size_t i = 0; i < z->data.size(); ++i)
        worst_z = std::max(
            worst_z,
            relative_gap(g.data[i], oracle::central_diff(z->data, i, h, value)));
    }
  }
  out.require(worst_z <= 1e-6,
              fmt("embedding gradient gap %.2e exceeds 1e-6", worst_z));

  EncoderConfig enc;
  enc.conv_blocks = {{2, 2}, {3, 2}};
  enc.feature_dim = 3;
  enc.projection_hidden = 4;
  enc.embedding_dim = 2;
  Model model(init_params(enc, 6));

  auto random_batch = [&](std::uint64_t tag) {
    std::vector<Volume> batch;
    for (int s = 0; s < 4; ++s) {
      Volume v(4, 4, 4);
      RngStream vr(0xacce05, tag, s);
      for (float& f : v.data) f = static_cast<float>(vr.normal());
      batch.push_back(std::move(v));
    }
    return batch;
  };
  const std::vector<Volume> view1 = random_batch(1), view2 = random_batch(2);
  const std::vector<double> y4{30, 40, 50, 60};
  LossConfig lc;

  BatchTrace t1, t2;
  EmbeddingMatrix e1 = model.embed(view1, t1);
  EmbeddingMatrix e2 = model.embed(view2, t2);
  LossResult lr = pretrain_batch_loss(e1, e2, y4, lc);
  model.params().zero_grads();
  model.backward(t1, lr.grad_z1);
  model.backward(t2, lr.grad_z2);

  auto model_value = [&] {
    BatchTrace ta, tb;
    return pretrain_batch_loss(model.embed(view1, ta), model.embed(view2, tb),
                               y4, lc)
        .value;
  };
  double worst_p = 0.0;
  for (ParamArray& arr : model.params().arrays)
    for (std::size_t i = 0; i < arr.value.size(); ++i)
      worst_p = std::max(
          worst_p, relative_gap(arr.grad[i],
                                oracle::central_diff(arr.value, i, h, model_value)));
  out.require(worst_p <= 1e-4,
              fmt("parameter gradient gap %.2e exceeds 1e-4", worst_p));
  if (out.pass)
    out.detail = fmt("embedding gap %.1e, parameter gap %.1e (%zu params)",
                     worst_z, worst_p, model.params().parameter_count());
  return out;
}

// 6. Structural properties of the weight matrix, property-tested.
Outcome criterion_6() {
  Outcome out;
  RngStream rng(0xacce06);
  double worst_row = 0.0, worst_id = 0.0, worst_uni = 0.0;
  for (int t = 0; t < 1000 && out.pass; ++t) {
    const int n = 2 + t % 15;
    std::vector<double> y = distinct_uniform(n, 0.0, 60.0, rng);
    KernelConfig k;
    k.sigma = rng.uniform(0.5, 40.0);
    WeightMatrix w = batch_weight_matrix(y, k);

    for (int i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int c = 0; c < n; ++c) sum += w(i, c);
      worst_row = std::max(worst_row, std::abs(sum - 1.0));
      for (int c = 0; c < n; ++c)
        out.require(w(i, c) <= w(i, i) + 1e-15,
                    fmt("trial %d: self weight not maximal", t));
      std::vector<int> order(n);
      for (int c = 0; c < n; ++c) order[c] = c;
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(y[i] - y[a]) < std::abs(y[i] - y[b]);
      });
      for (int c = 1; c < n; ++c)
        out.require(w(i, order[c]) <= w(i, order[c - 1]) + 1e-12,
                    fmt("trial %d: weights not distance-monotone", t));
    }

    KernelConfig tight = k, wide = k;
    tight.sigma = 1e-12;
    wide.sigma = 1e12;
    WeightMatrix w0 = batch_weight_matrix(y, tight);
    WeightMatrix wu = batch_weight_matrix(y, wide);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < n; ++c) {
        worst_id = std::max(worst_id, std::abs(w0(i, c) - (i == c ? 1.0 : 0.0)));
        worst_uni = std::max(worst_uni, std::abs(wu(i, c) - 1.0 / n));
      }
  }
  out.require(worst_row <= 1e-9, fmt("row sum off by %.2e", worst_row));
  out.require(worst_id <= 1e-6 && worst_uni <= 1e-6,
              fmt("sigma extremes off by %.2e / %.2e", worst_id, worst_uni));
  if (out.pass)
    out.detail = fmt(
        "1000 vectors: row sums %.1e, identity limit %.1e, uniform limit %.1e",
        worst_row, worst_id, worst_uni);
  return out;
}

// 7. Exact pins for the schedule and the ranking metric.
Outcome criterion_7() {
  Outcome out;
  out.require(lr_at_epoch(1e-4, 0.9, 10, 25) == 8.1e-5,
              "lr_at_epoch(25) is not bitwise 8.1e-5");
  out.require(auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == 0.75,
              "auc example is not bitwise 0.75");

  RngStream rng(0xacce07);
  for (int t = 0; t < 20 && out.pass; ++t) {
    const int n = 12;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
      scores[i] = std::round(rng.uniform(-2.0, 2.0) * 10.0) / 10.0;
      labels[i] = i % 2;
    }
    const double base = auc(scores, labels);
    std::vector<double> affine = scores, expd = scores, arctan = scores;
    for (int i = 0; i < n; ++i) {
      affine[i] = 2.0 * scores[i] + 3.0;
      expd[i] = std::exp(scores[i]);
      arctan[i] = std::atan(scores[i]);
    }
    out.require(auc(affine, labels) == base && auc(expd, labels) == base &&
                    auc(arctan, labels) == base,
                fmt("trial %d: auc changed under a monotone transform", t));
  }
  if (out.pass)
    out.detail = "lr(25) and auc pins bitwise; 20 monotone-transform trials exact";
  return out;
}

// 8. Fold-plan structure on random manifests, both strategies.
Outcome criterion_8() {
  Outcome out;
  RngStream rng(0xacce08);
  int outer_checked = 0;

  auto check_plan = [&](const Manifest& m, const FoldPlan& plan, int t,
                        bool site_exclusive) {
    std::map<std::string, const LabeledSample*> by_id;
    for (const auto& s : m.samples) by_id[s.id] = &s;

    std::set<std::string> seen;
    std::vector<int> sizes, positives;
    for (const OuterFold& f : plan.outer) {
      ++outer_checked;
      sizes.push_back(static_cast<int>(f.test_ids.size()));
      int pos = 0;
      std::set<std::string> test_sites;
      for (const std::string& id : f.test_ids) {
        out.require(seen.insert(id).second,
                    fmt("manifest %d: id in two test folds", t));
        pos += by_id.at(id)->label.value_or(0);
        test_sites.insert(by_id.at(id)->site);
      }
      positives.push_back(pos);

      std::set<std::string> pool(f.train_pool.begin(), f.train_pool.end());
      out.require(pool.size() == f.train_pool.size(),
                  fmt("manifest %d: duplicate pool id", t));
      for (const std::string& id : f.test_ids)
        out.require(!pool.count(id), fmt("manifest %d: test id in pool", t));
      out.require(pool.size() + f.test_ids.size() == m.samples.size(),
                  fmt("manifest %d: pool is not the complement", t));
      if (site_exclusive)
        for (const std::string& id : f.train_pool)
          out.require(!test_sites.count(by_id.at(id)->site),
                      fmt("manifest %d: held-out site leaks into pool", t));

      std::set<std::string> val_seen;
      for (const InnerFold& inner : f.inner) {
        for (const std::string& id : inner.val_ids)
          out.require(pool.count(id) && val_seen.insert(id).second,
                      fmt("manifest %d: bad inner val id", t));
        for (const std::string& id : inner.train_ids)
          out.require(pool.count(id) &&
                          !std::count(inner.val_ids.begin(),
                                      inner.val_ids.end(), id),
                      fmt("manifest %d: bad inner train id", t));
        out.require(inner.train_ids.size() + inner.val_ids.size() == pool.size(),
                    fmt("manifest %d: inner fold is not a partition", t));
      }
      out.require(val_seen.size() == pool.size(),
                  fmt("manifest %d: inner vals do not cover the pool", t));
    }
    out.require(seen.size() == m.samples.size(),
                fmt("manifest %d: test folds do not cover the manifest", t));
    if (!site_exclusive && !sizes.empty()) {
      auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
      out.require(*hi - *lo <= 1, fmt("manifest %d: fold sizes not within 1", t));
      auto [pl, ph] = std::minmax_element(positives.begin(), positives.end());
      out.require(*ph - *pl <= 1,
                  fmt("manifest %d: positives not within 1 per fold", t));
    }
  };

  for (int t = 0; t < 200 && out.pass; ++t) {
    const int n = 10 + static_cast<int>(rng.uniform_below(51));
    const int n_sites = 5 + t % 4;
    const int n_pos = 5 + static_cast<int>(rng.uniform_below(n - 9));
    Manifest m;
    for (int i = 0; i < n; ++i) {
      LabeledSample s;
      s.id = fmt("m%d_s%d", t, i);
      s.volume_path = s.id + ".vol";
      s.y = rng.uniform(20.0, 80.0);
      s.site = fmt("site%d", i % n_sites);
      s.label = i < n_pos ? 1 : 0;
      m.samples.push_back(std::move(s));
    }
    rng.shuffle(m.samples);

    check_plan(m, make_folds(m, FoldStrategy::stratified_nested, 100 + t), t,
               false);
    check_plan(m, make_folds(m, FoldStrategy::leave_site_out, 200 + t), t,
               true);
  }
  if (out.pass)
    out.detail = fmt("200 manifests, %d outer folds: partition, balance and "
                     "site exclusion hold",
                     outer_checked);
  return out;
}

Matrix embed_manifest(Model& model, const Manifest& m) {
  const int n = static_cast<int>(m.samples.size());
  Matrix z(n, model.params().cfg.embedding_dim);
  for (int start = 0; start < n; start += 64) {
    std::vector<Volume> batch;
    const int stop = std::min(n, start + 64);
    for (int i = start; i < stop; ++i) {
      Volume v = read_volume(m.resolve(m.samples[i]));
      standardize(v);
      batch.push_back(std::move(v));
    }
    BatchTrace trace;
    EmbeddingMatrix zb = model.embed(batch, trace);
    for (int i = start; i < stop; ++i)
      for (int c = 0; c < z.cols; ++c) z(i, c) = zb(i - start, c);
  }
  return z;
}

// Rank correlation between pair cosine similarity and pair metadata proximity
// on volumes the encoder never saw.
double heldout_pair_spearman(const ModelParams& params, const Manifest& held) {
  Model model(params);
  Matrix z = embed_manifest(model, held);
  std::vector<double> cosine, proximity;
  for (int p = 0; p + 1 < z.rows; p += 2) {
    double dot = 0.0;
    for (int c = 0; c < z.cols; ++c) dot += z(p, c) * z(p + 1, c);
    cosine.push_back(dot);
    proximity.push_back(-std::abs(held.samples[p].y - held.samples[p + 1].y));
  }
  return spearman(cosine, proximity);
}

// 9. End-to-end synthetic trend: metadata-weighted pretraining must align the
// embedding geometry with the metadata better than the sigma=0 baseline, and
// must not cost linear-probe accuracy.
Outcome criterion_9() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  fs::path base = fresh_dir("c9");

  SynthConfig data_cfg;
  data_cfg.n_samples = 512;
  data_cfg.dim = 16;
  data_cfg.seed = 7;
  Manifest train_m = generate_synthetic_dataset(data_cfg, base / "train");
  SynthConfig held_cfg = data_cfg;
  held_cfg.n_samples = 256;
  held_cfg.seed = 8;
  Manifest held_m = generate_synthetic_dataset(held_cfg, base / "held");

  EncoderConfig enc;
  enc.conv_blocks = {{4, 2}, {8, 2}, {16, 2}};
  enc.feature_dim = 16;
  enc.projection_hidden = 32;
  enc.embedding_dim = 16;

  const double sigmas[2] = {5.0, 0.0};
  double rho[2] = {0.0, 0.0};
  double mean_auc[2] = {0.0, 0.0};
  for (int rep = 0; rep < 3; ++rep)
    for (int arm = 0; arm < 2; ++arm) {
      TrainConfig tc;
      tc.base_lr = 1e-3;
      tc.seed = 1 + rep;
      tc.loss.kernel.sigma = sigmas[arm];
      PretrainResult pre = pretrain(train_m, enc, tc);
      if (rep == 0) rho[arm] = heldout_pair_spearman(pre.params, held_m);

      Checkpoint ckpt;
      ckpt.params = std::move(pre.params);
      ckpt.meta.epoch = tc.epochs;
      ckpt.meta.seed = tc.seed;
      FoldPlan plan =
          make_folds(train_m, FoldStrategy::stratified_nested, tc.seed);
      mean_auc[arm] += linear_probe(ckpt, train_m, plan).mean_auc / 3.0;
    }

  const double elapsed = seconds_since(t0);
  out.require(rho[0] > rho[1],
              fmt("pair alignment %.3f (sigma=5) not above %.3f (sigma=0)",
                  rho[0], rho[1]));
  out.require(rho[0] >= 0.3,
              fmt("pair alignment %.3f below the 0.3 floor", rho[0]));
  out.require(mean_auc[0] >= mean_auc[1] - 0.01,
              fmt("probe auc %.4f more than 0.01 below baseline %.4f",
                  mean_auc[0], mean_auc[1]));
  out.require(elapsed <= 900.0, fmt("took %.0f s, budget 900 s", elapsed));
  if (out.pass)
    out.detail = fmt("pair alignment %.3f vs %.3f (floor 0.3); probe auc "
                     "%.4f vs %.4f over 3 seeds",
                     rho[0], rho[1], mean_auc[0], mean_auc[1]);
  return out;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// 10. The same config and seed twice, through the real CLI, must reproduce
// every artifact byte for byte (wall-clock metadata excepted by design).
Outcome criterion_10() {
  Outcome out;
  fs::path dir = fresh_dir("c10");
  std::ofstream(dir / "config.json") << R"({
  "data": {"synth": {"n_samples": 32, "dim": 8, "seed": 5, "n_sites": 3}},
  "model": {"conv_blocks": [[3,2],[4,2]], "feature_dim": 4,
            "projection_hidden": 8, "embedding_dim": 4},
  "train": {"batch_size": 8, "epochs": 2, "seed": 3},
  "kernel": {"sigma": 5.0}
})";

  auto run = [&](const std::string& out_dir) {
    const std::string cfg = (dir / "config.json").string();
    const std::string o = (dir / out_dir).string();
    const char* argv[] = {"yaware", "probe",  "--config", cfg.c_str(),
                          "--out",  o.c_str()};
    return dispatch(6, argv);
  };
  out.require(run("a") == 0 && run("b") == 0, "pipeline run failed");
  if (!out.pass) return out;

  int compared = 0;
  auto same_file = [&](const fs::path& rel) {
    ++compared;
    out.require(read_bytes(dir / "a" / rel) == read_bytes(dir / "b" / rel),
                "artifact " + rel.string() + " differs between runs");
  };
  same_file("report.json");
  same_file("checkpoint.ckpt");
  same_file("loss_curve.csv");
  for (const auto& e : fs::recursive_directory_iterator(dir / "a" / "dataset"))
    if (e.is_regular_file())
      same_file(fs::path("dataset") / e.path().filename());
  if (out.pass)
    out.detail = fmt("checkpoint, report, curve and %d files bit-identical",
                     compared);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* title;
    double budget_s;  // 0 = untimed
    Outcome (*run)();
  };
  const Criterion all[] = {
      {1, "vanishing bandwidth reduces to the plain contrastive loss", 1.0,
       criterion_1},
      {2, "delta kernel reproduces discrete supervised weighting", 0.0,
       criterion_2},
      {3, "losses match brute-force references", 10.0, criterion_3},
      {4, "hand-computed values", 0.0, criterion_4},
      {5, "analytic gradients match finite differences", 60.0, criterion_5},
      {6, "weight-matrix properties", 0.0, criterion_6},
      {7, "schedule and metric pins", 0.0, criterion_7},
      {8, "fold-plan properties", 0.0, criterion_8},
      {9, "synthetic trend favors metadata weighting", 900.0, criterion_9},
      {10, "reruns are bit-identical", 0.0, criterion_10},
  };

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double elapsed = seconds_since(t0);
    if (c.budget_s > 0.0 && elapsed > c.budget_s) {
      o.pass = false;
      o.detail += fmt(" [over budget: %.2f s > %.0f s]", elapsed, c.budget_s);
    }
    failures += !o.pass;
    std::printf("%s  criterion %2d  %s: %s (%.2f s)\n",
                o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(),
                elapsed);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
