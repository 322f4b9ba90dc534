#include "yaware/folds.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "yaware/errors.hpp"
#include "yaware/rng.hpp"

namespace yaware {

std::string to_string(FoldStrategy s) {
  return s == FoldStrategy::stratified_nested ? "stratified_nested"
                                              : "leave_site_out";
}

FoldStrategy fold_strategy_from_string(const std::string& s) {
  if (s == "stratified_nested") return FoldStrategy::stratified_nested;
  if (s == "leave_site_out") return FoldStrategy::leave_site_out;
  throw ParameterError("unknown fold strategy \"" + s + "\"");
}

namespace {

struct Item {
  int index;  // position in the manifest
  int label;
  std::string site;
  const std::string* id;
};

// Round-robin over (label, site) strata with one continuing cursor. Any
// contiguous run of the dealing is balanced within one sample per fold, so
// the split is within-1 balanced globally, per label, and per stratum.
std::vector<int> assign_stratified(const std::vector<Item>& items, int k,
                                   RngStream& rng) {
  std::map<std::pair<int, std::string>, std::vector<int>> strata;
  for (std::size_t i = 0; i < items.size(); ++i)
    strata[{items[i].label, items[i].site}].push_back(static_cast<int>(i));

  std::vector<int> fold_of(items.size(), -1);
  int cursor = 0;
  for (auto& [key, members] : strata) {
    rng.shuffle(members);
    for (int m : members) fold_of[m] = cursor++ % k;
  }
  return fold_of;
}

std::vector<Item> collect_items(const Manifest& m) {
  std::vector<Item> items;
  items.reserve(m.samples.size());
  for (std::size_t i = 0; i < m.samples.size(); ++i) {
    const auto& s = m.samples[i];
    if (!s.label)
      throw ValidationError("sample \"" + s.id +
                            "\" has no label; folds need labeled data");
    items.push_back({static_cast<int>(i), *s.label, s.site, &s.id});
  }
  return items;
}

// Label-stratified deterministic subsample of pool down to n_target items,
// returned in the pool's original order. Proportional allocation by largest
// remainder.
std::vector<Item> subsample_pool(const std::vector<Item>& pool, int n_target,
                                 RngStream& rng) {
  if (n_target <= 0) throw ParameterError("n_target must be positive");
  if (static_cast<int>(pool.size()) <= n_target) return pool;

  std::map<int, std::vector<int>> by_label;  // label -> positions in pool
  for (std::size_t i = 0; i < pool.size(); ++i)
    by_label[pool[i].label].push_back(static_cast<int>(i));

  // Largest-remainder allocation of n_target across labels.
  std::vector<std::pair<int, double>> quota;  // (label, exact share)
  for (const auto& [label, members] : by_label)
    quota.push_back({label, static_cast<double>(members.size()) * n_target /
                                static_cast<double>(pool.size())});
  std::map<int, int> take;
  int assigned = 0;
  for (const auto& [label, q] : quota) {
    take[label] = static_cast<int>(q);
    assigned += take[label];
  }
  std::vector<std::pair<double, int>> remainders;  // (-frac, label)
  for (const auto& [label, q] : quota)
    remainders.push_back({-(q - static_cast<int>(q)), label});
  std::sort(remainders.begin(), remainders.end());
  for (const auto& [negfrac, label] : remainders) {
    if (assigned >= n_target) break;
    ++take[label];
    ++assigned;
  }

  std::set<int> chosen;
  for (auto& [label, members] : by_label) {
    int want = std::min<int>(take[label], static_cast<int>(members.size()));
    rng.shuffle(members);
    for (int i = 0; i < want; ++i) chosen.insert(members[i]);
  }
  std::vector<Item> out;
  out.reserve(chosen.size());
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (chosen.count(static_cast<int>(i))) out.push_back(pool[i]);
  return out;
}

std::vector<std::string> ids_of(const std::vector<Item>& items) {
  std::vector<std::string> ids;
  ids.reserve(items.size());
  for (const auto& it : items) ids.push_back(*it.id);
  return ids;
}

std::vector<InnerFold> make_inner(const std::vector<Item>& pool, int k,
                                  RngStream& rng) {
  if (static_cast<int>(pool.size()) < k)
    throw ParameterError("training pool of " + std::to_string(pool.size()) +
                         " is smaller than " + std::to_string(k) +
                         " inner folds");
  std::vector<int> fold_of = assign_stratified(pool, k, rng);
  std::vector<InnerFold> inner(k);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (int j = 0; j < k; ++j) {
      if (fold_of[i] == j)
        inner[j].val_ids.push_back(*pool[i].id);
      else
        inner[j].train_ids.push_back(*pool[i].id);
    }
  }
  return inner;
}

// Greedy grouping of sites into k near-equal groups by sample count.
std::vector<std::vector<std::string>> group_sites(
    const std::vector<Item>& items, int k) {
  std::map<std::string, int> counts;
  for (const auto& it : items) counts[it.site]++;
  if (static_cast<int>(counts.size()) < k)
    throw ParameterError("leave_site_out needs at least " +
                         std::to_string(k) + " sites, got " +
                         std::to_string(counts.size()));

  std::vector<std::pair<std::string, int>> sites(counts.begin(), counts.end());
  std::sort(sites.begin(), sites.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::vector<std::vector<std::string>> groups(k);
  std::vector<int> load(k, 0);
  for (const auto& [site, count] : sites) {
    int g = static_cast<int>(
        std::min_element(load.begin(), load.end()) - load.begin());
    groups[g].push_back(site);
    load[g] += count;
  }
  return groups;
}

}  // namespace

FoldPlan make_folds(const Manifest& m, FoldStrategy strategy,
                    std::uint64_t seed, std::optional<int> n_target) {
  std::vector<Item> items = collect_items(m);
  FoldPlan plan;
  plan.strategy = strategy;
  plan.n_target = n_target;
  const int K = plan.n_outer;

  if (static_cast<int>(items.size()) < K)
    throw ParameterError("fewer samples (" + std::to_string(items.size()) +
                         ") than folds (" + std::to_string(K) + ")");

  std::vector<std::vector<Item>> test_sets(K);
  std::vector<std::vector<Item>> pools(K);

  if (strategy == FoldStrategy::stratified_nested) {
    RngStream rng(seed, stream_tag::fold);
    std::vector<int> fold_of = assign_stratified(items, K, rng);
    for (std::size_t i = 0; i < items.size(); ++i) {
      for (int f = 0; f < K; ++f) {
        if (fold_of[i] == f)
          test_sets[f].push_back(items[i]);
        else
          pools[f].push_back(items[i]);
      }
    }
  } else {
    auto groups = group_sites(items, K);
    for (int f = 0; f < K; ++f) {
      std::set<std::string> held(groups[f].begin(), groups[f].end());
      for (const auto& it : items) {
        if (held.count(it.site))
          test_sets[f].push_back(it);
        else
          pools[f].push_back(it);
      }
    }
  }

  for (int f = 0; f < K; ++f) {
    OuterFold fold;
    fold.test_ids = ids_of(test_sets[f]);
    std::vector<Item> pool = pools[f];
    if (n_target) {
      RngStream sub_rng(seed, stream_tag::subsample,
                        static_cast<std::uint64_t>(f));
      pool = subsample_pool(pool, *n_target, sub_rng);
    }
    fold.train_pool = ids_of(pool);
    RngStream inner_rng(seed, stream_tag::inner_fold,
                        static_cast<std::uint64_t>(f));
    fold.inner = make_inner(pool, plan.n_inner, inner_rng);
    plan.outer.push_back(std::move(fold));
  }
  return plan;
}

}  // namespace yaware
