#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "yaware/manifest.hpp"

namespace yaware {

enum class FoldStrategy { stratified_nested, leave_site_out };

std::string to_string(FoldStrategy s);
FoldStrategy fold_strategy_from_string(const std::string& s);

struct InnerFold {
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
};

struct OuterFold {
  std::vector<std::string> test_ids;
  // Everything outside the test fold, after the optional n_target cap.
  // The inner folds partition this pool into val slices.
  std::vector<std::string> train_pool;
  std::vector<InnerFold> inner;
};

struct FoldPlan {
  FoldStrategy strategy = FoldStrategy::stratified_nested;
  int n_outer = 5;
  int n_inner = 5;
  std::optional<int> n_target;
  std::vector<OuterFold> outer;
};

// stratified_nested: 5 outer test folds stratified jointly on (label, site),
// each complement split into 5 inner folds the same way. leave_site_out: sites
// are grouped greedily into 5 near-equal groups; each fold tests one group and
// runs a stratified inner CV on the remainder, so no site ever appears on both
// sides. n_target caps each fold's training pool (label-stratified subsample,
// applied after the outer split) while test folds stay untouched.
FoldPlan make_folds(const Manifest& m, FoldStrategy strategy,
                    std::uint64_t seed,
                    std::optional<int> n_target = std::nullopt);

}  // namespace yaware
