#pragma once

// Cross-validation protocol: a held-out external test set shared by every
// fold, and k validation partitions over the remaining ids.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace artss {

struct DatasetSplit {
  std::optional<int> fold;  // nullopt marks the external test split
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::vector<std::string> test_ids;

  bool is_external_test() const { return !fold.has_value(); }
  bool operator==(const DatasetSplit&) const = default;
};

struct SplitProtocol {
  std::size_t expected_ids = 0;  // 0 accepts any count
  std::size_t test_count = 0;
  std::size_t folds = 3;
};

// 970 ids: 291 external test, 3 folds of 452 train / 227 validation.
SplitProtocol study_protocol();
// Same proportions applied to an arbitrary id count (used for small fixtures).
SplitProtocol scaled_protocol(std::size_t id_count);

struct SplitSet {
  std::vector<DatasetSplit> folds;
  DatasetSplit external_test;
  // Validation ids that appear in more than one fold, because the pool does
  // not divide evenly into equal validation sets.
  std::vector<std::string> duplicated_val_ids;
};

// Deterministic for a fixed seed. Each fold's validation set has
// ceil(pool / folds) ids; the last fold is topped up with ids from the start
// of the shuffled pool, which are then reported in duplicated_val_ids.
SplitSet make_splits(const std::vector<std::string>& ids, std::uint64_t seed,
                     const SplitProtocol& protocol);

SplitSet make_study_splits(const std::vector<std::string>& ids,
                           std::uint64_t seed);

}  // namespace artss
