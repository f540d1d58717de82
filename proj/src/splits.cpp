#include "artss/splits.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "artss/error.hpp"
#include "artss/rng.hpp"

namespace artss {

SplitProtocol study_protocol() { return SplitProtocol{970, 291, 3}; }

SplitProtocol scaled_protocol(std::size_t id_count) {
  const auto test = static_cast<std::size_t>(
      std::llround(static_cast<double>(id_count) * 291.0 / 970.0));
  return SplitProtocol{0, test, 3};
}

SplitSet make_splits(const std::vector<std::string>& ids, std::uint64_t seed,
                     const SplitProtocol& protocol) {
  if (protocol.expected_ids != 0 && ids.size() != protocol.expected_ids) {
    fail(ErrorKind::kProtocol, "split protocol expects exactly " +
                                   std::to_string(protocol.expected_ids) +
                                   " ids, got " + std::to_string(ids.size()));
  }
  if (protocol.folds < 1) fail(ErrorKind::kProtocol, "fold count must be >= 1");
  std::set<std::string> unique(ids.begin(), ids.end());
  if (unique.size() != ids.size()) {
    fail(ErrorKind::kProtocol, "split input contains duplicate ids");
  }
  if (ids.size() < protocol.test_count + protocol.folds + 1) {
    fail(ErrorKind::kProtocol, "too few ids (" + std::to_string(ids.size()) +
                                   ") for " + std::to_string(protocol.folds) +
                                   " folds plus " +
                                   std::to_string(protocol.test_count) +
                                   " test ids");
  }

  // Shuffle a sorted copy so the result does not depend on input order.
  std::vector<std::string> order(unique.begin(), unique.end());
  Rng rng(seed);
  rng.shuffle(order);

  const auto test_end = static_cast<std::ptrdiff_t>(protocol.test_count);
  std::vector<std::string> test(order.begin(), order.begin() + test_end);
  std::vector<std::string> pool(order.begin() + test_end, order.end());

  const std::size_t k = protocol.folds;
  const std::size_t val_size = (pool.size() + k - 1) / k;

  SplitSet out;
  out.external_test.test_ids = test;
  std::set<std::string> duplicated;
  for (std::size_t f = 0; f < k; ++f) {
    DatasetSplit split;
    split.fold = static_cast<int>(f + 1);
    const std::size_t begin = std::min(f * val_size, pool.size());
    const std::size_t end = std::min(begin + val_size, pool.size());
    std::vector<std::string> val(pool.begin() + static_cast<std::ptrdiff_t>(begin),
                                 pool.begin() + static_cast<std::ptrdiff_t>(end));
    for (std::size_t i = 0; val.size() < val_size && i < begin; ++i) {
      val.push_back(pool[i]);
      duplicated.insert(pool[i]);
    }
    const std::set<std::string> val_set(val.begin(), val.end());
    for (const auto& id : pool) {
      if (!val_set.contains(id)) split.train_ids.push_back(id);
    }
    split.val_ids = std::move(val);
    split.test_ids = test;
    out.folds.push_back(std::move(split));
  }
  out.duplicated_val_ids.assign(duplicated.begin(), duplicated.end());
  return out;
}

SplitSet make_study_splits(const std::vector<std::string>& ids,
                           std::uint64_t seed) {
  return make_splits(ids, seed, study_protocol());
}

}  // namespace artss
