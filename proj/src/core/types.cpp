#include "dff/core/types.hpp"

#include <algorithm>

namespace dff {

const BuildingSeries* Dataset::find(int building_id) const {
  for (const auto& b : buildings)
    if (b.building_id == building_id) return &b;
  return nullptr;
}

std::vector<int> id_range(int lo, int hi) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(std::max(0, hi - lo + 1)));
  for (int i = lo; i <= hi; ++i) out.push_back(i);
  return out;
}

bool contains_id(const std::vector<int>& ids, int id) {
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

SplitSpec default_split_spec() {
  SplitSpec s;
  // Ausgrid year boundaries: train/val/test are consecutive July-June years.
  s.train_range = {make_hour(2010, 7, 1), make_hour(2011, 7, 1)};
  s.val_range = {make_hour(2011, 7, 1), make_hour(2012, 7, 1)};
  s.test_range = {make_hour(2012, 7, 1), make_hour(2013, 7, 1)};
  s.finetune_buildings = id_range(1, 50);
  s.surrogate_val_buildings = id_range(51, 100);
  s.eval_buildings = id_range(101, 300);
  return s;
}

}  // namespace dff
