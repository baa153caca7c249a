#pragma once

#include <vector>

#include "rattn/types.hpp"

namespace rattn {

struct Example {
  std::vector<int> tokens;
  int label = 0;
};

struct Dataset {
  std::vector<Example> examples;
  Index vocab = 0;
  Index classes = 0;

  Index size() const { return static_cast<Index>(examples.size()); }
  bool empty() const { return examples.empty(); }
};

struct DataSplits {
  Dataset train;
  Dataset val;
  Dataset test;
};

}  // namespace rattn
