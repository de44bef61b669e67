#pragma once

#include <cstddef>
#include <span>

namespace leadsheet::metrics {

// Mean and population standard deviation of a sample. An empty sample gives
// count 0 and zeros.
struct Stats {
  double mean = 0;
  double std = 0;
  std::size_t count = 0;
  friend bool operator==(const Stats&, const Stats&) = default;
};

Stats summarize(std::span<const double> values);

}  // namespace leadsheet::metrics
