#pragma once

#include <cstddef>

// Fixed-value draw source for checking update rules by hand.
struct StubRandom {
  double unit = 1.0;    // returned for r1, r2
  double signed_ = 0.0; // returned for alpha, beta
  std::size_t calls = 0;

  double uniform01() {
    ++calls;
    return unit;
  }
  double uniform_signed() {
    ++calls;
    return signed_;
  }
  std::size_t below(std::size_t) {
    ++calls;
    return 0;
  }
};
