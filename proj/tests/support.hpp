#pragma once

#include <random>

#include "itsr/image.hpp"

namespace itsr::helpers {

inline Image random_image(int side, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> px(0, 255);
  Image im(side);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) im(r, c) = static_cast<std::uint8_t>(px(rng));
  return im;
}

}  // namespace itsr::helpers
