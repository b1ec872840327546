#pragma once

#include <algorithm>
#include <cmath>

#include "dht/grids.hpp"

namespace dht::detail {

/// 3x3 Sobel derivatives with clamped borders. x runs with the column
/// index, y points up (against the row index). Units of 1/h.
inline void sobel(const Field& f, double h, Field& gx, Field& gy) {
  const int ny = static_cast<int>(f.rows()), nx = static_cast<int>(f.cols());
  gx.resize(ny, nx);
  gy.resize(ny, nx);
  auto at = [&](int iy, int ix) { return f(std::clamp(iy, 0, ny - 1), std::clamp(ix, 0, nx - 1)); };
  for (int ix = 0; ix < nx; ++ix)
    for (int iy = 0; iy < ny; ++iy) {
      gx(iy, ix) = (at(iy - 1, ix + 1) + 2 * at(iy, ix + 1) + at(iy + 1, ix + 1) - at(iy - 1, ix - 1) -
                    2 * at(iy, ix - 1) - at(iy + 1, ix - 1)) / (8 * h);
      gy(iy, ix) = (at(iy - 1, ix - 1) + 2 * at(iy - 1, ix) + at(iy - 1, ix + 1) - at(iy + 1, ix - 1) -
                    2 * at(iy + 1, ix) - at(iy + 1, ix + 1)) / (8 * h);
    }
}

/// Separable Gaussian blur with clamped borders; sigma in cells.
inline Field gaussianBlur(const Field& f, double sigma) {
  const int r = static_cast<int>(std::ceil(2 * sigma));
  Eigen::ArrayXd k(2 * r + 1);
  for (int i = -r; i <= r; ++i) k(i + r) = std::exp(-0.5 * i * i / (sigma * sigma));
  k /= k.sum();
  const int ny = static_cast<int>(f.rows()), nx = static_cast<int>(f.cols());
  Field t = Field::Zero(ny, nx), out = Field::Zero(ny, nx);
  for (int ix = 0; ix < nx; ++ix)
    for (int iy = 0; iy < ny; ++iy)
      for (int i = -r; i <= r; ++i) t(iy, ix) += k(i + r) * f(std::clamp(iy + i, 0, ny - 1), ix);
  for (int ix = 0; ix < nx; ++ix)
    for (int iy = 0; iy < ny; ++iy)
      for (int i = -r; i <= r; ++i) out(iy, ix) += k(i + r) * t(iy, std::clamp(ix + i, 0, nx - 1));
  return out;
}

/// Index range of grid cells whose centres may lie within radius r of (x, y).
struct Window {
  int ix0, ix1, iy0, iy1;
};
inline Window window(const Grid& g, double x, double y, double r) {
  Window w;
  w.ix0 = std::max(0, static_cast<int>(std::floor((x - r) / g.h - 0.5)));
  w.ix1 = std::min(g.nx - 1, static_cast<int>(std::ceil((x + r) / g.h - 0.5)));
  w.iy0 = std::max(0, static_cast<int>(std::floor((g.lengthY() - y - r) / g.h - 0.5)));
  w.iy1 = std::min(g.ny - 1, static_cast<int>(std::ceil((g.lengthY() - y + r) / g.h - 0.5)));
  return w;
}

}  // namespace dht::detail
