#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>

#include "dvem/types.hpp"

namespace dvem {

struct RegionKey {
  std::int32_t rx = 0;
  std::int32_t ry = 0;

  auto operator<=>(const RegionKey&) const = default;
};

/// Partition of the query frame into square cells anchored at the top-left
/// corner; right and bottom cells may be smaller when the frame size is not a
/// multiple of the cell size. A zero parameter is the per-element sentinel:
/// every distinct element position is its own region.
class RegionGrid {
 public:
  static RegionGrid build(int width, int height, int param) {
    if (width < 1 || height < 1) {
      throw Error(Errc::kInternal, "region grid requires a non-empty frame");
    }
    if (param < 0) {
      throw Error(Errc::kInternal, "region grid parameter must be >= 0");
    }
    RegionGrid g;
    g.width_ = width;
    g.height_ = height;
    g.param_ = param;
    if (param == 0) {
      g.cell_ = 1;
    } else {
      // Cell size in real arithmetic, floored, never below one pixel.
      const double side = std::min(static_cast<double>(width) / param,
                                   static_cast<double>(height) / param);
      g.cell_ = std::max(1, static_cast<int>(std::floor(side)));
    }
    return g;
  }

  RegionKey region_of(const ElementKey& e) const {
    return RegionKey{e.x / cell_, e.y / cell_};
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int cell_size() const { return cell_; }
  bool per_element() const { return param_ == 0; }
  int columns() const { return (width_ + cell_ - 1) / cell_; }
  int rows() const { return (height_ + cell_ - 1) / cell_; }

 private:
  int width_ = 1;
  int height_ = 1;
  int param_ = 0;
  int cell_ = 1;
};

}  // namespace dvem
