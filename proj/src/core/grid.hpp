#pragma once

#include <string>
#include <vector>

#include "types.hpp"
#include "vendor_json.hpp"

namespace biflab {

struct Box {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool degenerate() const { return !(x1 > x0) || !(y1 > y0); }
};

/// Rectangular scalar field over a 2-real-dimensional chart window.
/// Row-major, index iy * nx + ix; cell centers.
struct GridField {
  Box box;
  int nx = 0, ny = 0;
  std::vector<double> values;
  nlohmann::json meta;

  GridField() = default;
  GridField(Box b, int nx_, int ny_);

  double cell_w() const { return box.width() / nx; }
  double cell_h() const { return box.height() / ny; }
  double x_of(int ix) const { return box.x0 + (ix + 0.5) * cell_w(); }
  double y_of(int iy) const { return box.y0 + (iy + 0.5) * cell_h(); }
  double& at(int ix, int iy) { return values[static_cast<size_t>(iy) * nx + ix]; }
  double at(int ix, int iy) const {
    return values[static_cast<size_t>(iy) * nx + ix];
  }
  double sum() const;
  double max_value() const;
  /// sum * cell area
  double mass() const;
};

/// Flat binary format: magic "BIFGRID1", box (4 float64), nx, ny (uint32),
/// little-endian float64 row-major values. Sidecar <path>.json holds meta.
void grid_write(const GridField& g, const std::string& path);
GridField grid_read(const std::string& path);

/// 8-bit grayscale-mapped PNG (value 0 -> black, max -> white) unless a
/// binary field is given (exported as 1-bit-style 0/255). Deterministic.
void grid_write_png(const GridField& g, const std::string& path,
                    bool binary = false);

/// Minimal PNG writer used by grid_write_png (zlib-deflated, fixed layout).
void png_write_gray8(const std::string& path, int w, int h,
                     const std::vector<unsigned char>& pixels);

}  // namespace biflab
