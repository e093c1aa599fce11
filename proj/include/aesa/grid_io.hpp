#pragma once

// Binary grid container used for RD maps, ISAR images and raw-cube exports.
//
// Layout (all little-endian):
//   "AESG"                       4 bytes
//   version                      u16 (currently 1)
//   rows, cols                   u32, u32
//   row axis, column axis        each: start f64, step f64, unit length u16, unit UTF-8 bytes
//   payload                      row-major f32 values, or interleaved (re, im) f32 pairs
//
// The element kind is implied by the payload size: rows*cols*4 bytes for real
// grids, rows*cols*8 for complex ones.

#include <cstdint>
#include <string>
#include <vector>

#include "aesa/common.hpp"

namespace aesa {

struct GridAxis {
  double start = 0.0;
  double step = 1.0;
  std::string unit;

  bool operator==(const GridAxis&) const = default;
};

struct GridFile {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  GridAxis row_axis;
  GridAxis col_axis;
  bool is_complex = false;
  std::vector<float> payload;  // rows*cols, or 2*rows*cols when complex

  bool operator==(const GridFile&) const = default;
};

inline constexpr std::uint16_t kGridVersion = 1;

GridFile make_grid_file(const RealGrid& grid, GridAxis row_axis, GridAxis col_axis);
GridFile make_grid_file(const ComplexGrid& grid, GridAxis row_axis, GridAxis col_axis);

std::string encode_grid(const GridFile& grid);
GridFile decode_grid(const std::string& bytes);

void write_grid(const std::string& path, const GridFile& grid);
GridFile read_grid(const std::string& path);

}  // namespace aesa
