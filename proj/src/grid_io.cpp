#include "aesa/grid_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace aesa {
namespace {

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

  std::string get_string(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw ContractError("grid file: truncated header");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

void put_axis(std::string& out, const GridAxis& axis) {
  if (axis.unit.size() > 0xFFFF) throw ContractError("grid file: unit string too long");
  put(out, axis.start);
  put(out, axis.step);
  put(out, static_cast<std::uint16_t>(axis.unit.size()));
  out += axis.unit;
}

GridAxis get_axis(Reader& in) {
  GridAxis a;
  a.start = in.get<double>();
  a.step = in.get<double>();
  a.unit = in.get_string(in.get<std::uint16_t>());
  return a;
}

void check_dims(std::size_t rows, std::size_t cols) {
  if (rows > 0xFFFFFFFFu || cols > 0xFFFFFFFFu) throw ContractError("grid file: dimensions exceed u32");
}

}  // namespace

GridFile make_grid_file(const RealGrid& grid, GridAxis row_axis, GridAxis col_axis) {
  check_dims(grid.rows(), grid.cols());
  GridFile g{static_cast<std::uint32_t>(grid.rows()), static_cast<std::uint32_t>(grid.cols()), std::move(row_axis),
             std::move(col_axis), false, {}};
  g.payload.reserve(grid.size());
  for (double v : grid.values()) g.payload.push_back(static_cast<float>(v));
  return g;
}

GridFile make_grid_file(const ComplexGrid& grid, GridAxis row_axis, GridAxis col_axis) {
  check_dims(grid.rows(), grid.cols());
  GridFile g{static_cast<std::uint32_t>(grid.rows()), static_cast<std::uint32_t>(grid.cols()), std::move(row_axis),
             std::move(col_axis), true, {}};
  g.payload.reserve(2 * grid.size());
  for (const cplx& v : grid.values()) {
    g.payload.push_back(static_cast<float>(v.real()));
    g.payload.push_back(static_cast<float>(v.imag()));
  }
  return g;
}

std::string encode_grid(const GridFile& grid) {
  const std::size_t expected = static_cast<std::size_t>(grid.rows) * grid.cols * (grid.is_complex ? 2 : 1);
  if (grid.payload.size() != expected) throw ContractError("grid file: payload size does not match dimensions");
  std::string out = "AESG";
  put(out, kGridVersion);
  put(out, grid.rows);
  put(out, grid.cols);
  put_axis(out, grid.row_axis);
  put_axis(out, grid.col_axis);
  out.reserve(out.size() + 4 * grid.payload.size());
  for (float v : grid.payload) put(out, v);
  return out;
}

GridFile decode_grid(const std::string& bytes) {
  Reader in(bytes);
  if (in.get_string(4) != "AESG") throw ContractError("grid file: bad magic");
  const auto version = in.get<std::uint16_t>();
  if (version != kGridVersion) throw ContractError("grid file: unsupported version " + std::to_string(version));
  GridFile g;
  g.rows = in.get<std::uint32_t>();
  g.cols = in.get<std::uint32_t>();
  g.row_axis = get_axis(in);
  g.col_axis = get_axis(in);
  const std::size_t cells = static_cast<std::size_t>(g.rows) * g.cols;
  const std::size_t rest = in.remaining();
  if (rest == 4 * cells) {
    g.is_complex = false;
  } else if (rest == 8 * cells) {
    g.is_complex = true;
  } else {
    throw ContractError("grid file: payload of " + std::to_string(rest) + " bytes fits neither real nor complex layout");
  }
  g.payload.resize(rest / 4);
  for (float& v : g.payload) v = in.get<float>();
  return g;
}

void write_grid(const std::string& path, const GridFile& grid) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write grid file '" + path + "'");
  const std::string bytes = encode_grid(grid);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

GridFile read_grid(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open grid file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_grid(ss.str());
}

}  // namespace aesa
