#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "aesa/grid_io.hpp"
#include "oracles.hpp"

using namespace aesa;

namespace {

ComplexGrid random_complex(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  oracle::Noise gen(seed);
  ComplexGrid g(rows, cols);
  for (cplx& x : g.values()) x = gen(1.0);
  return g;
}

}  // namespace

TEST(GridIo, RoundTripsRealAndComplex) {
  for (std::size_t rows : {1u, 3u, 17u}) {
    for (std::size_t cols : {1u, 8u, 33u}) {
      const auto c = make_grid_file(random_complex(rows, cols, rows * 100 + cols), {9000.0, 2.4, "m"},
                                    {-15.0, 0.234375, "m/s"});
      EXPECT_EQ(decode_grid(encode_grid(c)), c);
      RealGrid r(rows, cols);
      for (std::size_t i = 0; i < r.size(); ++i) r.values()[i] = 0.5 * static_cast<double>(i) - 3.0;
      const auto f = make_grid_file(r, {0.0, 1.0, ""}, {0.0, 1.0, "Hz"});
      const auto back = decode_grid(encode_grid(f));
      EXPECT_EQ(back, f);
      EXPECT_FALSE(back.is_complex);
    }
  }
}

TEST(GridIo, HeaderLayoutIsLittleEndian) {
  const auto g = make_grid_file(RealGrid(2, 3, 1.5), {1.0, 2.0, "m"}, {3.0, 4.0, "Hz"});
  const std::string b = encode_grid(g);
  ASSERT_EQ(b.substr(0, 4), "AESG");
  EXPECT_EQ(static_cast<unsigned char>(b[4]), 1u);
  EXPECT_EQ(static_cast<unsigned char>(b[5]), 0u);
  EXPECT_EQ(static_cast<unsigned char>(b[6]), 2u);
  EXPECT_EQ(static_cast<unsigned char>(b[10]), 3u);
  double start = 0.0;
  std::memcpy(&start, b.data() + 14, 8);
  EXPECT_EQ(start, 1.0);
  // header 4+2+4+4, two axes of 8+8+2+unit, six f32 values
  EXPECT_EQ(b.size(), 14u + (18u + 1u) + (18u + 2u) + 6u * 4u);
}

TEST(GridIo, PayloadSizeDeterminesElementKind) {
  const auto c = make_grid_file(random_complex(4, 5, 1), {}, {});
  const std::string b = encode_grid(c);
  EXPECT_TRUE(decode_grid(b).is_complex);
  // Dropping half the payload turns it into a valid real grid of the same shape.
  const auto r = decode_grid(b.substr(0, b.size() - 4 * 20));
  EXPECT_FALSE(r.is_complex);
  EXPECT_EQ(r.payload.size(), 20u);
}

TEST(GridIo, RejectsCorruptInput) {
  const std::string good = encode_grid(make_grid_file(RealGrid(3, 3, 1.0), {0.0, 1.0, "m"}, {0.0, 1.0, "Hz"}));
  std::string bad = good;
  bad[0] = 'X';
  EXPECT_THROW(decode_grid(bad), ContractError);
  bad = good;
  bad[4] = 2;
  EXPECT_THROW(decode_grid(bad), ContractError);
  EXPECT_THROW(decode_grid(good.substr(0, 10)), ContractError);
  EXPECT_THROW(decode_grid(good.substr(0, good.size() - 1)), ContractError);
  EXPECT_THROW(decode_grid(good + "x"), ContractError);
  GridFile wrong = decode_grid(good);
  wrong.payload.pop_back();
  EXPECT_THROW(encode_grid(wrong), ContractError);
}

TEST(GridIo, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "aesa_grid_io_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "g.aesg").string();
  const auto g = make_grid_file(random_complex(6, 7, 9), {1.0, 1.0, "m"}, {2.0, 0.5, "Hz"});
  write_grid(path, g);
  EXPECT_EQ(read_grid(path), g);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(read_grid(path), ConfigError);
}
