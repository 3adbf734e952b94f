// Copyright 2026 The MCM Codec Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "mcm/error.hpp"
#include "mcm/image.hpp"
#include "mcm/netpbm.hpp"
#include "test_util.hpp"

namespace mcm {
namespace {

using testing::TempDir;

std::vector<uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an mcm::Error";
  return ErrorKind::kValidation;
}

TEST(Netpbm, ReadsTwoByTwoPpm) {
  std::string file = "P6\n2 2\n255\n";
  const uint8_t px[] = {255, 0, 0, 0, 255, 0, 0, 0, 255, 255, 255, 255};
  file.append(reinterpret_cast<const char*>(px), sizeof px);
  const ImageRGB img = decode_ppm(bytes_of(file));
  ASSERT_EQ(img.width, 2);
  ASSERT_EQ(img.height, 2);
  EXPECT_EQ(std::vector<uint8_t>(px, px + 12), img.data);
  EXPECT_EQ(img.at(1, 1)[0], 255);
  EXPECT_EQ(img.at(1, 0)[1], 255);
}

TEST(Netpbm, HeaderWithCommentsAndTabs) {
  std::string file = "P6 # comment\n#another\n1\t1 255\n";
  file += "abc";
  const ImageRGB img = decode_ppm(bytes_of(file));
  EXPECT_EQ(img.data, (std::vector<uint8_t>{'a', 'b', 'c'}));
}

TEST(Netpbm, RejectsWrongMagic) {
  const auto pgm = bytes_of("P5\n1 1\n255\n\x01");
  try {
    decode_ppm(pgm);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFormat);
    EXPECT_NE(std::string(e.what()).find("expected P6"), std::string::npos);
  }
  const auto ppm = bytes_of("P6\n1 1\n255\nabc");
  EXPECT_EQ(kind_of([&] { decode_pgm(ppm); }), ErrorKind::kFormat);
}

TEST(Netpbm, RejectsBadHeaders) {
  EXPECT_EQ(kind_of([] { decode_ppm(bytes_of("P6\n1 1\n65535\nabcdef")); }), ErrorKind::kFormat);
  EXPECT_EQ(kind_of([] { decode_ppm(bytes_of("P6\n2 2\n255\nabc")); }), ErrorKind::kFormat);
  EXPECT_EQ(kind_of([] { decode_ppm(bytes_of("P6\n0 1\n255\n")); }), ErrorKind::kFormat);
  EXPECT_EQ(kind_of([] { decode_ppm(bytes_of("P6\nx 1\n255\n")); }), ErrorKind::kFormat);
  EXPECT_EQ(kind_of([] { decode_ppm(bytes_of("")); }), ErrorKind::kFormat);
}

TEST(Netpbm, PatchDivisibilityNamesTheDimension) {
  std::string file = "P6\n17 16\n255\n" + std::string(17 * 16 * 3, '\0');
  try {
    decode_ppm(bytes_of(file), 16);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kValidation);
    EXPECT_NE(std::string(e.what()).find("width 17"), std::string::npos);
  }
}

TEST(Netpbm, ReadsFullSizeImage) {
  TempDir dir("ppm256");
  std::mt19937_64 rng(1);
  const ImageRGB img = testing::random_image(rng, 256, 256);
  save_ppm(img, dir / "a.ppm");
  const ImageRGB back = load_ppm(dir / "a.ppm", 16);
  EXPECT_EQ(back.width, 256);
  EXPECT_EQ(back.height, 256);
  EXPECT_EQ(back, img);
}

TEST(Netpbm, RoundTripRandomSizes) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const int w = 1 + int(rng() % 40), h = 1 + int(rng() % 40);
    const ImageRGB img = testing::random_image(rng, w, h);
    EXPECT_EQ(decode_ppm(encode_ppm(img)), img);
  }
}

TEST(Netpbm, OnePixelWhiteLayout) {
  const ImageRGB img = testing::constant_image(1, 1, 255, 255, 255);
  const auto bytes = encode_ppm(img);
  const std::string header = "P6\n1 1\n255\n";
  ASSERT_EQ(bytes.size(), header.size() + 3);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + std::ptrdiff_t(header.size())), header);
  EXPECT_EQ(bytes[header.size()], 0xFF);
  EXPECT_EQ(bytes[header.size() + 1], 0xFF);
  EXPECT_EQ(bytes[header.size() + 2], 0xFF);
}

TEST(Netpbm, UnwritablePathIsIoError) {
  const ImageRGB img(1, 1);
  EXPECT_EQ(kind_of([&] { save_ppm(img, "/nonexistent_dir_mcm/x.ppm"); }), ErrorKind::kIo);
  EXPECT_EQ(kind_of([&] { load_ppm("/nonexistent_dir_mcm/x.ppm"); }), ErrorKind::kIo);
}

TEST(Netpbm, LoadErrorsCarryThePath) {
  TempDir dir("ppmpath");
  std::ofstream(dir / "bad.ppm") << "P5\n1 1\n255\nx";
  try {
    load_ppm(dir / "bad.ppm");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(e.message().find("bad.ppm"), std::string::npos);
    EXPECT_NE(e.message().find("expected P6"), std::string::npos);
  }
}

TEST(Netpbm, PgmLabels) {
  TempDir dir("pgm");
  SemanticMap zeros(4, 3);
  save_pgm(zeros, dir / "z.pgm");
  EXPECT_EQ(load_pgm(dir / "z.pgm"), zeros);
  SemanticMap two(4, 4);
  for (int y = 1; y < 3; ++y) {
    for (int x = 1; x < 3; ++x) two.at(x, y) = 1;
  }
  save_pgm(two, dir / "two.pgm");
  const SemanticMap back = load_pgm(dir / "two.pgm");
  EXPECT_EQ(back, two);
  EXPECT_EQ(back.at(1, 1), 1);
  EXPECT_EQ(back.at(0, 0), 0);
}

TEST(PatchGrid, Geometry) {
  const PatchGrid g(256, 256, 16);
  EXPECT_EQ(g.count(), 256u);
  EXPECT_EQ(g.rows(), 16);
  EXPECT_EQ(g.cols(), 16);
  EXPECT_EQ(g.patch_area(), 256u);
  EXPECT_EQ(g.row_of(17), 1);
  EXPECT_EQ(g.col_of(17), 1);
  const PatchGrid wide(64, 32, 16);
  EXPECT_EQ(wide.cols(), 4);
  EXPECT_EQ(wide.rows(), 2);
  EXPECT_EQ(wide.row_of(5), 1);
  EXPECT_EQ(wide.col_of(5), 1);
}

TEST(PatchGrid, RejectsBadSizes) {
  EXPECT_THROW(PatchGrid(256, 256, 1), Error);
  EXPECT_THROW(PatchGrid(250, 256, 16), Error);
  try {
    PatchGrid(256, 250, 16);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("height 250"), std::string::npos);
  }
}

TEST(Color, GrayWeights) {
  EXPECT_DOUBLE_EQ(rgb_to_gray(testing::constant_image(1, 1, 255, 255, 255)).data[0], 255.0);
  EXPECT_NEAR(rgb_to_gray(testing::constant_image(1, 1, 255, 0, 0)).data[0], 76.245, 1e-9);
  EXPECT_DOUBLE_EQ(rgb_to_gray(testing::constant_image(1, 1, 0, 0, 0)).data[0], 0.0);
  for (int v = 0; v < 256; ++v) {
    const uint8_t u = uint8_t(v);
    EXPECT_EQ(rgb_to_gray(testing::constant_image(1, 1, u, u, u)).data[0], double(v));
  }
}

TEST(Color, ForwardKnownValues) {
  const auto gray = ycbcr_forward(testing::constant_image(1, 1, 128, 128, 128));
  EXPECT_NEAR(gray.y.data[0], 128.0, 1e-12);
  EXPECT_NEAR(gray.cb.data[0], 128.0, 1e-12);
  EXPECT_NEAR(gray.cr.data[0], 128.0, 1e-12);
  const ImageRGB red = testing::constant_image(1, 1, 255, 0, 0);
  EXPECT_NEAR(ycbcr_forward(red).y.data[0], 76.245, 1e-9);
  EXPECT_NEAR(ycbcr_forward(red).y.data[0], rgb_to_gray(red).data[0], 1e-12);
}

// Every 24-bit colour survives forward + inverse within one level.
TEST(Color, ExhaustiveRoundTrip) {
  ImageRGB img(4096, 256);
  for (uint32_t block = 0; block < 16; ++block) {
    for (uint32_t i = 0; i < img.pixel_count(); ++i) {
      const uint32_t c = block * uint32_t(img.pixel_count()) + i;
      img.data[3 * i] = uint8_t(c >> 16);
      img.data[3 * i + 1] = uint8_t(c >> 8);
      img.data[3 * i + 2] = uint8_t(c);
    }
    const ImageRGB back = ycbcr_inverse(ycbcr_forward(img));
    int worst = 0;
    for (size_t i = 0; i < img.data.size(); ++i) {
      worst = std::max(worst, std::abs(int(img.data[i]) - int(back.data[i])));
    }
    ASSERT_LE(worst, 1) << "block " << block;
  }
}

TEST(Color, InverseClampsOutOfGamut) {
  YCbCrPlanes p{GrayPlane(1, 1, 300.0), GrayPlane(1, 1, 128.0), GrayPlane(1, 1, 128.0)};
  EXPECT_EQ(ycbcr_inverse(p).data, (std::vector<uint8_t>{255, 255, 255}));
  p.y.data[0] = -20.0;
  EXPECT_EQ(ycbcr_inverse(p).data, (std::vector<uint8_t>{0, 0, 0}));
}

TEST(Patches, CountsAndRoundTrip) {
  std::mt19937_64 rng(3);
  const GrayPlane plane = testing::random_plane(rng, 256, 256);
  const PatchGrid grid(256, 256, 16);
  const auto patches = patchify(plane, grid);
  EXPECT_EQ(patches.size(), 256u);
  EXPECT_EQ(unpatchify(patches, grid), plane);
  // Patch 17 is row 1, col 1; its first element is pixel (16, 16).
  EXPECT_EQ(patches[17][0], plane.at(16, 16));
  EXPECT_EQ(patches[17][16 * 2 + 3], plane.at(19, 18));

  const GrayPlane small = testing::random_plane(rng, 16, 16);
  const auto one = patchify(small, PatchGrid(16, 16, 16));
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], small.data);
}

TEST(Patches, QuadrantConstantPlane) {
  const PatchGrid grid(4, 4, 2);
  std::vector<Patch> patches;
  for (int v = 1; v <= 4; ++v) patches.push_back(Patch(4, double(v)));
  const GrayPlane plane = unpatchify(patches, grid);
  EXPECT_EQ(plane.at(0, 0), 1.0);
  EXPECT_EQ(plane.at(3, 0), 2.0);
  EXPECT_EQ(plane.at(0, 3), 3.0);
  EXPECT_EQ(plane.at(3, 3), 4.0);
  EXPECT_EQ(plane.at(1, 1), 1.0);
  EXPECT_EQ(plane.at(2, 1), 2.0);
}

TEST(Patches, Validation) {
  const PatchGrid grid(4, 4, 2);
  EXPECT_THROW(unpatchify(std::vector<Patch>(3, Patch(4, 0.0)), grid), Error);
  EXPECT_THROW(unpatchify(std::vector<Patch>(4, Patch(3, 0.0)), grid), Error);
  EXPECT_THROW(patchify(GrayPlane(6, 4), grid), Error);
}

TEST(Errors, KindNamesAppearInWhat) {
  const Error e(ErrorKind::kCorruption, "bad stream");
  EXPECT_NE(std::string(e.what()).find("corruption"), std::string::npos);
  EXPECT_EQ(e.message(), "bad stream");
  EXPECT_EQ(e.kind(), ErrorKind::kCorruption);
}

}  // namespace
}  // namespace mcm
