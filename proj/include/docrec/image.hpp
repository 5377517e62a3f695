// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

namespace docrec {

/// 8-bit grayscale raster, 255 = background, 0 = ink.
using ImageU8 =
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Binary PGM (P5), bit-exact across platforms.
void write_pgm(const std::string& path, const ImageU8& img);
ImageU8 read_pgm(const std::string& path);

/// Grayscale 8-bit PNG with stored (uncompressed) deflate blocks.
void write_png(const std::string& path, const ImageU8& img);

}  // namespace docrec
