// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "docrec/image.hpp"

#include <array>
#include <fstream>
#include <vector>

#include "docrec/errors.hpp"

namespace docrec {
namespace {

std::uint32_t crc32(const std::uint8_t* data, std::size_t len,
                    std::uint32_t crc = 0) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k)
        c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  crc ^= 0xffffffffu;
  for (std::size_t i = 0; i < len; ++i)
    crc = table[(crc ^ data[i]) & 0xff] ^ (crc >> 8);
  return crc ^ 0xffffffffu;
}

std::uint32_t adler32(const std::uint8_t* data, std::size_t len) {
  std::uint32_t a = 1, b = 0;
  for (std::size_t i = 0; i < len; ++i) {
    a = (a + data[i]) % 65521u;
    b = (b + a) % 65521u;
  }
  return (b << 16) | a;
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::ofstream& out, const char type[4],
               const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> buf;
  put_be32(buf, static_cast<std::uint32_t>(payload.size()));
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(type[i]));
  buf.insert(buf.end(), payload.begin(), payload.end());
  std::uint32_t crc = crc32(buf.data() + 4, buf.size() - 4);
  put_be32(buf, crc);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
}

}  // namespace

void write_pgm(const std::string& path, const ImageU8& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write image: " + path);
  out << "P5\n" << img.cols() << " " << img.rows() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data()),
            static_cast<std::streamsize>(img.size()));
}

ImageU8 read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read image: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw Error("not a binary PGM: " + path);
  long w = 0, h = 0, maxv = 0;
  in >> w >> h >> maxv;
  in.get();  // single whitespace after the header
  if (w <= 0 || h <= 0 || maxv != 255) throw Error("unsupported PGM: " + path);
  ImageU8 img(h, w);
  in.read(reinterpret_cast<char*>(img.data()),
          static_cast<std::streamsize>(img.size()));
  if (!in) throw Error("truncated PGM: " + path);
  return img;
}

void write_png(const std::string& path, const ImageU8& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write image: " + path);
  static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  out.write(reinterpret_cast<const char*>(sig), 8);

  std::vector<std::uint8_t> ihdr;
  put_be32(ihdr, static_cast<std::uint32_t>(img.cols()));
  put_be32(ihdr, static_cast<std::uint32_t>(img.rows()));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(0);  // grayscale
  ihdr.push_back(0);  // deflate
  ihdr.push_back(0);  // adaptive filtering
  ihdr.push_back(0);  // no interlace
  put_chunk(out, "IHDR", ihdr);

  // Raw scanlines: filter byte 0 then the row.
  std::vector<std::uint8_t> raw;
  raw.reserve(static_cast<std::size_t>(img.rows() * (img.cols() + 1)));
  for (Eigen::Index r = 0; r < img.rows(); ++r) {
    raw.push_back(0);
    for (Eigen::Index c = 0; c < img.cols(); ++c) raw.push_back(img(r, c));
  }

  // zlib stream with stored deflate blocks.
  std::vector<std::uint8_t> z;
  z.push_back(0x78);
  z.push_back(0x01);
  std::size_t off = 0;
  do {
    std::size_t len = std::min<std::size_t>(raw.size() - off, 65535);
    bool final = off + len == raw.size();
    z.push_back(final ? 1 : 0);
    z.push_back(static_cast<std::uint8_t>(len & 0xff));
    z.push_back(static_cast<std::uint8_t>(len >> 8));
    z.push_back(static_cast<std::uint8_t>(~len & 0xff));
    z.push_back(static_cast<std::uint8_t>((~len >> 8) & 0xff));
    z.insert(z.end(), raw.begin() + static_cast<std::ptrdiff_t>(off),
             raw.begin() + static_cast<std::ptrdiff_t>(off + len));
    off += len;
  } while (off < raw.size());
  put_be32(z, adler32(raw.data(), raw.size()));
  put_chunk(out, "IDAT", z);
  put_chunk(out, "IEND", {});
}

}  // namespace docrec
