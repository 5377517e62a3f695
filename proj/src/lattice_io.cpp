// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "docrec/lattice_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace docrec::ctc {
namespace {

static_assert(std::endian::native == std::endian::little,
              "lattice io assumes a little-endian host");

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

void write_header(std::ostream& out, const std::vector<std::uint32_t>& dims) {
  out.write("LATT", 4);
  std::uint8_t version = 1;
  std::uint8_t rank = static_cast<std::uint8_t>(dims.size());
  out.write(reinterpret_cast<const char*>(&version), 1);
  out.write(reinterpret_cast<const char*>(&rank), 1);
  for (std::uint32_t d : dims) put_u32(out, d);
}

void write_floats(std::ostream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      float f = static_cast<float>(m(r, c));
      out.write(reinterpret_cast<const char*>(&f), 4);
    }
}

Matrix read_floats(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      float f = 0.0f;
      in.read(reinterpret_cast<char*>(&f), 4);
      m(r, c) = static_cast<double>(f);
    }
  if (!in) throw ValidationError("lattice payload truncated");
  return m;
}

AnyLattice from_dims_data(const std::vector<Eigen::Index>& dims,
                          const std::vector<double>& data) {
  Eigen::Index total = 1;
  for (Eigen::Index d : dims) total *= d;
  if (static_cast<Eigen::Index>(data.size()) != total)
    throw ValidationError("lattice data length does not match dims");
  if (dims.size() == 2) {
    Matrix m(dims[0], dims[1]);
    std::memcpy(m.data(), data.data(), sizeof(double) * data.size());
    return ProbLattice1D{std::move(m)};
  }
  if (dims.size() == 3) {
    Matrix m(dims[0] * dims[1], dims[2]);
    std::memcpy(m.data(), data.data(), sizeof(double) * data.size());
    return ProbLattice2D{dims[0], dims[1], std::move(m)};
  }
  throw ValidationError("lattice rank must be 2 or 3");
}

}  // namespace

AnyLattice read_lattice(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "LATT", 4) != 0)
    throw ValidationError("not a LATT stream");
  std::uint8_t version = 0, rank = 0;
  in.read(reinterpret_cast<char*>(&version), 1);
  in.read(reinterpret_cast<char*>(&rank), 1);
  if (version != 1) throw ValidationError("unsupported LATT version");
  if (rank != 2 && rank != 3) throw ValidationError("LATT rank must be 2 or 3");
  std::vector<Eigen::Index> dims;
  for (int i = 0; i < rank; ++i)
    dims.push_back(static_cast<Eigen::Index>(get_u32(in)));
  if (!in) throw ValidationError("LATT header truncated");
  if (rank == 2) {
    Matrix m = read_floats(in, dims[0], dims[1]);
    return ProbLattice1D{std::move(m)};
  }
  Matrix m = read_floats(in, dims[0] * dims[1], dims[2]);
  return ProbLattice2D{dims[0], dims[1], std::move(m)};
}

AnyLattice read_lattice_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open lattice file: " + path);
  // JSON files are allowed under the same entry point.
  int first = in.peek();
  if (first == '{') {
    std::ostringstream all;
    all << in.rdbuf();
    return lattice_from_json(all.str());
  }
  return read_lattice(in);
}

void write_lattice(std::ostream& out, const ProbLattice1D& lattice) {
  write_header(out, {static_cast<std::uint32_t>(lattice.probs.rows()),
                     static_cast<std::uint32_t>(lattice.probs.cols())});
  write_floats(out, lattice.probs);
}

void write_lattice(std::ostream& out, const ProbLattice2D& lattice) {
  write_header(out, {static_cast<std::uint32_t>(lattice.height),
                     static_cast<std::uint32_t>(lattice.width),
                     static_cast<std::uint32_t>(lattice.probs.cols())});
  write_floats(out, lattice.probs);
}

void write_lattice_file(const std::string& path, const ProbLattice1D& lattice) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write lattice file: " + path);
  write_lattice(out, lattice);
}

void write_lattice_file(const std::string& path, const ProbLattice2D& lattice) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write lattice file: " + path);
  write_lattice(out, lattice);
}

AnyLattice lattice_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.contains("dims") || !j.contains("data"))
    throw ValidationError("lattice json needs dims and data");
  std::vector<Eigen::Index> dims;
  for (const auto& d : j["dims"]) dims.push_back(d.get<Eigen::Index>());
  std::vector<double> data;
  for (const auto& v : j["data"]) data.push_back(v.get<double>());
  return from_dims_data(dims, data);
}

std::string lattice_to_json(const AnyLattice& lattice) {
  nlohmann::json j;
  const Matrix* m = nullptr;
  if (std::holds_alternative<ProbLattice1D>(lattice)) {
    const auto& l = std::get<ProbLattice1D>(lattice);
    j["dims"] = {l.probs.rows(), l.probs.cols()};
    m = &l.probs;
  } else {
    const auto& l = std::get<ProbLattice2D>(lattice);
    j["dims"] = {l.height, l.width, l.probs.cols()};
    m = &l.probs;
  }
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m->size()));
  for (Eigen::Index r = 0; r < m->rows(); ++r)
    for (Eigen::Index c = 0; c < m->cols(); ++c) data.push_back((*m)(r, c));
  j["data"] = data;
  return j.dump();
}

}  // namespace docrec::ctc
