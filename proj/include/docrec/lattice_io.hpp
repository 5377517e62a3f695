// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include "docrec/ctc.hpp"

namespace docrec::ctc {

using AnyLattice = std::variant<ProbLattice1D, ProbLattice2D>;

/// LATT container: magic "LATT", version u8=1, rank u8 in {2,3}, dims
/// as u32 little-endian, then IEEE-754 binary32 little-endian values in
/// row-major order. Rank 2 is frames x card(A'); rank 3 is
/// H_f x W_f x card(A').
AnyLattice read_lattice(std::istream& in);
AnyLattice read_lattice_file(const std::string& path);

void write_lattice(std::ostream& out, const ProbLattice1D& lattice);
void write_lattice(std::ostream& out, const ProbLattice2D& lattice);
void write_lattice_file(const std::string& path, const ProbLattice1D& lattice);
void write_lattice_file(const std::string& path, const ProbLattice2D& lattice);

/// JSON alternative: {"dims": [...], "data": [...]} with the same
/// rank/dims conventions.
AnyLattice lattice_from_json(const std::string& json_text);
std::string lattice_to_json(const AnyLattice& lattice);

}  // namespace docrec::ctc
