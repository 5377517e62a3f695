// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace docrec::kernels::checks {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Runs the kernel invariant and gradient suite: softmax and attention
/// normalization, exact causal/window independence, coverage clamping,
/// positional-encoding bounds and distinctness, stochastic-kernel
/// statistics, the curriculum schedule and finite-difference gradient
/// agreement. Deterministic for a fixed seed.
std::vector<CheckResult> run_all(std::uint64_t seed = 7);

}  // namespace docrec::kernels::checks
