// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace docrec::cli {

/// Entry point behind the binary. Subcommands: eval-text, eval-seg,
/// eval-layout, decode, gen, kernel-check. Metric tables go to `out`
/// as canonical JSON, diagnostics to `err`. Returns 0 on success, 1 on
/// metric or validation failure, 2 on usage errors or malformed input.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace docrec::cli
