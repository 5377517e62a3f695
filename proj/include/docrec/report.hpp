// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <variant>

namespace docrec {

using ReportValue = std::variant<double, long, std::string>;

/// Canonical JSON for metric tables: keys sorted, doubles fixed to six
/// decimal places, byte-stable across runs.
std::string report_format(const std::map<std::string, ReportValue>& results);

}  // namespace docrec
