// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "docrec/report.hpp"

#include <cstdio>

namespace docrec {
namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

}  // namespace

std::string report_format(const std::map<std::string, ReportValue>& results) {
  std::string out = "{";
  bool first = true;
  for (const auto& [key, value] : results) {  // std::map iterates sorted
    if (!first) out += ",";
    first = false;
    out += "\"" + escape(key) + "\":";
    if (std::holds_alternative<double>(value)) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6f", std::get<double>(value));
      out += buf;
    } else if (std::holds_alternative<long>(value)) {
      out += std::to_string(std::get<long>(value));
    } else {
      out += "\"" + escape(std::get<std::string>(value)) + "\"";
    }
  }
  out += "}";
  return out;
}

}  // namespace docrec
