/* Copyright 2026 The ergoeval Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ergoeval/error.hpp"

namespace ergoeval {

using CsvRow = std::vector<std::string>;

/// RFC 4180 reader: comma separated, double-quoted fields may contain commas,
/// line breaks and doubled quotes. Accepts LF or CRLF row endings and skips
/// blank lines.
inline std::vector<CsvRow> parse_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool row_has_content = false;
  std::size_t line = 1;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_row = [&] {
    if (row_has_content || !row.empty()) {
      end_field();
      rows.push_back(std::move(row));
    }
    row.clear();
    field.clear();
    row_has_content = false;
    field_was_quoted = false;
  };

  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted) {
          throw Error(ErrorCode::kMalformedDocument,
                      "stray quote in CSV line " + std::to_string(line));
        }
        in_quotes = true;
        field_was_quoted = true;
        row_has_content = true;
        break;
      case ',':
        end_field();
        row_has_content = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_row();
        ++line;
        break;
      default:
        if (field_was_quoted) {
          throw Error(ErrorCode::kMalformedDocument,
                      "text after closing quote in CSV line " + std::to_string(line));
        }
        field += c;
        row_has_content = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::kMalformedDocument, "unterminated quoted CSV field");
  end_row();
  return rows;
}

}  // namespace ergoeval
