#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/core/text.hpp"

namespace aqs::csv {

// Splits one CSV record. Supports double-quoted fields with "" escapes.
inline std::vector<std::string> parse_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  for (auto& f : fields) f = std::string(text::trim(f));
  return fields;
}

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

struct Document {
  std::vector<std::string> header;
  // Each record paired with its 1-based line number in the file.
  std::vector<std::pair<std::size_t, std::vector<std::string>>> records;
};

// Parses text with a mandatory header row. Blank lines are skipped.
inline Document parse(std::string_view text, std::string_view source) {
  Document doc;
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool have_header = false;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (text::trim(line).empty()) {
      if (end == text.size()) break;
      continue;
    }
    auto rec = parse_record(line);
    if (!have_header) {
      if (!rec.empty() && rec[0].size() >= 3 && rec[0].compare(0, 3, "\xEF\xBB\xBF") == 0)
        rec[0].erase(0, 3);
      doc.header = std::move(rec);
      have_header = true;
    } else {
      if (rec.size() != doc.header.size()) {
        throw DataError(std::string(source) + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(doc.header.size()) + " fields, got " +
                        std::to_string(rec.size()));
      }
      doc.records.emplace_back(line_no, std::move(rec));
    }
    if (end == text.size()) break;
  }
  if (!have_header) throw DataError(std::string(source) + ": missing CSV header");
  return doc;
}

inline void require_header(const Document& doc, const std::vector<std::string>& expected,
                           std::string_view source) {
  if (doc.header != expected) {
    std::string want;
    for (std::size_t i = 0; i < expected.size(); ++i) want += (i ? "," : "") + expected[i];
    throw DataError(std::string(source) + ": expected header '" + want + "'");
  }
}

}  // namespace aqs::csv
