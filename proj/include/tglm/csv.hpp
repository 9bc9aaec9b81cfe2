#pragma once

#include <istream>
#include <string>
#include <vector>

namespace tglm {

/// RFC 4180 records. Quoted fields may contain separators, doubled quotes
/// and line breaks. A trailing CR before LF is dropped. Blank lines are
/// skipped.
struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line the record starts on
};

std::vector<CsvRecord> read_csv_records(std::istream& in);

/// Quotes a field only when it needs it.
std::string csv_escape(const std::string& field);

}  // namespace tglm
