#include "tglm/csv.hpp"

#include "tglm/error.hpp"

#include <iterator>

namespace tglm {

std::vector<CsvRecord> read_csv_records(std::istream& in) {
  const std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::vector<CsvRecord> records;

  std::size_t pos = 0;
  std::size_t line = 1;
  // UTF-8 byte order mark
  if (data.size() >= 3 && data.compare(0, 3, "\xEF\xBB\xBF") == 0) pos = 3;

  while (pos < data.size()) {
    CsvRecord record;
    record.line = line;
    std::string field;
    bool quoted_field = false;
    bool end_of_record = false;

    while (!end_of_record) {
      if (pos >= data.size()) {
        end_of_record = true;
        break;
      }
      char c = data[pos];
      if (c == '"' && field.empty() && !quoted_field) {
        quoted_field = true;
        ++pos;
        for (;;) {
          if (pos >= data.size())
            throw Error(ErrorKind::parse,
                        "unterminated quoted field starting on line " + std::to_string(record.line));
          char q = data[pos++];
          if (q == '"') {
            if (pos < data.size() && data[pos] == '"') {
              field.push_back('"');
              ++pos;
            } else {
              break;
            }
          } else {
            if (q == '\n') ++line;
            field.push_back(q);
          }
        }
        continue;
      }
      if (c == ',') {
        record.fields.push_back(std::move(field));
        field.clear();
        quoted_field = false;
        ++pos;
      } else if (c == '\n' || c == '\r') {
        if (c == '\r' && pos + 1 < data.size() && data[pos + 1] == '\n') ++pos;
        ++pos;
        ++line;
        end_of_record = true;
      } else {
        if (quoted_field)
          throw Error(ErrorKind::parse, "unexpected character after closing quote on line " +
                                            std::to_string(line));
        field.push_back(c);
        ++pos;
      }
    }
    record.fields.push_back(std::move(field));
    if (record.fields.size() == 1 && record.fields[0].empty() && !quoted_field) continue;
    records.push_back(std::move(record));
  }
  return records;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace tglm
