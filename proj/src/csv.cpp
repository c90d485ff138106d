#include "edr/csv.hpp"

#include "edr/errors.hpp"

namespace edr::csv {

std::vector<std::vector<std::string>> parse(const std::string& content) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;  // true once the current record has content

    std::size_t i = 0;
    const std::size_t n = content.size();
    while (i < n) {
        const char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && content[i + 1] == '"') {
                    field += '"';
                    i += 2;
                } else {
                    in_quotes = false;
                    ++i;
                }
            } else {
                field += c;
                ++i;
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                field_started = true;
                ++i;
                break;
            case ',':
                record.push_back(std::move(field));
                field.clear();
                field_started = true;
                ++i;
                break;
            case '\r':
                if (i + 1 < n && content[i + 1] == '\n') ++i;
                [[fallthrough]];
            case '\n':
                record.push_back(std::move(field));
                field.clear();
                records.push_back(std::move(record));
                record.clear();
                field_started = false;
                ++i;
                break;
            default:
                field += c;
                field_started = true;
                ++i;
                break;
        }
    }
    if (in_quotes) throw ParseError("unterminated quoted field at end of input");
    if (field_started || !field.empty() || !record.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    return records;
}

std::string escape_field(const std::string& field) {
    bool needs_quotes = false;
    for (char c : field)
        if (c == ',' || c == '"' || c == '\n' || c == '\r') {
            needs_quotes = true;
            break;
        }
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace edr::csv
