#ifndef EDR_CSV_HPP
#define EDR_CSV_HPP

#include <string>
#include <vector>

namespace edr::csv {

/// Parses RFC 4180 comma-separated content: quoted fields may contain commas,
/// doubled quotes and line breaks; both LF and CRLF record separators are
/// accepted. Returns one vector of fields per record. Throws ParseError on a
/// dangling quote.
std::vector<std::vector<std::string>> parse(const std::string& content);

/// Quotes a field only when needed (comma, quote or line break present).
std::string escape_field(const std::string& field);

}  // namespace edr::csv

#endif  // EDR_CSV_HPP
