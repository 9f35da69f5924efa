#ifndef HAARPSI_CSV_H_
#define HAARPSI_CSV_H_

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace haarpsi::csv {

using Record = std::vector<std::string>;

// Reads one record. Fields may be double-quoted (with "" escaping a quote
// and embedded newlines allowed); CRLF line endings are accepted. Returns
// nullopt at end of input. Throws std::runtime_error on an unterminated
// quoted field.
std::optional<Record> read_record(std::istream& in);

// Quotes the field when it contains a comma, quote or line break.
std::string escape(std::string_view field);

void write_record(std::ostream& out, const Record& record);

// "%.<decimals>f", with "inf" / "-inf" for infinities and "nan" for NaN.
std::string format_fixed(double value, int decimals);

// Shortest decimal text that parses back to exactly `value`.
std::string format_exact(double value);

// Parses a full field as a double ("inf", "-inf" accepted). Leading and
// trailing blanks are ignored.
std::optional<double> parse_double(std::string_view field);

}  // namespace haarpsi::csv

#endif  // HAARPSI_CSV_H_
