#ifndef MFSPEAK_CSV_HPP
#define MFSPEAK_CSV_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mfspeak {

/// Shortest round-trip decimal form of a double (std::to_chars).
/// All emitted files use this, which is what makes repeated runs
/// byte-identical.
std::string format_double(double v);

/// Strict double parse of an entire token.
double parse_double(const std::string& s);
long parse_long(const std::string& s);
std::uint64_t parse_u64(const std::string& s);

std::vector<std::string> split(const std::string& line, char sep);

/// Every emitted file starts with "# mfspeak-<kind> v<version>".
std::string schema_header(const std::string& kind, int version = 1);

/// Reads the first line of a stream and checks it against the
/// expected schema header; throws IoError on mismatch.
void expect_schema(std::istream& in, const std::string& kind,
                   int version = 1);

/// FNV-1a 64-bit over a string, as 16 hex digits. Used to stamp
/// feature rows with the configuration that produced them.
std::string fnv1a_hex(const std::string& text);

}  // namespace mfspeak

#endif  // MFSPEAK_CSV_HPP
