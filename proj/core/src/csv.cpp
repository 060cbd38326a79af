#include "mfspeak/csv.hpp"

#include <charconv>
#include <cstdint>
#include <istream>
#include <system_error>

#include "mfspeak/errors.hpp"

namespace mfspeak {

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw Error("double formatting failed");
    return std::string(buf, end);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw IoError("not a number: '" + s + "'");
    }
    return v;
}

long parse_long(const std::string& s) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw IoError("not an integer: '" + s + "'");
    }
    return v;
}

std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw IoError("not an unsigned integer: '" + s + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string schema_header(const std::string& kind, int version) {
    return "# mfspeak-" + kind + " v" + std::to_string(version);
}

void expect_schema(std::istream& in, const std::string& kind, int version) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty file; expected schema header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != schema_header(kind, version)) {
        throw IoError("schema mismatch: expected '" + schema_header(kind, version) +
                      "', got '" + line + "'");
    }
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

}  // namespace mfspeak
