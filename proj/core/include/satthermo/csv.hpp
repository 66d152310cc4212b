#pragma once

// Minimal CSV plumbing shared by the parsers and writers: comma-separated,
// unquoted fields, '#' comment lines, '.' decimal point.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace satthermo::csv {

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);

/// Strict decimal parse of the whole field (surrounding blanks allowed); nan and inf are rejected.
std::optional<double> parse_double(std::string_view field);
std::optional<long long> parse_int(std::string_view field);

std::vector<std::string_view> split(std::string_view line);

/// Line reader that skips blank and '#' lines, strips CR and a UTF-8 BOM, and
/// resolves header columns by name.
class Reader {
public:
    Reader(std::istream& in, std::string source);

    /// Reads the header line and checks that every required column is present.
    /// Throws SchemaError naming the first absent column.
    void read_header(std::span<const std::string_view> required);

    /// Next data row; false at end of input.
    bool next();

    std::size_t line_number() const noexcept { return line_no_; }
    const std::vector<std::string_view>& fields() const noexcept { return fields_; }
    std::size_t column_count() const noexcept { return header_.size(); }
    const std::vector<std::string>& header() const noexcept { return header_; }
    /// Field of the current row by column name; caller must have checked field count.
    std::string_view field(std::string_view column) const;
    const std::string& source() const noexcept { return source_; }

private:
    bool next_line();

    std::istream& in_;
    std::string source_;
    std::string line_;
    std::size_t line_no_ = 0;
    std::vector<std::string> header_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::vector<std::string_view> fields_;
};

/// Reads a whole file; throws IoError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

}  // namespace satthermo::csv
