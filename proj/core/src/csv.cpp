#include "satthermo/csv.hpp"

#include "satthermo/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace satthermo::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::optional<double> parse_double(std::string_view field) {
    field = trim(field);
    if (field.empty()) return std::nullopt;
    if (field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<long long> parse_int(std::string_view field) {
    field = trim(field);
    if (field.empty()) return std::nullopt;
    long long v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
    return v;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(pos)));
            break;
        }
        out.push_back(trim(line.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

Reader::Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

bool Reader::next_line() {
    while (std::getline(in_, line_)) {
        ++line_no_;
        if (!line_.empty() && line_.back() == '\r') line_.pop_back();
        if (line_no_ == 1 && line_.starts_with("\xEF\xBB\xBF")) line_.erase(0, 3);
        const auto t = trim(line_);
        if (t.empty() || t.front() == '#') continue;
        return true;
    }
    if (in_.bad()) throw IoError(fmt::format("{}: read failure", source_));
    return false;
}

void Reader::read_header(std::span<const std::string_view> required) {
    if (next_line()) {
        for (auto name : split(line_)) {
            index_.emplace(std::string(name), header_.size());
            header_.emplace_back(name);
        }
    }
    for (auto col : required) {
        if (!index_.contains(col)) throw SchemaError(source_, std::string(col));
    }
}

bool Reader::next() {
    if (!next_line()) return false;
    fields_ = split(line_);
    return true;
}

std::string_view Reader::field(std::string_view column) const {
    return fields_.at(index_.find(column)->second);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError(fmt::format("read failure on '{}'", path.string()));
    return ss.str();
}

}  // namespace satthermo::csv
