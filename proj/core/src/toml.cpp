#include "penstock/toml.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "penstock/errors.hpp"

namespace penstock {

namespace {

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& what) {
    throw IngestionError(origin + ":" + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

/// Strips a trailing comment that is not inside a string literal.
std::string strip_comment(const std::string& s) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
        if (s[i] == '#' && !in_string) return s.substr(0, i);
    }
    return s;
}

bool parse_number(const std::string& text, double& out_d, std::int64_t& out_i, bool& is_int) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    is_int = t.find_first_of(".eEinfa") == std::string::npos;
    // "inf"/"nan" rejected: config values must be finite.
    char* end = nullptr;
    if (is_int) {
        out_i = std::strtoll(t.c_str(), &end, 10);
        return end == t.c_str() + t.size();
    }
    out_d = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && std::isfinite(out_d);
}

std::string parse_string_literal(const std::string& t, const std::string& origin,
                                 std::size_t line) {
    if (t.size() < 2 || t.front() != '"' || t.back() != '"') {
        fail(origin, line, "expected a quoted string: " + t);
    }
    std::string out;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
        if (t[i] == '\\' && i + 2 < t.size()) {
            ++i;
            switch (t[i]) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                default: fail(origin, line, "unsupported escape in string");
            }
        } else {
            out.push_back(t[i]);
        }
    }
    return out;
}

std::vector<std::string> split_top_level(const std::string& body) {
    std::vector<std::string> items;
    std::string current;
    bool in_string = false;
    for (char c : body) {
        if (c == '"') in_string = !in_string;
        if (c == ',' && !in_string) {
            items.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!trim(current).empty()) items.push_back(current);
    return items;
}

}  // namespace

TomlTable TomlTable::parse(const std::string& text, const std::string& origin) {
    TomlTable table;
    table.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;

    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(strip_comment(line));
        if (stripped.empty()) continue;

        if (stripped.front() == '[') {
            if (stripped.back() != ']') fail(origin, lineno, "unterminated section header");
            section = trim(stripped.substr(1, stripped.size() - 2));
            if (section.empty()) fail(origin, lineno, "empty section name");
            continue;
        }

        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) fail(origin, lineno, "expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) fail(origin, lineno, "empty key");
        if (value.empty()) fail(origin, lineno, "empty value for key " + key);
        const std::string full_key = section.empty() ? key : section + "." + key;
        if (table.values_.count(full_key)) fail(origin, lineno, "duplicate key " + full_key);

        if (value.front() == '"') {
            table.values_[full_key] = parse_string_literal(value, origin, lineno);
        } else if (value == "true" || value == "false") {
            table.values_[full_key] = (value == "true");
        } else if (value.front() == '[') {
            if (value.back() != ']') fail(origin, lineno, "unterminated array");
            const auto items = split_top_level(value.substr(1, value.size() - 2));
            if (!items.empty() && trim(items.front()).front() == '"') {
                std::vector<std::string> arr;
                for (const auto& item : items) {
                    arr.push_back(parse_string_literal(trim(item), origin, lineno));
                }
                table.values_[full_key] = std::move(arr);
            } else {
                std::vector<double> arr;
                for (const auto& item : items) {
                    double d = 0.0;
                    std::int64_t i = 0;
                    bool is_int = false;
                    if (!parse_number(item, d, i, is_int)) {
                        fail(origin, lineno, "bad numeric array element: " + trim(item));
                    }
                    arr.push_back(is_int ? static_cast<double>(i) : d);
                }
                table.values_[full_key] = std::move(arr);
            }
        } else {
            double d = 0.0;
            std::int64_t i = 0;
            bool is_int = false;
            if (!parse_number(value, d, i, is_int)) {
                fail(origin, lineno, "cannot parse value for key " + key + ": " + value);
            }
            if (is_int) {
                table.values_[full_key] = i;
            } else {
                table.values_[full_key] = d;
            }
        }
    }
    return table;
}

TomlTable TomlTable::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

const TomlTable::Value& TomlTable::require(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw IngestionError(origin_ + ": missing required key " + key);
    return it->second;
}

double TomlTable::get_double(const std::string& key) const {
    const Value& v = require(key);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    throw IngestionError(origin_ + ": key " + key + " is not a number");
}

double TomlTable::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::int64_t TomlTable::get_int(const std::string& key) const {
    const Value& v = require(key);
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    throw IngestionError(origin_ + ": key " + key + " is not an integer");
}

std::int64_t TomlTable::get_int_or(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
}

bool TomlTable::get_bool_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const Value& v = require(key);
    if (const auto* b = std::get_if<bool>(&v)) return *b;
    throw IngestionError(origin_ + ": key " + key + " is not a boolean");
}

std::string TomlTable::get_string(const std::string& key) const {
    const Value& v = require(key);
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    throw IngestionError(origin_ + ": key " + key + " is not a string");
}

std::string TomlTable::get_string_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

std::vector<double> TomlTable::get_double_array_or(const std::string& key,
                                                   std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    const Value& v = require(key);
    if (const auto* a = std::get_if<std::vector<double>>(&v)) return *a;
    throw IngestionError(origin_ + ": key " + key + " is not a numeric array");
}

}  // namespace penstock
