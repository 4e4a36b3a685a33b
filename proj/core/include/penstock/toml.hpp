#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace penstock {

/// Minimal TOML subset used for configuration files: [section] headers,
/// bare keys, strings, integers, floats, booleans and flat arrays. Keys are
/// flattened to "section.key".
class TomlTable {
public:
    using Value = std::variant<bool, std::int64_t, double, std::string, std::vector<double>,
                               std::vector<std::string>>;

    static TomlTable parse(const std::string& text, const std::string& origin = "<string>");
    static TomlTable parse_file(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key) const;
    std::string get_string_or(const std::string& key, const std::string& fallback) const;
    std::vector<double> get_double_array_or(const std::string& key,
                                            std::vector<double> fallback = {}) const;

    const std::map<std::string, Value>& entries() const { return values_; }

private:
    const Value& require(const std::string& key) const;
    std::map<std::string, Value> values_;
    std::string origin_;
};

}  // namespace penstock
