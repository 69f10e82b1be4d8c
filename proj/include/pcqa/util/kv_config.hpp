#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pcqa {

/// Flat view over a TOML-style key/value file.
///
/// Supports `key = value` lines, `[section]` headers (keys become
/// `section.key`), dotted keys, `#` comments, and double-quoted or bare
/// values. Nothing fancier: no arrays, tables of tables or multi-line
/// strings.
class KvConfig {
public:
    static KvConfig parse(const std::string& text, const std::string& origin = "<config>");
    static KvConfig load(const std::filesystem::path& path);

    bool contains(const std::string& key) const { return values_.count(key) != 0; }
    std::optional<std::string> get(const std::string& key) const;
    /// Throws ConfigurationError naming the key when absent.
    const std::string& require(const std::string& key) const;
    const std::map<std::string, std::string>& values() const noexcept { return values_; }
    const std::string& origin() const noexcept { return origin_; }

private:
    std::map<std::string, std::string> values_;
    std::string origin_;
};

/// Splits "a, b ,c" into trimmed non-empty items.
std::vector<std::string> split_list(const std::string& text, char sep = ',');

std::string trim(const std::string& s);

}  // namespace pcqa
