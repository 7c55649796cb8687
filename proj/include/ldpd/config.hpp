#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ldpd {

/// Malformed configuration text or an unknown/ill-typed key. Reported as a
/// usage error by the command line.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Key-value run configuration.
///
/// Grammar (one statement per line):
///
///   # comment            '#' starts a comment anywhere on a line
///   [section]            selects the section for following keys
///   key = value          value runs to end of line, surrounding blanks trimmed
///
/// Keys are addressed as "section.key"; keys before any section header live
/// in the section "general". Section names may contain dots (for example
/// "profile.groupA"). A key may appear only once per file. Lists are
/// comma-separated. Booleans are true/false/1/0/yes/no.
///
/// Overrides of the form "section.key=value" replace or add entries after the
/// file is read. Every typed lookup records the value used, defaults included,
/// so resolved() reproduces the effective configuration.
class Config {
public:
    static Config parse(std::istream& in, const std::string& source = "<config>");
    static Config load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    /// "section.key=value"
    void apply_override(const std::string& assignment);

    bool has(const std::string& key) const;
    std::optional<std::string> raw(const std::string& key);

    std::string get_string(const std::string& key, const std::string& fallback);
    std::string require_string(const std::string& key);
    double get_double(const std::string& key, double fallback);
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback);
    std::uint64_t require_uint(const std::string& key);
    bool get_bool(const std::string& key, bool fallback);
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback);
    std::vector<std::string> get_strings(const std::string& key, const std::vector<std::string>& fallback);

    /// Section names starting with `prefix`, in sorted order.
    std::vector<std::string> sections_with_prefix(const std::string& prefix) const;

    /// Keys present in the configuration that no lookup has touched.
    std::vector<std::string> unused_keys() const;

    /// Effective configuration in the same grammar, sections sorted.
    std::string resolved() const;

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, std::string> used_;
};

}  // namespace ldpd
