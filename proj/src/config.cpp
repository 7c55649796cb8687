#include "ldpd/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ldpd/data.hpp"

namespace ldpd {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '.' || c == '-'; });
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    if (!text.empty() && text.back() == ',') out.emplace_back();
    return out;
}

double to_double(const std::string& key, const std::string& text) {
    std::string t = text;
    if (t == "inf" || t == "+inf") return kInf;
    double v = 0.0;
    const char* first = t.data();
    if (!t.empty() && t.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError(key + ": expected a number, got '" + text + "'");
    return v;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_double(v[i]);
    }
    return out;
}

}  // namespace

Config Config::parse(std::istream& in, const std::string& source) {
    Config cfg;
    std::string section = "general";
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto where = source + ":" + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_name(section)) throw ConfigError(where + "invalid section name '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        if (!valid_name(key) || key.find('.') != std::string::npos)
            throw ConfigError(where + "invalid key '" + key + "'");
        const auto full = section + "." + key;
        if (cfg.values_.count(full)) throw ConfigError(where + "duplicate key '" + full + "'");
        cfg.values_[full] = trim(line.substr(eq + 1));
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    return parse(in, path.string());
}

void Config::set(const std::string& key, const std::string& value) {
    const auto dot = key.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == key.size() || !valid_name(key))
        throw ConfigError("invalid key '" + key + "' (expected section.key)");
    values_[key] = trim(value);
}

void Config::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
    set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::optional<std::string> Config::raw(const std::string& key) {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    used_[key] = it->second;
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) {
    if (auto v = raw(key)) return *v;
    used_[key] = fallback;
    return fallback;
}

std::string Config::require_string(const std::string& key) {
    auto v = raw(key);
    if (!v || v->empty()) throw ConfigError("missing required key '" + key + "'");
    return *v;
}

double Config::get_double(const std::string& key, double fallback) {
    if (auto v = raw(key)) return to_double(key, *v);
    used_[key] = format_double(fallback);
    return fallback;
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) {
    auto v = raw(key);
    if (!v) {
        used_[key] = std::to_string(fallback);
        return fallback;
    }
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (v->empty() || ec != std::errc() || ptr != v->data() + v->size())
        throw ConfigError(key + ": expected a nonnegative integer, got '" + *v + "'");
    return out;
}

std::uint64_t Config::require_uint(const std::string& key) {
    if (!has(key)) throw ConfigError("missing required key '" + key + "'");
    return get_uint(key, 0);
}

bool Config::get_bool(const std::string& key, bool fallback) {
    auto v = raw(key);
    if (!v) {
        used_[key] = fallback ? "true" : "false";
        return fallback;
    }
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError(key + ": expected a boolean, got '" + *v + "'");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) {
    auto v = raw(key);
    if (!v) {
        used_[key] = join_doubles(fallback);
        return fallback;
    }
    std::vector<double> out;
    for (const auto& item : split_list(*v)) out.push_back(to_double(key, item));
    return out;
}

std::vector<std::string> Config::get_strings(const std::string& key, const std::vector<std::string>& fallback) {
    auto v = raw(key);
    if (!v) {
        std::string joined;
        for (std::size_t i = 0; i < fallback.size(); ++i) joined += (i ? ", " : "") + fallback[i];
        used_[key] = joined;
        return fallback;
    }
    if (v->empty()) return {};
    return split_list(*v);
}

std::vector<std::string> Config::sections_with_prefix(const std::string& prefix) const {
    std::set<std::string> out;
    for (const auto& [key, value] : values_) {
        const auto section = key.substr(0, key.rfind('.'));
        if (section.rfind(prefix, 0) == 0) out.insert(section);
    }
    return {out.begin(), out.end()};
}

std::vector<std::string> Config::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : values_)
        if (!used_.count(key)) out.push_back(key);
    return out;
}

std::string Config::resolved() const {
    std::ostringstream out;
    std::string current;
    bool first = true;
    for (const auto& [key, value] : used_) {
        const auto dot = key.rfind('.');
        const auto section = key.substr(0, dot);
        if (first || section != current) {
            if (!first) out << '\n';
            out << '[' << section << "]\n";
            current = section;
            first = false;
        }
        out << key.substr(dot + 1) << " = " << value << '\n';
    }
    return out.str();
}

}  // namespace ldpd
