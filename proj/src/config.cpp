#include "conslab/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace conslab {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw std::runtime_error("config: " + where + ": " + what);
}

std::string key_name(const std::string& section, const std::string& key) {
    return section.empty() ? key : "[" + section + "]." + key;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

bool parse_integer(const std::string& t, long long& out) {
    if (t.empty()) return false;
    std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
    if (i == t.size()) return false;
    for (std::size_t j = i; j < t.size(); ++j)
        if (!std::isdigit(static_cast<unsigned char>(t[j]))) return false;
    out = std::stoll(t);
    return true;
}

bool parse_float(const std::string& t, double& out) {
    const char* b = t.data();
    const char* e = b + t.size();
    auto [ptr, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && ptr == e;
}

ConfigValue parse_scalar(const std::string& t, int lineno) {
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"')
        return ConfigValue{t.substr(1, t.size() - 2)};
    if (t == "true") return ConfigValue{true};
    if (t == "false") return ConfigValue{false};
    long long iv;
    if (parse_integer(t, iv)) return ConfigValue{iv};
    double fv;
    if (parse_float(t, fv)) return ConfigValue{fv};
    fail("line " + std::to_string(lineno), "cannot parse value '" + t + "'");
}

ConfigValue parse_array(const std::string& inner, int lineno) {
    std::vector<std::string> items;
    std::string cur;
    bool in_str = false;
    for (char c : inner) {
        if (c == '"') in_str = !in_str;
        if (c == ',' && !in_str) {
            items.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    const std::string last = trim(cur);
    if (!last.empty()) items.push_back(last);

    bool all_strings = !items.empty();
    for (const auto& it : items)
        if (it.empty() || it.front() != '"') all_strings = false;

    if (all_strings) {
        std::vector<std::string> out;
        for (const auto& it : items) out.push_back(it.substr(1, it.size() - 2));
        return ConfigValue{out};
    }
    std::vector<double> out;
    for (const auto& it : items) {
        double fv;
        long long iv;
        if (parse_integer(it, iv))
            out.push_back(double(iv));
        else if (parse_float(it, fv))
            out.push_back(fv);
        else
            fail("line " + std::to_string(lineno), "array element '" + it + "' is not numeric");
    }
    return ConfigValue{out};
}

}  // namespace

ConfigTable parse_config(const std::string& text) {
    ConfigTable table;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail("line " + std::to_string(lineno), "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) fail("line " + std::to_string(lineno), "empty section name");
            table.sections[section];  // register even if empty
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail("line " + std::to_string(lineno), "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) fail("line " + std::to_string(lineno), "empty key");
        if (val.empty()) fail("line " + std::to_string(lineno), "empty value for '" + key + "'");
        if (table.sections[section].count(key))
            fail("line " + std::to_string(lineno), "duplicate key '" + key_name(section, key) + "'");
        if (val.front() == '[') {
            if (val.back() != ']')
                fail("line " + std::to_string(lineno), "unterminated array for '" + key + "'");
            table.sections[section][key] = parse_array(val.substr(1, val.size() - 2), lineno);
        } else {
            table.sections[section][key] = parse_scalar(val, lineno);
        }
    }
    return table;
}

bool ConfigTable::has(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    return s != sections.end() && s->second.count(key);
}

const ConfigValue& ConfigTable::at(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    if (s == sections.end() || !s->second.count(key))
        fail(key_name(section, key), "missing required key");
    return s->second.at(key);
}

bool ConfigTable::get_bool(const std::string& section, const std::string& key) const {
    const ConfigValue& cv = at(section, key);
    if (auto* p = std::get_if<bool>(&cv.v)) return *p;
    fail(key_name(section, key), "expected a boolean");
}

long long ConfigTable::get_int(const std::string& section, const std::string& key) const {
    const ConfigValue& cv = at(section, key);
    if (auto* p = std::get_if<long long>(&cv.v)) return *p;
    fail(key_name(section, key), "expected an integer");
}

double ConfigTable::get_float(const std::string& section, const std::string& key) const {
    const ConfigValue& cv = at(section, key);
    if (auto* p = std::get_if<double>(&cv.v)) return *p;
    if (auto* p = std::get_if<long long>(&cv.v)) return double(*p);
    fail(key_name(section, key), "expected a number");
}

std::string ConfigTable::get_string(const std::string& section, const std::string& key) const {
    const ConfigValue& cv = at(section, key);
    if (auto* p = std::get_if<std::string>(&cv.v)) return *p;
    fail(key_name(section, key), "expected a string");
}

std::vector<double> ConfigTable::get_float_array(const std::string& section,
                                                 const std::string& key) const {
    const ConfigValue& cv = at(section, key);
    if (auto* p = std::get_if<std::vector<double>>(&cv.v)) return *p;
    fail(key_name(section, key), "expected a numeric array");
}

std::vector<std::string> ConfigTable::get_string_array(const std::string& section,
                                                       const std::string& key) const {
    const ConfigValue& cv = at(section, key);
    if (auto* p = std::get_if<std::vector<std::string>>(&cv.v)) return *p;
    fail(key_name(section, key), "expected a string array");
}

bool ConfigTable::get_bool_or(const std::string& section, const std::string& key,
                              bool dflt) const {
    return has(section, key) ? get_bool(section, key) : dflt;
}

long long ConfigTable::get_int_or(const std::string& section, const std::string& key,
                                  long long dflt) const {
    return has(section, key) ? get_int(section, key) : dflt;
}

double ConfigTable::get_float_or(const std::string& section, const std::string& key,
                                 double dflt) const {
    return has(section, key) ? get_float(section, key) : dflt;
}

std::string ConfigTable::get_string_or(const std::string& section, const std::string& key,
                                       const std::string& dflt) const {
    return has(section, key) ? get_string(section, key) : dflt;
}

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
    ExperimentConfig ec;
    ec.raw = text;
    ec.hash = fnv1a_hash(text);
    ec.table = parse_config(text);
    if (!ec.table.has("experiment", "kind"))
        throw std::runtime_error("config: [experiment].kind: missing required key");
    ec.kind = ec.table.get_string("experiment", "kind");
    return ec;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_experiment_config(ss.str());
}

}  // namespace conslab
