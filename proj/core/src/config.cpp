#include "gravkit/config.hpp"

#include <fstream>
#include <sstream>

#include "gravkit/errors.hpp"

namespace gravkit {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

ConfigFile ConfigFile::parse_string(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw validation_error("config line " + std::to_string(lineno) +
                                       ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw validation_error("config line " + std::to_string(lineno) +
                                       ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw validation_error("config line " + std::to_string(lineno) +
                                   ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw validation_error("config line " + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw validation_error("config line " + std::to_string(lineno) +
                                   ": key outside any [section]");
        auto& sec = cfg.data_[section];
        if (sec.count(key))
            throw validation_error("config: duplicate key '" + section + "." + key + "'");
        sec[key] = value;
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

const std::string* ConfigFile::find(const std::string& section, const std::string& key) const {
    const auto s = data_.find(section);
    if (s == data_.end()) return nullptr;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    consumed_.insert(section + "." + key);
    return &k->second;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    const auto s = data_.find(section);
    return s != data_.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key) {
    const std::string* v = find(section, key);
    if (!v) throw validation_error("config: missing required key '" + section + "." + key + "'");
    return *v;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) {
    const std::string* v = find(section, key);
    return v ? *v : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) {
    const std::string raw = get_string(section, key);
    try {
        std::size_t pos = 0;
        const double v = std::stod(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw validation_error("config: key '" + section + "." + key + "' is not a number: '" +
                               raw + "'");
    }
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) {
    return has(section, key) ? get_double(section, key) : fallback;
}

long ConfigFile::get_int(const std::string& section, const std::string& key) {
    const std::string raw = get_string(section, key);
    try {
        std::size_t pos = 0;
        const long v = std::stol(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw validation_error("config: key '" + section + "." + key + "' is not an integer: '" +
                               raw + "'");
    }
}

long ConfigFile::get_int(const std::string& section, const std::string& key, long fallback) {
    return has(section, key) ? get_int(section, key) : fallback;
}

std::uint64_t ConfigFile::get_seed(const std::string& section, const std::string& key,
                                   std::uint64_t fallback) {
    if (!has(section, key)) return fallback;
    const std::string raw = get_string(section, key);
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw validation_error("config: key '" + section + "." + key +
                               "' is not a valid seed: '" + raw + "'");
    }
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key, bool fallback) {
    if (!has(section, key)) return fallback;
    const std::string raw = get_string(section, key);
    if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return true;
    if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return false;
    throw validation_error("config: key '" + section + "." + key + "' is not a boolean: '" +
                           raw + "'");
}

void ConfigFile::finalize() const {
    std::vector<std::string> unknown;
    for (const auto& [section, keys] : data_)
        for (const auto& [key, value] : keys) {
            (void)value;
            if (!consumed_.count(section + "." + key)) unknown.push_back(section + "." + key);
        }
    if (!unknown.empty()) {
        std::string msg = "config: unknown key(s):";
        for (const auto& k : unknown) msg += " " + k;
        throw validation_error(msg);
    }
}

}  // namespace gravkit
