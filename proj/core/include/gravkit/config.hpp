#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace gravkit {

/// Line-oriented sectioned key=value configuration. '#' starts a comment,
/// sections are bracketed, keys are unique within a section. Every key must
/// be consumed by the reader; finalize() rejects unknown keys by name.
class ConfigFile {
public:
    static ConfigFile parse_string(const std::string& text);
    static ConfigFile parse_file(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key);
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback);
    double get_double(const std::string& section, const std::string& key);
    double get_double(const std::string& section, const std::string& key, double fallback);
    long get_int(const std::string& section, const std::string& key);
    long get_int(const std::string& section, const std::string& key, long fallback);
    std::uint64_t get_seed(const std::string& section, const std::string& key,
                           std::uint64_t fallback);
    bool get_bool(const std::string& section, const std::string& key, bool fallback);

    /// Throws validation_error naming every key that was never read.
    void finalize() const;

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return data_;
    }

private:
    std::map<std::string, std::map<std::string, std::string>> data_;
    mutable std::set<std::string> consumed_;  // "section.key"

    const std::string* find(const std::string& section, const std::string& key) const;
};

}  // namespace gravkit
