#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace faithsum {

// Flat key-value experiment config with one [section] per command. Keys may
// repeat (e.g. evaluate entries). Lines starting with '#' are comments.
class ExperimentConfig {
public:
    static ExperimentConfig parse_file(const std::string& path);
    static ExperimentConfig parse_string(const std::string& text);

    bool has_section(const std::string& section) const;
    bool has(const std::string& section, const std::string& key) const;

    // Single-valued accessors; get() throws when the key is missing.
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& section, const std::string& key,
                         std::int64_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

    // All values for a repeatable key, in file order.
    std::vector<std::string> get_all(const std::string& section, const std::string& key) const;

    // Rejects keys outside `allowed` for the section; a missing section is
    // fine (commands may run on flag overrides alone).
    void require_known_keys(const std::string& section,
                            const std::vector<std::string>& allowed) const;

    // Override or append a key from the command line.
    void set(const std::string& section, const std::string& key, const std::string& value);

    // Stable rendering of one section, used for the manifest hash.
    std::string canonical_section(const std::string& section) const;

private:
    // section -> ordered (key, value) list
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections_;
};

// FNV-1a over a string, hex-encoded; keys the manifest.
std::string fnv1a_hex(const std::string& data);

}  // namespace faithsum
