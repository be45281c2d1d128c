#include "faithsum/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace faithsum {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str());
}

ExperimentConfig ExperimentConfig::parse_string(const std::string& text) {
    ExperimentConfig config;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) {
                throw std::runtime_error("config line " + std::to_string(line_no) +
                                         ": empty section name");
            }
            config.sections_[section];
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": expected key = value");
        }
        if (section.empty()) {
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": key outside any [section]");
        }
        config.sections_[section].emplace_back(trim(t.substr(0, eq)),
                                               trim(t.substr(eq + 1)));
    }
    return config;
}

bool ExperimentConfig::has_section(const std::string& section) const {
    return sections_.find(section) != sections_.end();
}

bool ExperimentConfig::has(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    if (it == sections_.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(),
                       [&key](const auto& kv) { return kv.first == key; });
}

std::string ExperimentConfig::get(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    if (it != sections_.end()) {
        for (auto rit = it->second.rbegin(); rit != it->second.rend(); ++rit) {
            if (rit->first == key) return rit->second;
        }
    }
    throw std::runtime_error("config: missing key \"" + key + "\" in [" + section + "]");
}

std::string ExperimentConfig::get_or(const std::string& section, const std::string& key,
                                     const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

double ExperimentConfig::get_double(const std::string& section, const std::string& key,
                                    double fallback) const {
    return has(section, key) ? std::stod(get(section, key)) : fallback;
}

std::int64_t ExperimentConfig::get_int(const std::string& section, const std::string& key,
                                       std::int64_t fallback) const {
    return has(section, key) ? std::stoll(get(section, key)) : fallback;
}

bool ExperimentConfig::get_bool(const std::string& section, const std::string& key,
                                bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key);
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw std::runtime_error("config: bad boolean \"" + v + "\" for " + key);
}

std::vector<std::string> ExperimentConfig::get_all(const std::string& section,
                                                   const std::string& key) const {
    std::vector<std::string> out;
    auto it = sections_.find(section);
    if (it == sections_.end()) return out;
    for (const auto& [k, v] : it->second) {
        if (k == key) out.push_back(v);
    }
    return out;
}

void ExperimentConfig::require_known_keys(const std::string& section,
                                          const std::vector<std::string>& allowed) const {
    auto it = sections_.find(section);
    if (it == sections_.end()) return;
    for (const auto& [key, value] : it->second) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw std::runtime_error("config: unknown key \"" + key + "\" in [" + section +
                                     "]");
        }
    }
}

void ExperimentConfig::set(const std::string& section, const std::string& key,
                           const std::string& value) {
    sections_[section].emplace_back(key, value);
}

std::string ExperimentConfig::canonical_section(const std::string& section) const {
    std::ostringstream out;
    out << "[" << section << "]\n";
    auto it = sections_.find(section);
    if (it != sections_.end()) {
        for (const auto& [key, value] : it->second) {
            out << key << " = " << value << "\n";
        }
    }
    return out.str();
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    std::ostringstream out;
    out << std::hex << hash;
    return out.str();
}

}  // namespace faithsum
