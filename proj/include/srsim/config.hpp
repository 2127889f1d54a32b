#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace srsim::io {

// Flat key=value run configuration. Keys must come from the known-key
// registry; every value consulted (including applied defaults) is recorded
// so the resolved-config echo is complete and hashable.
class RunConfig {
public:
    RunConfig() = default;

    static RunConfig from_file(const std::string& path);
    static RunConfig from_text(const std::string& text);

    void set(const std::string& key, const std::string& value);  // validates key
    bool has(const std::string& key) const;

    double get_double(const std::string& key, double def) const;
    long get_long(const std::string& key, long def) const;
    bool get_bool(const std::string& key, bool def) const;  // on/off, true/false, 1/0
    std::string get_string(const std::string& key, const std::string& def) const;

    // Sorted key=value lines of everything set or consulted.
    std::string resolved_text() const;
    std::uint64_t resolved_hash() const;  // FNV-1a over resolved_text()

    static const std::vector<std::string>& known_keys();

private:
    std::map<std::string, std::string> values_;
    mutable std::map<std::string, std::string> resolved_;
};

std::uint64_t fnv1a64(const std::string& text);

}  // namespace srsim::io
