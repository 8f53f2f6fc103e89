#pragma once

#include <map>
#include <string>
#include <vector>

namespace rrl {

// Flat `name = value` text document. `#` starts a comment, blank lines are
// skipped. Values are doubles; keys are case-sensitive.
class KvConfig {
public:
    KvConfig() = default;

    static KvConfig load(const std::string& path);
    static KvConfig parse(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    // Throws ConfigError naming the key and file when absent.
    double get(const std::string& key) const;
    double get_or(const std::string& key, double fallback) const;

    void set(const std::string& key, double value) { values_[key] = value; }

    const std::map<std::string, double>& values() const { return values_; }
    const std::string& origin() const { return origin_; }

private:
    std::map<std::string, double> values_;
    std::string origin_;
};

}  // namespace rrl
