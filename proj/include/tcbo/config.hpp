#ifndef TCBO_CONFIG_HPP
#define TCBO_CONFIG_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace tcbo {

// Parse error carrying the 1-based line number of the offending line.
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& msg, int line)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
    int line_number;
};

// Flat key=value text with [section] headers and '#' comments. Keys are
// addressed as "section.key"; keys before any header live in section "".
class ConfigFile {
public:
    ConfigFile() = default;

    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_text(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get(const std::string& key, const std::string& fallback) const;
    std::string require(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;  // space separated

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace tcbo

#endif
