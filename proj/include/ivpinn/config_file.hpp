#pragma once

#include <map>
#include <string>
#include <vector>

namespace ivpinn {

/// Flat key-value configuration with [section] headers; keys are addressed as
/// "section.key". Lines starting with # are comments; values may carry
/// trailing comments.
class KeyValueConfig {
  public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_string(const std::string& text);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    int get_int(const std::string& key, int fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) const;
    std::vector<double> get_double_list(const std::string& key, std::vector<double> fallback) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

  private:
    std::map<std::string, std::string> values_;
};

}  // namespace ivpinn
