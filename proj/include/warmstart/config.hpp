#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "warmstart/errors.hpp"

namespace warmstart {

// Flat "key = value" text with "[section]" headers. '#' and ';' start comment
// lines. Keys before any header belong to the section "".
class Config {
  public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    Config() = default;
    static Config parse(std::string_view text, const std::string &source = "<config>");
    static Config load(const std::string &path);

    bool has(const std::string &section, const std::string &key) const;

    // Typed getters; a present but malformed value throws ValidationError
    // naming the source, line, section and key.
    std::string get_string(const std::string &section, const std::string &key,
                           const std::string &fallback) const;
    double get_double(const std::string &section, const std::string &key, double fallback) const;
    int get_int(const std::string &section, const std::string &key, int fallback) const;
    std::uint64_t get_u64(const std::string &section, const std::string &key,
                          std::uint64_t fallback) const;
    bool get_bool(const std::string &section, const std::string &key, bool fallback) const;
    // Comma or whitespace separated.
    std::vector<double> get_doubles(const std::string &section, const std::string &key,
                                    const std::vector<double> &fallback) const;
    std::vector<int> get_ints(const std::string &section, const std::string &key,
                              const std::vector<int> &fallback) const;

    // Throws if any key was never read by a getter.
    void check_unused() const;

    // Every entry, for echoing into run metadata.
    const std::map<std::string, std::map<std::string, Entry>> &sections() const { return sections_; }
    const std::string &source() const { return source_; }

    // Diagnostic prefix "source:line: [section] key".
    std::string where(const std::string &section, const std::string &key) const;

  private:
    const Entry *find(const std::string &section, const std::string &key) const;

    std::string source_ = "<config>";
    std::map<std::string, std::map<std::string, Entry>> sections_;
    mutable std::map<std::string, std::map<std::string, bool>> used_;
};

} // namespace warmstart
