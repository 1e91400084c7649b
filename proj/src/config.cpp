#include "warmstart/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace warmstart {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string &s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

template <class T> bool parse_number(std::string_view s, T &out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

bool parse_real(std::string_view s, double &out) {
    if (s == "pi") {
        out = 3.141592653589793;
        return true;
    }
    if (s == "-pi") {
        out = -3.141592653589793;
        return true;
    }
    return parse_number(s, out) && std::isfinite(out);
}

} // namespace

Config Config::parse(std::string_view text, const std::string &source) {
    Config c;
    c.source_ = source;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view raw =
            text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        const std::string at = source + ":" + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw ValidationError(at + "malformed section header '" + std::string(line) + "'");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ValidationError(at + "expected 'key = value', got '" + std::string(line) + "'");
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty()) throw ValidationError(at + "empty key");
        auto &sec = c.sections_[section];
        if (sec.count(key))
            throw ValidationError(at + "[" + section + "] " + key + " is set twice (first on line " +
                                  std::to_string(sec[key].line) + ")");
        sec[key] = {std::string(trim(line.substr(eq + 1))), line_no};
    }
    return c;
}

Config Config::load(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

const Config::Entry *Config::find(const std::string &section, const std::string &key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    used_[section][key] = true;
    return &k->second;
}

bool Config::has(const std::string &section, const std::string &key) const {
    const auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key);
}

std::string Config::where(const std::string &section, const std::string &key) const {
    const auto s = sections_.find(section);
    std::string line = "?";
    if (s != sections_.end()) {
        const auto k = s->second.find(key);
        if (k != s->second.end()) line = std::to_string(k->second.line);
    }
    return source_ + ":" + line + ": [" + section + "] " + key;
}

std::string Config::get_string(const std::string &section, const std::string &key,
                               const std::string &fallback) const {
    const Entry *e = find(section, key);
    return e ? e->value : fallback;
}

double Config::get_double(const std::string &section, const std::string &key,
                          double fallback) const {
    const Entry *e = find(section, key);
    if (!e) return fallback;
    double v = 0.0;
    if (!parse_real(e->value, v))
        throw ValidationError(where(section, key) + ": expected a finite number, got '" + e->value + "'");
    return v;
}

int Config::get_int(const std::string &section, const std::string &key, int fallback) const {
    const Entry *e = find(section, key);
    if (!e) return fallback;
    int v = 0;
    if (!parse_number(e->value, v))
        throw ValidationError(where(section, key) + ": expected an integer, got '" + e->value + "'");
    return v;
}

std::uint64_t Config::get_u64(const std::string &section, const std::string &key,
                              std::uint64_t fallback) const {
    const Entry *e = find(section, key);
    if (!e) return fallback;
    std::uint64_t v = 0;
    if (!parse_number(e->value, v))
        throw ValidationError(where(section, key) + ": expected an unsigned integer, got '" +
                              e->value + "'");
    return v;
}

bool Config::get_bool(const std::string &section, const std::string &key, bool fallback) const {
    const Entry *e = find(section, key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no") return false;
    throw ValidationError(where(section, key) + ": expected true or false, got '" + e->value + "'");
}

std::vector<double> Config::get_doubles(const std::string &section, const std::string &key,
                                        const std::vector<double> &fallback) const {
    const Entry *e = find(section, key);
    if (!e) return fallback;
    std::vector<double> out;
    for (const auto &tok : split_list(e->value)) {
        double v = 0.0;
        if (!parse_real(tok, v))
            throw ValidationError(where(section, key) + ": '" + tok + "' is not a finite number");
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError(where(section, key) + ": empty list");
    return out;
}

std::vector<int> Config::get_ints(const std::string &section, const std::string &key,
                                  const std::vector<int> &fallback) const {
    const Entry *e = find(section, key);
    if (!e) return fallback;
    std::vector<int> out;
    for (const auto &tok : split_list(e->value)) {
        int v = 0;
        if (!parse_number(std::string_view(tok), v))
            throw ValidationError(where(section, key) + ": '" + tok + "' is not an integer");
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError(where(section, key) + ": empty list");
    return out;
}

void Config::check_unused() const {
    for (const auto &[sec, keys] : sections_)
        for (const auto &[key, entry] : keys) {
            const auto s = used_.find(sec);
            if (s == used_.end() || !s->second.count(key))
                throw ValidationError(where(sec, key) + ": unknown setting for this subcommand");
        }
}

} // namespace warmstart
