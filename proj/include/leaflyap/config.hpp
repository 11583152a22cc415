// SPDX-License-Identifier: Apache-2.0
#ifndef LEAFLYAP_CONFIG_HPP
#define LEAFLYAP_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "leaflyap/errors.hpp"

namespace leaflyap {

// Dotted-key experiment configuration: one `section.key = value` per line,
// '#' comments, UTF-8 text. No positional structure, so configs archive well.
class Config {
public:
    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DomainError("cli.run", "cannot open config file '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_string(ss.str());
    }

    static Config parse_string(const std::string& text) {
        Config c;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            const std::string t = trim(line);
            if (t.empty()) continue;
            const std::size_t eq = t.find('=');
            if (eq == std::string::npos)
                throw DomainError("cli.config", "line " + std::to_string(lineno) + ": expected key = value");
            const std::string key = trim(t.substr(0, eq));
            const std::string val = trim(t.substr(eq + 1));
            if (key.empty())
                throw DomainError("cli.config", "line " + std::to_string(lineno) + ": empty key");
            c.values_[key] = val;
        }
        return c;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback = "") const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string require_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw DomainError("cli.config", "missing required key '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        return to_double(key, values_.at(key));
    }

    double require_double(const std::string& key) const { return to_double(key, require_string(key)); }

    long long get_int(const std::string& key, long long fallback) const {
        if (!has(key)) return fallback;
        return to_int(key, values_.at(key));
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const std::string& s = values_.at(key);
        try {
            std::size_t pos = 0;
            const std::uint64_t v = std::stoull(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (...) {
            throw DomainError("cli.config", "key '" + key + "' is not an unsigned integer: " + s);
        }
    }

    bool get_bool(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string& s = values_.at(key);
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
        throw DomainError("cli.config", "key '" + key + "' is not a boolean: " + s);
    }

    std::vector<double> get_doubles(const std::string& key) const {
        std::vector<double> out;
        if (!has(key)) return out;
        std::istringstream in(values_.at(key));
        std::string tok;
        while (std::getline(in, tok, ',')) out.push_back(to_double(key, trim(tok)));
        return out;
    }

    // row-major decimal matrix, rows separated by ';'
    std::vector<std::vector<double>> get_matrix(const std::string& key) const {
        std::vector<std::vector<double>> rows;
        if (!has(key)) return rows;
        std::istringstream in(values_.at(key));
        std::string row;
        while (std::getline(in, row, ';')) {
            std::vector<double> r;
            std::istringstream rin(row);
            std::string tok;
            while (std::getline(rin, tok, ',')) r.push_back(to_double(key, trim(tok)));
            rows.push_back(std::move(r));
        }
        return rows;
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    static std::string trim(const std::string& s) {
        std::size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        std::size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    static double to_double(const std::string& key, const std::string& s) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (...) {
            throw DomainError("cli.config", "key '" + key + "' is not a number: " + s);
        }
    }

    static long long to_int(const std::string& key, const std::string& s) {
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (...) {
            throw DomainError("cli.config", "key '" + key + "' is not an integer: " + s);
        }
    }

    std::map<std::string, std::string> values_;
};

} // namespace leaflyap

#endif
