#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace stosew::toml {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Value {
    std::variant<std::string, long long, double, bool, std::vector<double>> v;

    bool is_string() const { return std::holds_alternative<std::string>(v); }
    bool is_int() const { return std::holds_alternative<long long>(v); }
    bool is_float() const { return std::holds_alternative<double>(v); }
    bool is_bool() const { return std::holds_alternative<bool>(v); }
    bool is_array() const { return std::holds_alternative<std::vector<double>>(v); }

    std::string as_string() const {
        if (!is_string()) throw ParseError("value is not a string");
        return std::get<std::string>(v);
    }
    long long as_int() const {
        if (is_int()) return std::get<long long>(v);
        throw ParseError("value is not an integer");
    }
    double as_double() const {
        if (is_float()) return std::get<double>(v);
        if (is_int()) return double(std::get<long long>(v));
        throw ParseError("value is not a number");
    }
    bool as_bool() const {
        if (!is_bool()) throw ParseError("value is not a boolean");
        return std::get<bool>(v);
    }
    std::vector<double> as_array() const {
        if (!is_array()) throw ParseError("value is not an array");
        return std::get<std::vector<double>>(v);
    }

    std::string repr() const {
        std::ostringstream os;
        os.precision(17);
        if (is_string()) os << '"' << as_string() << '"';
        else if (is_int()) os << as_int();
        else if (is_float()) os << as_double();
        else if (is_bool()) os << (as_bool() ? "true" : "false");
        else {
            os << "[";
            auto a = as_array();
            for (std::size_t i = 0; i < a.size(); ++i) os << (i ? ", " : "") << a[i];
            os << "]";
        }
        return os.str();
    }
};

/// Keys flattened with dots: [params] x = 1 becomes "params.x".
using Table = std::map<std::string, Value>;

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline Value parse_scalar(const std::string& raw, int line_no) {
    std::string s = trim(raw);
    if (s.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty value");
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"')
            throw ParseError("line " + std::to_string(line_no) + ": unterminated string");
        return Value{s.substr(1, s.size() - 2)};
    }
    if (s == "true") return Value{true};
    if (s == "false") return Value{false};
    if (s.front() == '[') {
        if (s.back() != ']')
            throw ParseError("line " + std::to_string(line_no) + ": unterminated array");
        std::vector<double> arr;
        std::string body = s.substr(1, s.size() - 2);
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            try {
                std::size_t used = 0;
                double x = std::stod(item, &used);
                if (used != item.size()) throw std::invalid_argument("");
                arr.push_back(x);
            } catch (...) {
                throw ParseError("line " + std::to_string(line_no) + ": bad array element '" +
                                 item + "'");
            }
        }
        return Value{arr};
    }
    // integer or float
    bool looks_int = true;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if ((c == '+' || c == '-') && i == 0) continue;
        if (!std::isdigit(static_cast<unsigned char>(c))) looks_int = false;
    }
    try {
        if (looks_int) {
            std::size_t used = 0;
            long long x = std::stoll(s, &used);
            if (used != s.size()) throw std::invalid_argument("");
            return Value{x};
        }
        std::size_t used = 0;
        double x = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("");
        return Value{x};
    } catch (...) {
        throw ParseError("line " + std::to_string(line_no) + ": cannot parse value '" + s + "'");
    }
}

} // namespace detail

inline Table parse(const std::string& text) {
    Table out;
    std::string prefix;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        // strip comments outside strings
        std::string stripped;
        bool in_str = false;
        for (char c : line) {
            if (c == '"') in_str = !in_str;
            if (c == '#' && !in_str) break;
            stripped.push_back(c);
        }
        stripped = detail::trim(stripped);
        if (stripped.empty()) continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']')
                throw ParseError("line " + std::to_string(line_no) + ": bad table header");
            prefix = detail::trim(stripped.substr(1, stripped.size() - 2));
            if (prefix.empty())
                throw ParseError("line " + std::to_string(line_no) + ": empty table name");
            continue;
        }
        std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(line_no) + ": expected key = value");
        std::string key = detail::trim(stripped.substr(0, eq));
        if (key.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty key");
        std::string full = prefix.empty() ? key : prefix + "." + key;
        if (out.count(full))
            throw ParseError("line " + std::to_string(line_no) + ": duplicate key '" + full + "'");
        out[full] = detail::parse_scalar(stripped.substr(eq + 1), line_no);
    }
    return out;
}

inline Table parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse(ss.str());
}

inline std::string read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace stosew::toml
