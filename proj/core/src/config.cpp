#include "nhsense/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace nhsense {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool valid_key(const std::string& key) {
    if (key.empty()) return false;
    for (char c : key)
        if (!(std::islower(static_cast<unsigned char>(c)) ||
              std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
            return false;
    return true;
}

// Consumes a leading double from pos; returns false if none.
bool eat_double(const std::string& s, std::size_t& pos, double& out) {
    const char* start = s.c_str() + pos;
    char* end = nullptr;
    const double value = std::strtod(start, &end);
    if (end == start) return false;
    pos += static_cast<std::size_t>(end - start);
    out = value;
    return true;
}

std::string format_double(double x) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", x);
    return buffer;
}

}  // namespace

Complex parse_complex(const std::string& raw) {
    const std::string token = trim(raw);
    auto fail = [&]() -> Complex {
        throw ConfigError("bad complex number '" + token +
                          "' (expected re, imi or re+imi)");
    };
    if (token.empty()) return fail();

    std::size_t pos = 0;
    double first = 0.0;
    const bool have_first = eat_double(token, pos, first);
    if (have_first && !std::isfinite(first)) return fail();
    if (!have_first) {
        // Bare imaginary unit with optional sign: i, +i, -i.
        double sign = 1.0;
        if (pos < token.size() && (token[pos] == '+' || token[pos] == '-'))
            sign = token[pos++] == '-' ? -1.0 : 1.0;
        if (pos + 1 == token.size() && token[pos] == 'i')
            return Complex(0.0, sign);
        return fail();
    }
    if (pos == token.size()) return Complex(first, 0.0);
    if (token[pos] == 'i')
        return pos + 1 == token.size() ? Complex(0.0, first) : fail();

    if (token[pos] != '+' && token[pos] != '-') return fail();
    const double sign = token[pos] == '-' ? -1.0 : 1.0;
    double second = 0.0;
    std::size_t after = pos + 1;
    if (eat_double(token, after, second)) {
        // The sign was consumed separately only if strtod skipped it.
        if (after > pos + 1 && (token[pos + 1] == '+' || token[pos + 1] == '-'))
            return fail();  // double sign like "1+-2i"
        second = token[pos + 1] == '+' || token[pos + 1] == '-' ? second : sign * second;
    } else {
        second = sign;  // "a+i" / "a-i"
        after = pos + 1;
    }
    if (after + 1 == token.size() && token[after] == 'i') {
        if (!std::isfinite(first) || !std::isfinite(second)) return fail();
        return Complex(first, second);
    }
    return fail();
}

std::string format_complex(Complex z) {
    if (z.imag() == 0.0) return format_double(z.real());
    if (z.real() == 0.0) return format_double(z.imag()) + "i";
    std::string s = format_double(z.real());
    if (z.imag() >= 0.0) s += "+";
    return s + format_double(z.imag()) + "i";
}

KeyValueFile KeyValueFile::parse(const std::string& text) {
    KeyValueFile file;
    std::istringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (!valid_key(key))
            throw ConfigError("line " + std::to_string(line_no) + ": bad key '" +
                              key + "'");
        if (file.entries_.count(key))
            throw ConfigError("duplicate key '" + key + "'");
        std::vector<std::string> tokens;
        std::string token;
        for (char c : line.substr(eq + 1)) {
            if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
                if (!token.empty()) tokens.push_back(token);
                token.clear();
            } else {
                token += c;
            }
        }
        if (!token.empty()) tokens.push_back(token);
        if (tokens.empty())
            throw ConfigError("key '" + key + "' has no value");
        file.entries_[key] = std::move(tokens);
    }
    return file;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

bool KeyValueFile::has(const std::string& key) const {
    return entries_.count(key) > 0;
}

void KeyValueFile::require_known_keys(const std::set<std::string>& allowed) const {
    for (const auto& [key, _] : entries_)
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "'");
}

std::string KeyValueFile::get_string(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing key '" + key + "'");
    if (it->second.size() != 1)
        throw ConfigError("key '" + key + "' expects a single value");
    return it->second.front();
}

double KeyValueFile::get_double(const std::string& key) const {
    const Complex z = parse_complex(get_string(key));
    if (z.imag() != 0.0)
        throw ConfigError("key '" + key + "' must be real");
    return z.real();
}

double KeyValueFile::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long KeyValueFile::get_long_or(const std::string& key, long fallback) const {
    if (!has(key)) return fallback;
    const double value = get_double(key);
    const long as_long = static_cast<long>(value);
    if (static_cast<double>(as_long) != value)
        throw ConfigError("key '" + key + "' must be an integer");
    return as_long;
}

std::vector<double> KeyValueFile::get_double_list(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing key '" + key + "'");
    std::vector<double> values;
    for (const auto& token : it->second) {
        const Complex z = parse_complex(token);
        if (z.imag() != 0.0)
            throw ConfigError("key '" + key + "' must be a real list");
        values.push_back(z.real());
    }
    return values;
}

std::vector<Complex> KeyValueFile::get_complex_list(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing key '" + key + "'");
    std::vector<Complex> values;
    for (const auto& token : it->second) values.push_back(parse_complex(token));
    return values;
}

SensorSystem ModelConfig::build() const {
    switch (kind) {
        case ModelTag::reciprocal:
            return build_reciprocal(recip, k1, k2, beta1, beta2);
        case ModelTag::nonreciprocal:
            return build_nonreciprocal(nonrecip, k1, k2, beta1, beta2);
        case ModelTag::generic:
        default:
            return make_sensor_system(h0, v, k1, k2, beta1, beta2);
    }
}

const std::set<std::string>& model_config_keys() {
    static const std::set<std::string> keys = {
        "n_modes", "h0", "v", "k1", "k2", "beta1", "beta2",
        "model", "gamma1", "gamma2", "j", "nu2", "p",
    };
    return keys;
}

namespace {

Matrix matrix_from_tokens(const std::vector<Complex>& entries, Eigen::Index n,
                          const std::string& key) {
    if (static_cast<Eigen::Index>(entries.size()) != n * n)
        throw ConfigError("key '" + key + "' expects " + std::to_string(n * n) +
                          " entries (row-major), got " +
                          std::to_string(entries.size()));
    Matrix m(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            m(r, c) = entries[static_cast<std::size_t>(r * n + c)];
    return m;
}

}  // namespace

ModelConfig parse_model_config(const KeyValueFile& file) {
    if (file.has("model")) {
        const std::string which = file.get_string("model");
        ModelConfig config = which == "reciprocal"       ? fig2_reciprocal_config()
                             : which == "nonreciprocal"  ? fig3_nonreciprocal_config()
                             : throw ConfigError("model must be 'reciprocal' or "
                                                 "'nonreciprocal', got '" +
                                                 which + "'");
        config.k1 = file.get_double_or("k1", config.k1);
        config.k2 = file.get_double_or("k2", config.k2);
        config.beta1 = file.get_double_or("beta1", config.beta1);
        if (config.kind == ModelTag::reciprocal) {
            config.recip.gamma1 = file.get_double_or("gamma1", config.recip.gamma1);
            config.recip.gamma2 = file.get_double_or("gamma2", config.recip.gamma2);
            config.recip.j = file.get_double_or("j", config.recip.j);
            if (file.has("nu2"))
                throw ConfigError("nu2 applies to the nonreciprocal model only");
        } else {
            config.nonrecip.gamma1 = file.get_double_or("gamma1", config.nonrecip.gamma1);
            config.nonrecip.gamma2 = file.get_double_or("gamma2", config.nonrecip.gamma2);
            config.nonrecip.j = file.get_double_or("j", config.nonrecip.j);
            config.nonrecip.nu2 = file.get_double_or("nu2", config.nonrecip.nu2);
        }
        const double p = file.get_double_or(
            "p", config.beta1 > 0.0 ? config.beta2 / config.beta1 : 0.0);
        config.beta2 = p * config.beta1;
        if (file.has("beta2"))
            throw ConfigError("model form uses p, not beta2");
        return config;
    }

    ModelConfig config;
    config.kind = ModelTag::generic;
    const long n = file.has("n_modes")
                       ? file.get_long_or("n_modes", 0)
                       : throw ConfigError("missing key 'n_modes' (or 'model')");
    if (n < 1) throw ConfigError("n_modes must be >= 1");
    config.h0 = matrix_from_tokens(file.get_complex_list("h0"), n, "h0");
    config.v = matrix_from_tokens(file.get_complex_list("v"), n, "v");
    config.k1 = file.get_double("k1");
    config.k2 = file.get_double_or("k2", 0.0);
    config.beta1 = file.get_double_or("beta1", 0.0);
    config.beta2 = file.get_double_or("beta2", 0.0);
    if (file.has("p")) throw ConfigError("raw form uses beta2, not p");
    return config;
}

ModelConfig fig2_reciprocal_config() {
    ModelConfig config;
    config.kind = ModelTag::reciprocal;
    config.recip = ReciprocalParams{-0.99, -0.011, 0.16};
    config.k1 = 1.0;
    config.k2 = 0.01;
    config.beta1 = 1.0;
    config.beta2 = 30.0;
    return config;
}

ModelConfig fig3_nonreciprocal_config() {
    ModelConfig config;
    config.kind = ModelTag::nonreciprocal;
    config.nonrecip = NonReciprocalParams{1.0, 0.5, 0.0, 1.5};
    config.k1 = 1.0;
    config.k2 = 0.001;
    config.beta1 = 1.0;
    config.beta2 = 5.0;
    return config;
}

}  // namespace nhsense
