// config.hpp — flat key-value configuration files describing sensors and
// campaign parameters.
//
// Grammar (one entry per line):
//   key = value [value ...]
// '#' starts a comment, keys are lowercase [a-z0-9_]+, list values are
// separated by whitespace and/or commas. Complex numbers are written in the
// "re+imi" form: "1.5", "-0.3i", "1.5-0.3i", "i", "-i". Unknown keys are
// rejected.

#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "nhsense/models.hpp"
#include "nhsense/system.hpp"

namespace nhsense {

/// Parses one complex token in the "re+imi" grammar; throws ConfigError.
Complex parse_complex(const std::string& token);

/// Formats a complex value in the same grammar with 17 significant digits.
std::string format_complex(Complex z);

/// A parsed key-value file. Values are kept as raw tokens and converted on
/// access so error messages can carry the offending key.
class KeyValueFile {
  public:
    static KeyValueFile parse(const std::string& text);
    static KeyValueFile load(const std::string& path);

    bool has(const std::string& key) const;
    /// Throws ConfigError if any present key is not in `allowed`.
    void require_known_keys(const std::set<std::string>& allowed) const;

    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    long get_long_or(const std::string& key, long fallback) const;
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<Complex> get_complex_list(const std::string& key) const;

  private:
    std::map<std::string, std::vector<std::string>> entries_;
};

/// A sensor description, either a raw matrix form (n_modes/h0/v/...) or a
/// named two-mode model with parameters.
struct ModelConfig {
    ModelTag kind = ModelTag::generic;
    ReciprocalParams recip;
    NonReciprocalParams nonrecip;
    Matrix h0;  // raw form only
    Matrix v;
    double k1 = 1.0;
    double k2 = 0.0;
    double beta1 = 1.0;
    double beta2 = 0.0;

    SensorSystem build() const;
};

/// Keys consumed by parse_model_config; campaign parsers extend this set.
const std::set<std::string>& model_config_keys();

/// Reads the sensor part of a config file. Raw form requires n_modes, h0, v,
/// k1; model form requires model = reciprocal|nonreciprocal and accepts
/// gamma1, gamma2, j, nu2, k2, p, beta1 with figure-caption defaults.
ModelConfig parse_model_config(const KeyValueFile& file);

/// Caption parameter sets used as model defaults.
ModelConfig fig2_reciprocal_config();
ModelConfig fig3_nonreciprocal_config();

}  // namespace nhsense
