#pragma once

#include "snrisk/arrivals.hpp"
#include "snrisk/heavytail.hpp"
#include "snrisk/norms.hpp"
#include "snrisk/seqmodel.hpp"
#include "snrisk/snp.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace snrisk {

// Raised on malformed or invalid configuration; line is 0 when the problem
// is not tied to a specific line (e.g. a missing required key).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string file, int line, const std::string& what)
        : std::runtime_error(line > 0 ? file + ":" + std::to_string(line) + ": " + what
                                      : file + ": " + what),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

// Flat INI-style key/value config: [section] headers, key = value lines,
// '#' or ';' comments. Environment variables SNRISK_<SECTION>__<KEY>
// override file values.
class Config {
public:
    static Config parse_file(const std::string& path, bool apply_env = true);
    static Config parse_string(const std::string& text, const std::string& name = "<string>",
                               bool apply_env = false);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string_or(const std::string& section, const std::string& key,
                              const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key, double fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key) const;
    std::uint64_t get_u64_or(const std::string& section, const std::string& key,
                             std::uint64_t fallback) const;
    std::vector<double> get_list(const std::string& section, const std::string& key) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

    // Rejects sections/keys outside the known schema; reports the offending line.
    void validate_schema() const;

    // Deterministic dump (sections and keys sorted) used for echoing the
    // resolved config and for the report content hash.
    std::string canonical() const;

    const std::string& source_name() const { return name_; }
    int line_of(const std::string& section, const std::string& key) const;

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::string name_ = "<none>";
    std::map<std::string, std::map<std::string, Entry>> sections_;
};

// Builders from the config's named presets to engine objects.
MarginalModel build_marginal(const Config& cfg);
HeavyTailDist build_marginal_dist(const Config& cfg);  // requires kind = pareto
CountingProcessSpec build_counting(const Config& cfg, double horizon);
ShockFunctionSpec build_shock(const Config& cfg);
MatrixSpec build_matrix(const Config& cfg);
Norm build_norm(const Config& cfg);

struct RunSettings {
    double horizon = 1.0;
    std::uint64_t seed = 0;
    int workers = 1;
    std::size_t n_paths = 100000;
    std::size_t n_samples = 100000;
    std::optional<double> threshold;        // raw threshold
    std::optional<double> quantile;         // marginal quantile level
    std::vector<double> quantile_ladder;    // convergence studies
    std::string indicator = "tail";
    std::size_t j_max = 5;
    std::string out_dir = "out";
};

RunSettings build_run_settings(const Config& cfg, std::optional<std::uint64_t> seed_override,
                               std::optional<int> workers_override,
                               std::optional<std::string> out_override);

} // namespace snrisk
