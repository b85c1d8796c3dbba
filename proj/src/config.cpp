#include "snrisk/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace snrisk {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    return s;
}

// section -> allowed keys
const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"marginal", {"kind", "alpha", "scale", "phi", "noise_sd"}},
        {"counting", {"kind", "rate", "slope", "times", "rates", "gap", "n"}},
        {"shock", {"kind", "c", "omega", "omega_values", "omega_probs"}},
        {"matrix", {"kind", "entry_c", "entry_alpha", "entry_scale"}},
        {"norm", {"kind", "p"}},
        {"run",
         {"horizon", "seed", "workers", "n_paths", "n_samples", "threshold", "quantile",
          "quantiles", "indicator", "j_max", "out"}},
    };
    return s;
}

} // namespace

Config Config::parse_string(const std::string& text, const std::string& name, bool apply_env) {
    Config cfg;
    cfg.name_ = name;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(name, lineno, "malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError(name, lineno, "empty section name");
            cfg.sections_[section];  // register even if empty
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(name, lineno, "expected 'key = value', got '" + line + "'");
        if (section.empty())
            throw ConfigError(name, lineno, "key/value outside of any [section]");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(name, lineno, "empty key");
        if (cfg.sections_[section].count(key))
            throw ConfigError(name, lineno, "duplicate key '" + key + "' in [" + section + "]");
        cfg.sections_[section][key] = {value, lineno};
    }
    if (apply_env) {
        for (auto& [sec, keys] : schema()) {
            for (auto& key : keys) {
                std::string var = "SNRISK_" + upper(sec) + "__" + upper(key);
                if (const char* v = std::getenv(var.c_str()))
                    cfg.sections_[sec][key] = {trim(v), 0};
            }
        }
    }
    return cfg;
}

Config Config::parse_file(const std::string& path, bool apply_env) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path, apply_env);
}

bool Config::has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end() || !s->second.count(key))
        throw ConfigError(name_, 0, "missing required key '" + key + "' in [" + section + "]");
    return s->second.at(key).value;
}

std::string Config::get_string_or(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
}

int Config::line_of(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return 0;
    auto k = s->second.find(key);
    return k == s->second.end() ? 0 : k->second.line;
}

double Config::get_double(const std::string& section, const std::string& key) const {
    std::string v = get_string(section, key);
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw ConfigError(name_, line_of(section, key),
                          "key '" + key + "' in [" + section + "]: '" + v + "' is not a number");
    }
}

double Config::get_double_or(const std::string& section, const std::string& key,
                             double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& section, const std::string& key) const {
    std::string v = get_string(section, key);
    try {
        std::size_t pos = 0;
        unsigned long long u = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return u;
    } catch (const std::exception&) {
        throw ConfigError(name_, line_of(section, key),
                          "key '" + key + "' in [" + section + "]: '" + v +
                              "' is not an unsigned integer");
    }
}

std::uint64_t Config::get_u64_or(const std::string& section, const std::string& key,
                                 std::uint64_t fallback) const {
    return has(section, key) ? get_u64(section, key) : fallback;
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key) const {
    std::string v = get_string(section, key);
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ConfigError(name_, line_of(section, key),
                              "key '" + key + "' in [" + section + "]: '" + item +
                                  "' is not a number");
        }
    }
    if (out.empty())
        throw ConfigError(name_, line_of(section, key),
                          "key '" + key + "' in [" + section + "]: empty list");
    return out;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    sections_[section][key] = {value, 0};
}

void Config::validate_schema() const {
    const auto& known = schema();
    for (auto& [sec, entries] : sections_) {
        auto it = known.find(sec);
        if (it == known.end())
            throw ConfigError(name_, entries.empty() ? 0 : entries.begin()->second.line,
                              "unknown section [" + sec + "]");
        for (auto& [key, entry] : entries) {
            if (!it->second.count(key))
                throw ConfigError(name_, entry.line,
                                  "unknown key '" + key + "' in [" + sec + "]");
        }
    }
}

std::string Config::canonical() const {
    std::ostringstream out;
    for (auto& [sec, entries] : sections_) {
        out << "[" << sec << "]\n";
        for (auto& [key, entry] : entries) out << key << " = " << entry.value << "\n";
    }
    return out.str();
}

MarginalModel build_marginal(const Config& cfg) {
    std::string kind = cfg.get_string("marginal", "kind");
    if (kind == "pareto") {
        return HeavyTailDist::pareto(cfg.get_double("marginal", "alpha"),
                                     cfg.get_double_or("marginal", "scale", 1.0));
    }
    if (kind == "dependent") {
        auto base = HeavyTailDist::pareto(cfg.get_double("marginal", "alpha"),
                                          cfg.get_double_or("marginal", "scale", 1.0));
        return DependentSequenceGen(base, cfg.get_double("marginal", "phi"),
                                    cfg.get_double("marginal", "noise_sd"));
    }
    throw ConfigError(cfg.source_name(), cfg.line_of("marginal", "kind"),
                      "unknown marginal kind '" + kind + "'");
}

HeavyTailDist build_marginal_dist(const Config& cfg) {
    auto m = build_marginal(cfg);
    if (auto* d = std::get_if<HeavyTailDist>(&m)) return *d;
    throw ConfigError(cfg.source_name(), cfg.line_of("marginal", "kind"),
                      "this experiment requires an independent marginal (kind = pareto)");
}

CountingProcessSpec build_counting(const Config& cfg, double horizon) {
    std::string kind = cfg.get_string("counting", "kind");
    if (kind == "poisson" || kind == "constant")
        return CountingProcessSpec::homogeneous_poisson(cfg.get_double("counting", "rate"));
    if (kind == "poisson-linear" || kind == "linear") {
        double slope = cfg.get_double("counting", "slope");
        if (!(slope > 0.0))
            throw ConfigError(cfg.source_name(), cfg.line_of("counting", "slope"),
                              "linear intensity slope must be > 0");
        return CountingProcessSpec::inhomogeneous_poisson(
            [slope](double t) { return slope * t; },
            [slope](double t) { return 0.5 * slope * t * t; });
    }
    if (kind == "poisson-piecewise" || kind == "piecewise-constant") {
        auto times = cfg.get_list("counting", "times");
        auto rates = cfg.get_list("counting", "rates");
        if (times.size() != rates.size())
            throw ConfigError(cfg.source_name(), cfg.line_of("counting", "rates"),
                              "piecewise intensity needs matching times/rates lists");
        if (times.front() != 0.0 || !std::is_sorted(times.begin(), times.end()))
            throw ConfigError(cfg.source_name(), cfg.line_of("counting", "times"),
                              "piecewise times must ascend from 0");
        for (double r : rates)
            if (r < 0.0)
                throw ConfigError(cfg.source_name(), cfg.line_of("counting", "rates"),
                                  "piecewise rates must be >= 0");
        auto lam = [times, rates](double t) {
            std::size_t i = times.size();
            while (i > 0 && times[i - 1] > t) --i;
            return i == 0 ? rates.front() : rates[i - 1];
        };
        auto cum = [times, rates](double t) {
            double m = 0.0;
            for (std::size_t i = 0; i < times.size(); ++i) {
                double seg_end = i + 1 < times.size() ? std::min(times[i + 1], t) : t;
                if (seg_end <= times[i]) break;
                m += rates[i] * (seg_end - times[i]);
            }
            return m;
        };
        return CountingProcessSpec::inhomogeneous_poisson(lam, cum);
    }
    if (kind == "renewal-deterministic") {
        double gap = cfg.get_double("counting", "gap");
        if (!(gap > 0.0))
            throw ConfigError(cfg.source_name(), cfg.line_of("counting", "gap"),
                              "renewal gap must be > 0");
        return CountingProcessSpec::renewal([gap](RngEngine&) { return gap; });
    }
    if (kind == "renewal-exponential") {
        double rate = cfg.get_double("counting", "rate");
        if (!(rate > 0.0))
            throw ConfigError(cfg.source_name(), cfg.line_of("counting", "rate"),
                              "renewal rate must be > 0");
        return CountingProcessSpec::renewal([rate](RngEngine& rng) {
            return std::exponential_distribution<double>(rate)(rng);
        });
    }
    if (kind == "fixed-count") {
        // Deterministic gaps sized so that exactly n arrivals land in [0, T].
        double n = cfg.get_double("counting", "n");
        if (!(n >= 1.0) || n != std::floor(n))
            throw ConfigError(cfg.source_name(), cfg.line_of("counting", "n"),
                              "fixed-count n must be a positive integer");
        double gap = horizon / (n + 0.5);
        return CountingProcessSpec::renewal([gap](RngEngine&) { return gap; });
    }
    throw ConfigError(cfg.source_name(), cfg.line_of("counting", "kind"),
                      "unknown counting kind '" + kind + "'");
}

ShockFunctionSpec build_shock(const Config& cfg) {
    std::string kind = cfg.get_string("shock", "kind");
    if (kind == "constant") return ShockFunctionSpec::constant(cfg.get_double_or("shock", "c", 1.0));
    if (kind == "indicator") return ShockFunctionSpec::indicator();
    if (kind == "exponential") {
        if (cfg.has("shock", "omega_values")) {
            auto values = cfg.get_list("shock", "omega_values");
            auto probs = cfg.get_list("shock", "omega_probs");
            if (values.size() != probs.size())
                throw ConfigError(cfg.source_name(), cfg.line_of("shock", "omega_probs"),
                                  "omega_values/omega_probs size mismatch");
            return ShockFunctionSpec::exponential(ScalarLaw::discrete(values, probs));
        }
        return ShockFunctionSpec::exponential(cfg.get_double("shock", "omega"));
    }
    throw ConfigError(cfg.source_name(), cfg.line_of("shock", "kind"),
                      "unknown shock kind '" + kind + "'");
}

MatrixSpec build_matrix(const Config& cfg) {
    std::string kind = cfg.get_string_or("matrix", "kind", "identity");
    if (kind == "identity") return MatrixSpec::identity();
    if (kind == "diagonal") return MatrixSpec::diagonal(build_shock(cfg));
    if (kind == "lower-triangular") return MatrixSpec::lower_triangular(build_shock(cfg));
    if (kind == "dense-constant") {
        double c = cfg.get_double("matrix", "entry_c");
        if (c < 0.0)
            throw ConfigError(cfg.source_name(), cfg.line_of("matrix", "entry_c"),
                              "dense entries must be >= 0");
        return MatrixSpec::user_dense([c](RngEngine&) { return c; });
    }
    if (kind == "dense-pareto") {
        auto law = HeavyTailDist::pareto(cfg.get_double("matrix", "entry_alpha"),
                                         cfg.get_double_or("matrix", "entry_scale", 1.0));
        return MatrixSpec::user_dense([law](RngEngine& rng) { return law.sample(rng); });
    }
    throw ConfigError(cfg.source_name(), cfg.line_of("matrix", "kind"),
                      "unknown matrix kind '" + kind + "'");
}

Norm build_norm(const Config& cfg) {
    std::string kind = cfg.get_string_or("norm", "kind", "l1");
    if (kind == "l1") return Norm::l1();
    if (kind == "linf") return Norm::linf();
    if (kind == "lp") return Norm::lp(cfg.get_double("norm", "p"));
    throw ConfigError(cfg.source_name(), cfg.line_of("norm", "kind"),
                      "unknown norm kind '" + kind + "'");
}

RunSettings build_run_settings(const Config& cfg, std::optional<std::uint64_t> seed_override,
                               std::optional<int> workers_override,
                               std::optional<std::string> out_override) {
    RunSettings rs;
    rs.horizon = cfg.get_double_or("run", "horizon", 1.0);
    if (!(rs.horizon > 0.0))
        throw ConfigError(cfg.source_name(), cfg.line_of("run", "horizon"), "horizon must be > 0");
    if (seed_override)
        rs.seed = *seed_override;
    else if (cfg.has("run", "seed"))
        rs.seed = cfg.get_u64("run", "seed");
    else
        throw ConfigError(cfg.source_name(), 0,
                          "seed is mandatory: set [run] seed or pass --seed");
    rs.workers = workers_override ? *workers_override
                                  : static_cast<int>(cfg.get_u64_or("run", "workers", 1));
    if (rs.workers < 1)
        throw ConfigError(cfg.source_name(), cfg.line_of("run", "workers"), "workers must be >= 1");
    rs.n_paths = cfg.get_u64_or("run", "n_paths", 100000);
    rs.n_samples = cfg.get_u64_or("run", "n_samples", 100000);
    if (cfg.has("run", "threshold")) rs.threshold = cfg.get_double("run", "threshold");
    if (cfg.has("run", "quantile")) {
        rs.quantile = cfg.get_double("run", "quantile");
        if (!(*rs.quantile > 0.0 && *rs.quantile < 1.0))
            throw ConfigError(cfg.source_name(), cfg.line_of("run", "quantile"),
                              "quantile must lie in (0,1)");
    }
    if (cfg.has("run", "quantiles")) {
        rs.quantile_ladder = cfg.get_list("run", "quantiles");
        for (double q : rs.quantile_ladder)
            if (!(q > 0.0 && q < 1.0))
                throw ConfigError(cfg.source_name(), cfg.line_of("run", "quantiles"),
                                  "quantile levels must lie in (0,1)");
        if (!std::is_sorted(rs.quantile_ladder.begin(), rs.quantile_ladder.end()))
            throw ConfigError(cfg.source_name(), cfg.line_of("run", "quantiles"),
                              "quantile levels must ascend");
    } else {
        rs.quantile_ladder = {0.99, 0.999, 0.9999};
    }
    rs.indicator = cfg.get_string_or("run", "indicator", "tail");
    rs.j_max = cfg.get_u64_or("run", "j_max", 5);
    rs.out_dir = out_override ? *out_override : cfg.get_string_or("run", "out", "out");
    return rs;
}

} // namespace snrisk
