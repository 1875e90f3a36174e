#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbme {

// Invalid configuration; `field()` names the offending key as section.key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& msg)
        : std::runtime_error(field + ": " + msg), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct RunnerConfig {
    // [experiment]
    std::string kind = "simulate";
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    std::size_t seed_count = 1;
    int threads = 1;
    // [model]
    double hurst = 0.4;
    double p = 0.0;  // 0: halfway between 1/H and 3
    double horizon = 1.0;
    std::size_t steps = 256;
    std::vector<std::size_t> levels;
    std::string bank = "sincos-m2d2";
    double bank_scale = 1.0;
    std::size_t m = 2, d = 2;
    std::vector<double> initial;
    // [derivative]
    int order = 2;
    double anchor = 0.5;
    std::vector<double> weights;
    double eps = 1e-4;
    // [bound]
    double K = 1.0;
    std::string alpha = "ledger";
    // [tree]
    int depth = 4;

    std::map<std::string, std::string> raw;  // every key as read, after overrides
};

constexpr const char* kEnvPrefix = "FBME_";

// Reads an INI-style file (sections of key = value). Environment variables
// FBME_<SECTION>_<KEY> override file values; `overrides` (section.key -> value) win over both.
RunnerConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides = {});
RunnerConfig parse_config(const std::map<std::string, std::string>& kv);
std::vector<std::string> known_keys();

enum ExitCode { kExitOk = 0, kExitFailure = 1, kExitBadConfig = 2, kExitOverflow = 3 };

// Runs the configured experiment and writes manifest.json, results.csv, summary.json
// into cfg.out_dir. Returns an exit code; diagnostics go to `log`.
int run_experiment(const RunnerConfig& cfg, std::ostream& log);

void write_tree_dump(int depth, std::ostream& os);
std::string sha256_hex(const std::string& bytes);

}  // namespace fbme
