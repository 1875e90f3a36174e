#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fbme/runner.hpp"
#include "fbme/smooth_map.hpp"
#include "fbme/trees.hpp"

namespace fbme {

namespace {

const std::vector<std::string>& keys() {
    static const std::vector<std::string> k = {
        "experiment.kind",   "experiment.output",  "experiment.seed",     "experiment.seeds",
        "experiment.threads", "model.hurst",       "model.p",             "model.horizon",
        "model.steps",       "model.levels",       "model.bank",          "model.bank_scale",
        "model.m",           "model.d",            "model.initial",       "derivative.order",
        "derivative.anchor", "derivative.weights", "derivative.eps",      "bound.K",
        "bound.alpha",       "tree.depth"};
    return k;
}

std::string env_name(const std::string& key) {
    std::string out = kEnvPrefix;
    for (char c : key) out += (c == '.') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

double to_double(const std::string& field, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size() || !std::isfinite(x)) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(field, "expected a number, got '" + v + "'");
    }
}

long long to_int(const std::string& field, const std::string& v) {
    try {
        std::size_t pos = 0;
        long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(field, "expected an integer, got '" + v + "'");
    }
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

bool power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

std::vector<std::string> known_keys() { return keys(); }

RunnerConfig parse_config(const std::map<std::string, std::string>& kv) {
    for (const auto& [k, v] : kv)
        if (std::find(keys().begin(), keys().end(), k) == keys().end()) throw ConfigError(k, "unknown key");

    RunnerConfig c;
    c.raw = kv;
    auto get = [&](const std::string& k) -> const std::string* {
        auto it = kv.find(k);
        return it == kv.end() ? nullptr : &it->second;
    };
    auto positive_int = [&](const std::string& k, long long lo) {
        long long x = to_int(k, *get(k));
        if (x < lo) throw ConfigError(k, "must be at least " + std::to_string(lo));
        return x;
    };

    if (auto v = get("experiment.kind")) c.kind = *v;
    static const std::vector<std::string> kinds = {"simulate", "converge", "malliavin-check", "bound-check",
                                                   "tree-dump", "ledger-dump"};
    if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end())
        throw ConfigError("experiment.kind", "unknown kind '" + c.kind + "'");
    if (auto v = get("experiment.output")) c.out_dir = *v;
    if (get("experiment.seed")) c.seed = static_cast<std::uint64_t>(positive_int("experiment.seed", 0));
    if (get("experiment.seeds")) c.seed_count = static_cast<std::size_t>(positive_int("experiment.seeds", 1));
    if (get("experiment.threads")) c.threads = static_cast<int>(positive_int("experiment.threads", 1));

    if (auto v = get("model.hurst")) c.hurst = to_double("model.hurst", *v);
    if (!(c.hurst > 1.0 / 3.0 && c.hurst <= 0.5)) throw ConfigError("model.hurst", "must lie in (1/3, 1/2]");
    if (auto v = get("model.p")) {
        c.p = to_double("model.p", *v);
        if (!(c.p > 1.0 / c.hurst && c.p < 3.0)) throw ConfigError("model.p", "must lie in (1/H, 3)");
    }
    if (auto v = get("model.horizon")) c.horizon = to_double("model.horizon", *v);
    if (!(c.horizon > 0.0)) throw ConfigError("model.horizon", "must be positive");
    if (get("model.steps")) c.steps = static_cast<std::size_t>(positive_int("model.steps", 1));
    if (auto v = get("model.levels")) {
        for (const auto& s : split_list(*v)) {
            long long x = to_int("model.levels", s);
            if (x < 1 || !power_of_two(static_cast<std::size_t>(x)))
                throw ConfigError("model.levels", "levels must be powers of two");
            c.levels.push_back(static_cast<std::size_t>(x));
        }
        if (!std::is_sorted(c.levels.begin(), c.levels.end()) ||
            std::adjacent_find(c.levels.begin(), c.levels.end()) != c.levels.end())
            throw ConfigError("model.levels", "levels must be strictly increasing");
    }
    if (c.steps > 8192) throw ConfigError("model.steps", "at most 8192 steps");
    if (!c.levels.empty() && c.levels.back() > 8192) throw ConfigError("model.levels", "at most 8192 steps");
    if (auto v = get("model.bank")) c.bank = *v;
    {
        auto names = bank_names();
        if (std::find(names.begin(), names.end(), c.bank) == names.end())
            throw ConfigError("model.bank", "unknown bank '" + c.bank + "'");
    }
    if (auto v = get("model.bank_scale")) c.bank_scale = to_double("model.bank_scale", *v);
    if (get("model.m")) c.m = static_cast<std::size_t>(positive_int("model.m", 1));
    if (get("model.d")) c.d = static_cast<std::size_t>(positive_int("model.d", 1));
    if (c.bank == "sincos-m2d2" && (c.m != 2 || c.d != 2)) throw ConfigError("model.bank", "sincos-m2d2 needs m = d = 2");
    if (auto v = get("model.initial")) {
        for (const auto& s : split_list(*v)) c.initial.push_back(to_double("model.initial", s));
        if (c.initial.size() != c.m) throw ConfigError("model.initial", "needs exactly m values");
    }
    if (c.initial.empty()) c.initial.assign(c.m, 0.0);

    if (get("derivative.order")) c.order = static_cast<int>(positive_int("derivative.order", 1));
    if (c.order > kMaxTreeDepth) throw ConfigError("derivative.order", "at most 8");
    if (c.kind == "malliavin-check" && c.order > 2) throw ConfigError("derivative.order", "malliavin-check supports 1 or 2");
    if (auto v = get("derivative.anchor")) c.anchor = to_double("derivative.anchor", *v);
    if (!(c.anchor >= 0.0 && c.anchor <= c.horizon)) throw ConfigError("derivative.anchor", "must lie in [0, T]");
    if (auto v = get("derivative.weights")) {
        for (const auto& s : split_list(*v)) c.weights.push_back(to_double("derivative.weights", s));
        if (c.weights.size() != c.d) throw ConfigError("derivative.weights", "needs exactly d values");
    }
    if (c.weights.empty()) c.weights.assign(c.d, 1.0);
    if (auto v = get("derivative.eps")) c.eps = to_double("derivative.eps", *v);
    if (!(c.eps > 0.0)) throw ConfigError("derivative.eps", "must be positive");

    if (auto v = get("bound.K")) c.K = to_double("bound.K", *v);
    if (!(c.K > 0.0)) throw ConfigError("bound.K", "must be positive");
    if (auto v = get("bound.alpha")) {
        c.alpha = *v;
        if (c.alpha != "ledger" && !(to_double("bound.alpha", c.alpha) > 0.0))
            throw ConfigError("bound.alpha", "must be 'ledger' or a positive number");
    }
    if (get("tree.depth")) c.depth = static_cast<int>(positive_int("tree.depth", 1));
    if (c.depth > kMaxTreeDepth) throw ConfigError("tree.depth", "at most 8");

    if ((c.kind == "converge" || c.kind == "bound-check") && c.levels.size() < (c.kind == "converge" ? 3u : 1u))
        throw ConfigError("model.levels", c.kind == "converge" ? "needs at least three levels" : "needs at least one level");
    if ((c.kind == "ledger-dump" || c.kind == "bound-check") && c.p == 0.0 && 0.5 * (1.0 / c.hurst + 3.0) >= 3.0)
        throw ConfigError("model.p", "default p is not below 3");
    return c;
}

RunnerConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides) {
    std::map<std::string, std::string> kv;
    if (!path.empty()) {
        boost::property_tree::ptree tree;
        try {
            boost::property_tree::read_ini(path, tree);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw ConfigError("config", e.what());
        }
        for (const auto& [section, body] : tree) {
            if (body.empty()) throw ConfigError(section, "keys must sit inside a [section]");
            for (const auto& [key, val] : body) kv[section + "." + key] = val.get_value<std::string>();
        }
    }
    for (const auto& k : keys())
        if (const char* e = std::getenv(env_name(k).c_str())) kv[k] = e;
    for (const auto& [k, v] : overrides) kv[k] = v;
    return parse_config(kv);
}

}  // namespace fbme
