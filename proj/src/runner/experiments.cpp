#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "fbme/bounds.hpp"
#include "fbme/errors.hpp"
#include "fbme/gaussian.hpp"
#include "fbme/runner.hpp"
#include "json.hpp"

namespace fbme {

using nlohmann::json;

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

void write_tree_dump(int depth, std::ostream& os) {
    for (int N = 1; N <= depth; ++N)
        for (const auto& b : tree_level(N)) os << "{\"N\":" << N << ",\"branch\":" << branch_json(b) << "}\n";
}

namespace {

class Outputs {
public:
    explicit Outputs(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

    void write(const std::string& name, const std::string& content) {
        std::ofstream f(dir_ / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
        f << content;
        hashes_[name] = sha256_hex(content);
    }

    void finish(const RunnerConfig& cfg) {
        json m;
        m["tool"] = "fbm-euler";
        m["version"] = "0.1.0";
        m["kind"] = cfg.kind;
        m["seed"] = cfg.seed;
        m["seeds"] = cfg.seed_count;
        m["config"] = cfg.raw;
        m["outputs"] = json::object();
        for (const auto& [name, h] : hashes_) m["outputs"][name] = {{"sha256", h}};
        write("manifest.json", m.dump(2) + "\n");
    }

private:
    std::filesystem::path dir_;
    std::map<std::string, std::string> hashes_;
};

class Csv {
public:
    explicit Csv(const std::vector<std::string>& header) {
        os_ << std::setprecision(17);
        for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
        os_ << '\n';
    }
    template <class... Ts>
    void row(const Ts&... vals) {
        std::size_t i = 0;
        ((os_ << (i++ ? "," : "") << vals), ...);
        os_ << '\n';
    }
    std::ostringstream& raw() { return os_; }
    std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
};

double p_of(const RunnerConfig& c) { return c.p > 0.0 ? c.p : HurstParams::with_default_p(c.hurst).p; }

SchemeConfig scheme_of(const RunnerConfig& c, std::size_t n) {
    SchemeConfig s;
    s.vf = make_bank(c.bank, c.m, c.d, c.bank_scale);
    s.hp = HurstParams(c.hurst, p_of(c));
    s.grid = Grid(n, c.horizon);
    s.y0 = c.initial;
    return s;
}

std::vector<std::uint64_t> seeds_of(const RunnerConfig& c) {
    std::vector<std::uint64_t> s;
    for (std::size_t i = 0; i < c.seed_count; ++i) s.push_back(c.seed + i);
    return s;
}

void run_simulate(const RunnerConfig& c, Outputs& out) {
    SchemeConfig cfg = scheme_of(c, c.steps);
    auto seeds = seeds_of(c);
    std::vector<GridPath> paths(seeds.size());
    parallel_for(seeds.size(), c.threads, [&](std::size_t i) {
        paths[i] = euler_run(cfg, sample_fbm(cfg.grid, c.hurst, c.d, seeds[i]));
    });
    std::vector<std::string> head{"seed", "k", "t"};
    for (std::size_t i = 0; i < c.m; ++i) head.push_back("y" + std::to_string(i));
    Csv csv(head);
    std::vector<double> mean(c.m, 0.0);
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        for (std::size_t k = 0; k <= cfg.grid.n; ++k) {
            csv.raw() << seeds[s] << ',' << k << ',' << cfg.grid.time(k);
            for (std::size_t i = 0; i < c.m; ++i) csv.raw() << ',' << paths[s](k, i);
            csv.raw() << '\n';
        }
        for (std::size_t i = 0; i < c.m; ++i) mean[i] += paths[s](cfg.grid.n, i) / static_cast<double>(seeds.size());
    }
    out.write("results.csv", csv.str());
    out.write("summary.json", json{{"kind", c.kind}, {"steps", c.steps}, {"seeds", seeds.size()}, {"mean_terminal", mean}}
                                  .dump(2) + "\n");
}

void run_converge(const RunnerConfig& c, Outputs& out) {
    SchemeConfig cfg = scheme_of(c, c.levels.back());
    auto rep = coupled_refinement_errors(cfg, c.levels, seeds_of(c), c.threads);
    Csv csv({"n", "rms_vs_finest", "rms_consecutive"});
    for (std::size_t l = 0; l < rep.levels.size(); ++l) {
        if (l < rep.rms_consecutive.size())
            csv.row(rep.levels[l], rep.rms_vs_finest[l], rep.rms_consecutive[l]);
        else
            csv.row(rep.levels[l], rep.rms_vs_finest[l], "");
    }
    out.write("results.csv", csv.str());
    const double target = 2.0 * c.hurst - 0.5;
    out.write("summary.json", json{{"kind", c.kind},
                                   {"hurst", c.hurst},
                                   {"seeds", rep.seeds},
                                   {"rate", rep.rate},
                                   {"rate_stderr", rep.rate_stderr},
                                   {"target_rate", target},
                                   {"within_0_10", std::abs(rep.rate - target) <= 0.10}}
                                  .dump(2) + "\n");
}

void run_malliavin(const RunnerConfig& c, Outputs& out) {
    SchemeConfig cfg = scheme_of(c, c.steps);
    auto seeds = seeds_of(c);
    std::vector<std::vector<std::pair<double, double>>> dev(seeds.size());
    parallel_for(seeds.size(), c.threads, [&](std::size_t s) {
        GridPath x = sample_fbm(cfg.grid, c.hurst, c.d, seeds[s]);
        GridPath y = euler_run(cfg, x);
        GridPath h = cameron_martin_direction(cfg.grid, c.anchor, c.hurst, c.weights);
        auto z = directional_derivative_run(c.order, cfg, y, x, h);
        for (int L = 1; L <= c.order; ++L) {
            GridPath fd = fd_oracle(L, cfg, x, h, c.eps);
            double worst = 0.0, scale = 0.0;
            for (std::size_t k = 0; k <= cfg.grid.n; ++k)
                for (std::size_t i = 0; i < c.m; ++i) {
                    worst = std::max(worst, std::abs(z[static_cast<std::size_t>(L)](k, i) - fd(k, i)));
                    scale = std::max(scale, std::abs(z[static_cast<std::size_t>(L)](k, i)));
                }
            dev[s].push_back({worst, scale});
        }
    });
    Csv csv({"seed", "order", "max_abs_dev", "max_abs_derivative"});
    double worst = 0.0;
    for (std::size_t s = 0; s < seeds.size(); ++s)
        for (int L = 1; L <= c.order; ++L) {
            auto [d, sc] = dev[s][static_cast<std::size_t>(L - 1)];
            csv.row(seeds[s], L, d, sc);
            worst = std::max(worst, d);
        }
    out.write("results.csv", csv.str());
    out.write("summary.json", json{{"kind", c.kind}, {"order", c.order}, {"eps", c.eps}, {"max_abs_dev", worst}}
                                  .dump(2) + "\n");
}

json ledger_json(const ConstantLedger& g) {
    return json{{"N", g.N},   {"p", g.p},   {"mu", g.mu},   {"C0", g.C0}, {"Kmu", g.Kmu}, {"C1", g.C1},
                {"C2", g.C2}, {"C3", g.C3}, {"C4", g.C4},   {"C5", g.C5}, {"C6", g.C6},   {"C7", g.C7},
                {"C8", g.C8}, {"K1", g.K1}, {"K2", g.K2},   {"K3", g.K3}, {"K4", g.K4},   {"alpha_root", g.alpha_root},
                {"alpha", g.alpha}};
}

void run_ledger(const RunnerConfig& c, Outputs& out) {
    SchemeConfig cfg = scheme_of(c, c.steps);
    ConstantLedger g = build_ledger(cfg.vf, c.order, p_of(c));
    Csv csv({"L", "C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "K1", "K2", "K3", "K4"});
    for (int L = 0; L <= g.N; ++L) {
        auto l = static_cast<std::size_t>(L);
        csv.row(L, g.C1[l], g.C2[l], g.C3[l], g.C4[l], g.C5[l], g.C6[l], g.C7[l], g.C8[l], g.K1[l], g.K2[l], g.K3[l],
                g.K4[l]);
    }
    out.write("results.csv", csv.str());
    out.write("summary.json", json{{"kind", c.kind}, {"bank", c.bank}, {"ledger", ledger_json(g)}}.dump(2) + "\n");
}

void run_bound(const RunnerConfig& c, Outputs& out) {
    const std::size_t finest = c.levels.back();
    SchemeConfig base = scheme_of(c, finest);
    const double p = p_of(c);
    ConstantLedger g = build_ledger(base.vf, c.order, p);
    const double alpha = c.alpha == "ledger" ? g.alpha : std::stod(c.alpha);
    auto seeds = seeds_of(c);
    std::vector<std::vector<BoundReport>> reps(seeds.size());
    parallel_for(seeds.size(), c.threads, [&](std::size_t s) {
        GridPath xf = sample_fbm(base.grid, c.hurst, c.d, seeds[s]);
        GridPath bf = sample_fbm(base.grid, c.hurst, c.d, companion_seed(seeds[s]));
        for (std::size_t n : c.levels) {
            SchemeConfig cfg = scheme_of(c, n);
            GridPath x = xf.restrict_to(n), b = bf.restrict_to(n);
            GridPath y = euler_run(cfg, x);
            XiProcess xi = xi_run(c.order, cfg, y, x, b);
            LiftedNoise noise = lift_noise(x, b, c.hurst, 0);
            ControlOmega om(noise, p);
            GreedyPartition part = greedy_partition(om, alpha);
            reps[s].push_back(bound_check(c.order, xi, noise, part, om, g, c.K, cfg));
        }
    });
    Csv csv({"seed", "n", "lhs", "log_rhs_over_K", "log_rho", "omega_total", "intervals", "s0", "s1", "s2", "log_M0",
             "log_M1", "log_M2", "pairs_checked", "max_defect_ratio", "K2", "max_increment_ratio", "K1",
             "delta_small_enough"});
    std::vector<double> mean_log_rho(c.levels.size(), 0.0);
    bool defects_ok = true;
    std::size_t pairs = 0;
    for (std::size_t s = 0; s < seeds.size(); ++s)
        for (std::size_t l = 0; l < c.levels.size(); ++l) {
            const auto& r = reps[s][l];
            csv.row(seeds[s], c.levels[l], r.lhs, r.log_rhs_over_K, r.log_rho, r.omega_total, r.intervals, r.s0, r.s1,
                    r.s2, r.M.log_M0, r.M.log_M1, r.M.log_M2, r.pairs_checked, r.max_defect_ratio, r.K2,
                    r.max_increment_ratio, r.K1, r.delta_small_enough ? 1 : 0);
            mean_log_rho[l] += r.log_rho / static_cast<double>(seeds.size());
            defects_ok = defects_ok && r.defect_ok;
            pairs += r.pairs_checked;
        }
    out.write("results.csv", csv.str());
    const auto [lo, hi] = std::minmax_element(mean_log_rho.begin(), mean_log_rho.end());
    out.write("summary.json", json{{"kind", c.kind},
                                   {"order", c.order},
                                   {"alpha", alpha},
                                   {"K", c.K},
                                   {"ledger", ledger_json(g)},
                                   {"levels", c.levels},
                                   {"mean_log_rho", mean_log_rho},
                                   {"rho_spread", std::exp(*hi - *lo)},
                                   {"defect_pairs_checked", pairs},
                                   {"defects_within_K2", defects_ok}}
                                  .dump(2) + "\n");
}

void run_tree(const RunnerConfig& c, Outputs& out) {
    Csv csv({"N", "index", "labels", "ell", "alpha", "coeff"});
    std::vector<std::size_t> counts;
    for (int N = 1; N <= c.depth; ++N) {
        const auto& lvl = tree_level(N);
        counts.push_back(lvl.size());
        for (std::size_t i = 0; i < lvl.size(); ++i) {
            auto join = [](const std::vector<int>& v) {
                std::string s;
                for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " " : "") + std::to_string(v[k]);
                return s;
            };
            csv.row(N, i, join(lvl[i].labels), join(lvl[i].stats.ell), lvl[i].stats.alpha,
                    std::to_string(lvl[i].lemma_coeff.num) + "/" + std::to_string(lvl[i].lemma_coeff.den));
        }
    }
    out.write("results.csv", csv.str());
    out.write("summary.json", json{{"kind", c.kind}, {"depth", c.depth}, {"counts", counts}}.dump(2) + "\n");
}

}  // namespace

int run_experiment(const RunnerConfig& c, std::ostream& log) {
    try {
        Outputs out(c.out_dir);
        if (c.kind == "simulate") run_simulate(c, out);
        else if (c.kind == "converge") run_converge(c, out);
        else if (c.kind == "malliavin-check") run_malliavin(c, out);
        else if (c.kind == "bound-check") run_bound(c, out);
        else if (c.kind == "tree-dump") run_tree(c, out);
        else run_ledger(c, out);
        out.finish(c);
        log << c.kind << ": wrote " << c.out_dir << "\n";
        return kExitOk;
    } catch (const OverflowError& e) {
        log << "overflow: " << e.what() << "\n";
        return kExitOverflow;
    } catch (const ConfigError& e) {
        log << "invalid config: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const CapabilityError& e) {
        log << "invalid config: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const DomainError& e) {
        log << "invalid config: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace fbme
