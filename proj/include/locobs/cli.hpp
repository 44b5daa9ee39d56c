#pragma once

// Subcommands behind the `locobs` executable. Each takes the parsed flags,
// reads one JSON config document, writes its reports into the output
// directory and returns the process exit status:
//   0 success, 1 numerical or dimension-guard failure, 2 invalid config.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "locobs/checks.hpp"
#include "locobs/condexp.hpp"
#include "locobs/defect.hpp"
#include "locobs/experiments.hpp"
#include "locobs/io.hpp"
#include "locobs/parallel.hpp"
#include "locobs/quasilocal.hpp"

namespace locobs::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitConfig = 2;

struct RunOptions {
    std::optional<fs::path> config;
    std::optional<fs::path> out;
    std::optional<std::uint64_t> seed;  ///< overrides the config's "seed"
    unsigned workers = default_workers();
};

/// Non-finite or otherwise unusable numerical result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// config access

inline Json load_config(const RunOptions& opt, bool required = true) {
    if (!opt.config) {
        if (required) throw ConfigError("flag '--config': a config file is required");
        return Json::object();
    }
    std::ifstream in(*opt.config);
    if (!in) throw ConfigError("flag '--config': cannot open " + opt.config->string());
    try {
        Json j = Json::parse(in);
        if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
        return j;
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
}

inline const Json& require(const Json& j, const std::string& key, const std::string& path = "") {
    if (!j.is_object() || !j.contains(key)) throw ConfigError("field '" + path + key + "': missing");
    return j.at(key);
}

inline std::int64_t get_int(const Json& j, const std::string& key, std::int64_t min, const std::string& path = "") {
    const Json& v = require(j, key, path);
    if (!v.is_number_integer()) throw ConfigError("field '" + path + key + "': expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < min) throw ConfigError("field '" + path + key + "': must be at least " + std::to_string(min));
    return x;
}

inline std::int64_t get_int_or(const Json& j, const std::string& key, std::int64_t fallback, std::int64_t min,
                               const std::string& path = "") {
    return j.contains(key) ? get_int(j, key, min, path) : fallback;
}

inline double get_positive_or(const Json& j, const std::string& key, double fallback, const std::string& path = "") {
    if (!j.contains(key)) return fallback;
    const Json& v = j.at(key);
    if (!v.is_number() || !(v.get<double>() > 0.0) || !std::isfinite(v.get<double>()))
        throw ConfigError("field '" + path + key + "': expected a positive number");
    return v.get<double>();
}

inline std::uint64_t get_seed(const Json& j, const RunOptions& opt, std::uint64_t fallback = 0) {
    if (opt.seed) return *opt.seed;
    if (!j.contains("seed")) return fallback;
    const Json& v = j.at("seed");
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigError("field 'seed': expected a non-negative integer");
}

inline OptimizerConfig parse_optimizer(const Json& root, std::uint64_t seed) {
    OptimizerConfig c;
    c.seed = RngSeed{seed};
    if (!root.contains("optimizer")) return c;
    const Json& j = root.at("optimizer");
    if (!j.is_object()) throw ConfigError("field 'optimizer': expected an object");
    const std::string p = "optimizer.";
    c.restarts = static_cast<int>(get_int_or(j, "restarts", c.restarts, 1, p));
    c.max_iters = static_cast<int>(get_int_or(j, "max_iters", c.max_iters, 1, p));
    c.step_init = get_positive_or(j, "step_init", c.step_init, p);
    c.grad_tol = get_positive_or(j, "grad_tol", c.grad_tol, p);
    return c;
}

// ---------------------------------------------------------------------------
// output

inline fs::path out_dir(const RunOptions& opt) {
    fs::path dir = opt.out.value_or(fs::path("."));
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("flag '--out': cannot create " + dir.string());
    return dir;
}

/// Writes every file under a temporary name and renames them only after all
/// writes succeeded; nothing is left behind on failure.
class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
    OutputSet(const OutputSet&) = delete;
    OutputSet& operator=(const OutputSet&) = delete;

    ~OutputSet() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& [tmp, final_path] : files_) fs::remove(tmp, ec);
    }

    void add(const std::string& name, const std::string& content) {
        const fs::path final_path = dir_ / name;
        const fs::path tmp = dir_ / (name + ".partial");
        files_.emplace_back(tmp, final_path);
        std::ofstream f(tmp, std::ios::binary);
        f << content;
        if (!f) throw NumericalError("cannot write " + tmp.string());
    }

    void commit() {
        for (const auto& [tmp, final_path] : files_) fs::rename(tmp, final_path);
        committed_ = true;
    }

private:
    fs::path dir_;
    std::vector<std::pair<fs::path, fs::path>> files_;
    bool committed_ = false;
};

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DimensionGuardError& e) {
        err << "dimension guard: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const DimensionError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const PreconditionError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

// ---------------------------------------------------------------------------
// defect

/// Operator spec: {"kind": "matrix", "matrix": [...]}, {"kind": "file", "path": ...},
/// {"kind": "swap"}, {"kind": "ginibre"}, {"kind": "embedded"} (A' (x) 1 with
/// Ginibre A'), {"kind": "identity"}.
inline BipartiteOperator parse_bipartite_operator(const Json& spec, Index d1, Index d2, RngSeed seed,
                                                  const fs::path& base_dir) {
    if (!spec.is_object()) throw ConfigError("field 'operator': expected an object");
    const Json& kind_j = require(spec, "kind", "operator.");
    if (!kind_j.is_string()) throw ConfigError("field 'operator.kind': expected a string");
    const std::string kind = kind_j.get<std::string>();
    const Index n = d1 * d2;
    Matrix m;
    if (kind == "matrix") {
        m = matrix_from_json(require(spec, "matrix", "operator."), "operator.matrix");
    } else if (kind == "file") {
        const Json& p = require(spec, "path", "operator.");
        if (!p.is_string()) throw ConfigError("field 'operator.path': expected a string");
        fs::path path = p.get<std::string>();
        if (path.is_relative()) path = base_dir / path;
        std::ifstream in(path);
        if (!in) throw ConfigError("field 'operator.path': cannot open " + path.string());
        Json doc;
        try {
            doc = Json::parse(in);
        } catch (const Json::parse_error& e) {
            throw ConfigError(std::string("field 'operator.path': invalid JSON: ") + e.what());
        }
        m = matrix_from_json(doc.is_object() ? require(doc, "matrix", "operator.path:") : doc, "operator.path");
    } else if (kind == "swap") {
        if (d1 != d2) throw ConfigError("field 'operator.kind': swap requires d1 == d2");
        m = detail::swap_operator(d1);
    } else if (kind == "ginibre") {
        m = ginibre(n, n, seed);
    } else if (kind == "embedded") {
        m = embed_left(ginibre(d1, d1, seed), d2).matrix();
    } else if (kind == "identity") {
        m = Matrix::Identity(n, n);
    } else {
        throw ConfigError("field 'operator.kind': unknown kind '" + kind + "'");
    }
    if (m.rows() != n || m.cols() != n)
        throw ConfigError("field 'operator': matrix is " + shape_str(m) + " but d1*d2 = " + std::to_string(n));
    return BipartiteOperator(std::move(m), d1, d2);
}

inline int cmd_defect(const RunOptions& opt, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    return guarded(err, [&] {
        const Json cfg = load_config(opt);
        const Index d1 = get_int(cfg, "d1", 1);
        const Index d2 = get_int(cfg, "d2", 1);
        const std::uint64_t seed = get_seed(cfg, opt);
        const fs::path base = opt.config->parent_path();
        const BipartiteOperator a = parse_bipartite_operator(require(cfg, "operator"), d1, d2, RngSeed{seed}, base);
        const OptimizerConfig oc = parse_optimizer(cfg, seed);
        if (!(op_norm(a.matrix()) > 0.0)) throw ConfigError("field 'operator': zero operator has no defect");

        const DefectEstimate est = defect_lower_bound(a, oc, opt.workers);
        if (!std::isfinite(est.value) || !est.witness.allFinite())
            throw NumericalError("defect optimizer produced non-finite values");

        Json rec = to_json(est);
        rec["operator_norm"] = op_norm(a.matrix());
        OutputSet files(out_dir(opt));
        files.add("defect.json", rec.dump(2) + "\n");
        files.commit();
        log << "defect value " << format_double(est.value) << " (epsilon " << format_double(est.value / op_norm(a.matrix()))
            << ")\n";
        return kExitOk;
    });
}

// ---------------------------------------------------------------------------
// factor2

inline int cmd_factor2(const RunOptions& opt, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    return guarded(err, [&] {
        const Json cfg = load_config(opt);
        const Index d1 = get_int(cfg, "d1", 2);
        const Index d2 = get_int(cfg, "d2", 2);
        const std::int64_t n_trials = get_int(cfg, "n_trials", 1);
        if (!cfg.contains("seed") && !opt.seed) throw ConfigError("field 'seed': missing");
        const std::uint64_t seed = get_seed(cfg, opt);
        const OptimizerConfig oc = parse_optimizer(cfg, seed);
        const fs::path dir = out_dir(opt);

        const CampaignReport rep = factor2_campaign(d1, d2, n_trials, RngSeed{seed}, oc, opt.workers);
        std::ostringstream csv;
        csv << kTrialCsvHeader << '\n';
        for (const auto& t : rep.trials) {
            if (!std::isfinite(t.delta) || !std::isfinite(t.best_gap))
                throw NumericalError("trial " + std::to_string(t.trial_id) + " produced non-finite values");
            csv << trial_csv_row(t) << '\n';
        }
        OutputSet files(dir);
        files.add("factor2_trials.csv", csv.str());
        files.add("factor2_summary.json", to_json(rep).dump(2) + "\n");
        files.commit();
        log << "factor2 " << d1 << "x" << d2 << ": " << rep.n_success << "/" << rep.n_trials
            << " trials found U with gap >= delta; ratio min " << format_double(rep.min_ratio) << " median "
            << format_double(rep.median_ratio) << " max " << format_double(rep.max_ratio) << " ("
            << std::fixed << std::setprecision(1) << rep.wall_seconds << " s)\n";
        log.unsetf(std::ios::fixed);
        return kExitOk;
    });
}

// ---------------------------------------------------------------------------
// chain

struct ChainRun {
    LatticeSystem sys;
    Matrix observable;  ///< full-chain operator before evolution
    ChainHamiltonian hamiltonian;
    double t = 0.0;
    std::size_t center = 0;
    std::vector<std::size_t> radii;
};

inline DensityMatrix parse_state(const Json& j, Index d, const std::string& field) {
    std::string kind;
    if (j.is_string())
        kind = j.get<std::string>();
    else if (j.is_object() && j.contains("kind") && j.at("kind").is_string())
        kind = j.at("kind").get<std::string>();
    else
        throw ConfigError("field '" + field + "': expected a state spec");
    if (kind == "maximally_mixed") return DensityMatrix::maximally_mixed(d);
    if (kind == "pure_basis") {
        const std::int64_t k = j.is_object() ? get_int_or(j, "k", 0, 0, field + ".") : 0;
        if (k >= d) throw ConfigError("field '" + field + ".k': basis index out of range");
        return DensityMatrix::pure_basis(d, k);
    }
    if (kind == "matrix") {
        const Matrix m = matrix_from_json(require(j, "matrix", field + "."), field + ".matrix");
        if (m.rows() != d || m.cols() != d) throw ConfigError("field '" + field + ".matrix': wrong dimension");
        try {
            return DensityMatrix(m);
        } catch (const std::exception& e) {
            throw ConfigError("field '" + field + ".matrix': " + e.what());
        }
    }
    throw ConfigError("field '" + field + "': unknown state kind '" + kind + "'");
}

inline Matrix pauli(const std::string& axis, const std::string& field) {
    Matrix p(2, 2);
    if (axis == "x") p << 0, 1, 1, 0;
    else if (axis == "y") p << 0, Complex(0, -1), Complex(0, 1), 0;
    else if (axis == "z") p << 1, 0, 0, -1;
    else throw ConfigError("field '" + field + "': axis must be x, y or z");
    return p;
}

inline ChainRun parse_chain(const Json& cfg) {
    const Json& sites = require(cfg, "sites");
    if (!sites.is_array() || sites.empty()) throw ConfigError("field 'sites': expected a non-empty array");
    std::vector<Index> dims;
    for (std::size_t x = 0; x < sites.size(); ++x) {
        if (!sites[x].is_number_integer() || sites[x].get<std::int64_t>() < 1)
            throw ConfigError("field 'sites[" + std::to_string(x) + "]': expected a positive integer");
        dims.push_back(sites[x].get<Index>());
    }

    std::vector<DensityMatrix> states;
    const Json states_j = cfg.value("states", Json("maximally_mixed"));
    if (states_j.is_array()) {
        if (states_j.size() != dims.size()) throw ConfigError("field 'states': one entry per site is required");
        for (std::size_t x = 0; x < dims.size(); ++x)
            states.push_back(parse_state(states_j[x], dims[x], "states[" + std::to_string(x) + "]"));
    } else {
        for (std::size_t x = 0; x < dims.size(); ++x) states.push_back(parse_state(states_j, dims[x], "states"));
    }
    LatticeSystem sys(dims, std::move(states));  // may throw DimensionGuardError

    const Json& obs = require(cfg, "observable");
    if (!obs.is_object()) throw ConfigError("field 'observable': expected an object");
    const Json& kind_j = require(obs, "kind", "observable.");
    const std::string kind = kind_j.is_string() ? kind_j.get<std::string>() : "";
    Matrix local;
    std::vector<std::size_t> support;
    if (kind == "pauli") {
        const auto site = static_cast<std::size_t>(get_int(obs, "site", 0, "observable."));
        if (site >= dims.size()) throw ConfigError("field 'observable.site': outside the chain");
        if (dims[site] != 2) throw ConfigError("field 'observable.site': Pauli observables need a qubit site");
        const Json& axis = require(obs, "axis", "observable.");
        if (!axis.is_string()) throw ConfigError("field 'observable.axis': expected a string");
        local = pauli(axis.get<std::string>(), "observable.axis");
        support = {site};
    } else if (kind == "matrix") {
        const Json& s = require(obs, "sites", "observable.");
        if (!s.is_array() || s.empty()) throw ConfigError("field 'observable.sites': expected a non-empty array");
        for (const Json& v : s) {
            if (!v.is_number_integer() || v.get<std::int64_t>() < 0 || v.get<std::size_t>() >= dims.size())
                throw ConfigError("field 'observable.sites': invalid site index");
            support.push_back(v.get<std::size_t>());
        }
        local = matrix_from_json(require(obs, "matrix", "observable."), "observable.matrix");
    } else {
        throw ConfigError("field 'observable.kind': expected 'pauli' or 'matrix'");
    }
    Region region;
    try {
        region = Region(support);
    } catch (const DimensionError& e) {
        throw ConfigError(std::string("field 'observable.sites': ") + e.what());
    }
    if (local.rows() != region_dim(region, sys) || local.cols() != local.rows())
        throw ConfigError("field 'observable.matrix': dimension does not match its sites");

    ChainRun run{std::move(sys), Matrix(), {}, 0.0, 0, {}};
    run.observable = embed_region(local, region, run.sys);

    const std::string ham = cfg.value("hamiltonian", std::string("heisenberg"));
    if (ham == "heisenberg") {
        try {
            run.hamiltonian = ChainHamiltonian::heisenberg(run.sys);
        } catch (const DimensionError& e) {
            throw ConfigError(std::string("field 'hamiltonian': ") + e.what());
        }
    } else if (ham != "none") {
        throw ConfigError("field 'hamiltonian': expected 'heisenberg' or 'none'");
    }

    if (cfg.contains("t")) {
        if (!cfg.at("t").is_number() || !std::isfinite(cfg.at("t").get<double>()))
            throw ConfigError("field 't': expected a finite number");
        run.t = cfg.at("t").get<double>();
    }
    run.center = static_cast<std::size_t>(get_int_or(cfg, "center", static_cast<std::int64_t>(support.front()), 0));
    if (run.center >= dims.size()) throw ConfigError("field 'center': outside the chain");

    if (cfg.contains("radii")) {
        const Json& r = cfg.at("radii");
        if (!r.is_array() || r.empty()) throw ConfigError("field 'radii': expected a non-empty array");
        for (const Json& v : r) {
            if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
                throw ConfigError("field 'radii': entries must be non-negative integers");
            run.radii.push_back(v.get<std::size_t>());
        }
        if (!std::is_sorted(run.radii.begin(), run.radii.end()))
            throw ConfigError("field 'radii': must be sorted ascending");
    } else {
        for (std::size_t r = 0; r < dims.size(); ++r) run.radii.push_back(r);
    }
    return run;
}

inline std::vector<CurvePoint> run_chain(const ChainRun& run) {
    const Matrix a = run.t == 0.0 ? run.observable : evolve(run.observable, run.hamiltonian, run.t, run.sys);
    return localization_curve(a, run.center, run.sys, run.radii);
}

inline int cmd_chain(const RunOptions& opt, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    return guarded(err, [&] {
        const Json cfg = load_config(opt);
        const ChainRun run = parse_chain(cfg);
        const auto curve = run_chain(run);
        std::ostringstream csv;
        csv << kCurveCsvHeader << '\n';
        for (const auto& p : curve) {
            if (!std::isfinite(p.error)) throw NumericalError("localization error is not finite");
            csv << p.radius << ',' << format_double(p.error) << '\n';
        }
        OutputSet files(out_dir(opt));
        files.add("chain_curve.csv", csv.str());
        files.commit();
        log << "chain of " << run.sys.size() << " sites, t = " << format_double(run.t) << ": " << curve.size()
            << " curve points\n";
        return kExitOk;
    });
}

// ---------------------------------------------------------------------------
// checks

inline std::string render_checks(const std::vector<CheckResult>& rows) {
    auto short_num = [](double x) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", x);
        return std::string(buf);
    };
    std::ostringstream os;
    os << std::left << std::setw(12) << "suite" << std::setw(30) << "check" << std::setw(18) << "kind" << std::setw(16)
       << "result" << "observed / tolerance\n";
    for (const auto& r : rows) {
        std::string result;
        if (r.kind == CheckKind::negative_control) result = r.passed ? "expected-neg" : "UNEXPECTED";
        else result = r.passed ? "pass" : (r.kind == CheckKind::hard ? "FAIL" : "soft-fail");
        os << std::left << std::setw(12) << r.suite << std::setw(30) << r.name << std::setw(18) << to_string(r.kind)
           << std::setw(16) << result << short_num(r.observed) << " / " << short_num(r.tolerance) << '\n';
    }
    return os.str();
}

inline int cmd_checks(const RunOptions& opt, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    return guarded(err, [&] {
        const Json cfg = load_config(opt, false);
        CheckOptions co;
        co.seed = RngSeed{get_seed(cfg, opt, co.seed.value)};
        co.instances = static_cast<int>(get_int_or(cfg, "instances", co.instances, 1));
        co.optimizer = parse_optimizer(cfg, co.seed.value);

        const auto rows = run_invariant_checks(co);
        log << render_checks(rows);
        const bool ok = hard_checks_pass(rows);
        log << (ok ? "all hard checks passed\n" : "hard check failure\n");

        if (opt.out) {
            Json arr = Json::array();
            for (const auto& r : rows)
                arr.push_back({{"suite", r.suite},
                               {"name", r.name},
                               {"kind", to_string(r.kind)},
                               {"passed", r.passed},
                               {"observed", r.observed},
                               {"tolerance", r.tolerance},
                               {"instances", r.instances}});
            OutputSet files(out_dir(opt));
            files.add("checks.json", Json{{"checks", arr}, {"hard_pass", ok}}.dump(2) + "\n");
            files.commit();
        }
        return ok ? kExitOk : kExitNumerical;
    });
}

} // namespace locobs::cli
