#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "smm/control.hpp"
#include "smm/csv.hpp"
#include "smm/estimator.hpp"
#include "smm/kernel.hpp"
#include "smm/lti.hpp"
#include "smm/rng.hpp"
#include "smm/signal_matrix.hpp"
#include "smm/stats.hpp"

namespace smm {

inline constexpr const char* kVersion = "0.1.0";

/// Every experiment this harness can run. Each id is a data table behind
/// one figure-style summary: impulse-response estimates with posterior
/// bands (fig1a noise-free, fig1b noisy, fig2 second benchmark system),
/// fit-metric distributions across estimators (fig3), closed-loop
/// trajectory bands (fig4), closed-loop cost distributions (fig5), cost
/// versus data length (fig6a), cost versus noise level (fig6b), best
/// regularization weight versus noise level (fig7), and per-step solve
/// time with/without data compression (fig8).
inline const std::vector<std::string>& experiment_ids() {
    static const std::vector<std::string> ids = {"fig1a", "fig1b", "fig2",  "fig3", "fig4",
                                                 "fig5",  "fig6a", "fig6b", "fig7", "fig8"};
    return ids;
}

struct ExperimentConfig {
    std::string experiment = "fig5";
    std::string system = "g1";  // g1 | g2 | csv:<path with num/den rows>
    Eigen::Index N = 200;       // offline data length
    Eigen::Index L0 = 4;        // past window
    Eigen::Index Lp = 11;       // prediction horizon / FIR length
    double sigma2 = 1.0;        // offline output-noise variance
    double sigma_p2 = 1.0;      // online measurement-noise variance
    Eigen::Index runs = 100;
    Eigen::Index steps = 60;  // closed-loop length
    std::uint64_t seed = 17;
    double q_weight = 1.0;
    double r_weight = 1.0;
    double lambda_y = 1000.0;
    double lambda_g = 100.0;                 // fixed weight where no grid search runs
    std::vector<double> lambda_g_grid;       // oracle search grid
    std::vector<double> noise_sweep;         // variance levels (sigma2 = sigma_p2)
    std::vector<Eigen::Index> N_sweep;       // data-length levels
    std::vector<double> alpha_grid, beta_grid;  // kernel hyperparameter grids
    bool known_past = true;                  // identification: past inputs available
    bool compress = false;                   // replace data with its 2L-column compression
    int workers = 1;
    std::string out_dir = "out";
};

inline std::vector<double> default_lambda_g_grid() {
    std::vector<double> g(9);
    for (int k = 0; k < 9; ++k) g[static_cast<std::size_t>(k)] = std::pow(10.0, 1.0 + 0.25 * k);
    return g;
}

/// Baseline configuration for an experiment id.
inline ExperimentConfig experiment_defaults(const std::string& id) {
    ExperimentConfig c;
    c.experiment = id;
    c.lambda_g_grid = default_lambda_g_grid();
    c.noise_sweep = {0.03, 0.1, 0.3, 1.0, 3.0};
    c.alpha_grid = default_alpha_grid();
    c.beta_grid = default_beta_grid();
    if (id == "fig1a") {
        c.system = "g1";
        c.N = 50;
        c.Lp = 11;
        c.sigma2 = 0.0;
        c.sigma_p2 = 0.0;
        c.runs = 1;
    } else if (id == "fig1b") {
        c.system = "g1";
        c.N = 50;
        c.Lp = 11;
        c.sigma2 = 0.01;
        c.sigma_p2 = 0.0;
        c.runs = 1;
    } else if (id == "fig2") {
        c.system = "g2";
        c.N = 50;
        c.Lp = 11;
        c.sigma2 = 0.01;
        c.sigma_p2 = 0.0;
        c.runs = 1;
        c.known_past = false;
    } else if (id == "fig3") {
        c.N = 50;
        c.Lp = 11;
        c.sigma2 = 0.01;
        c.sigma_p2 = 0.0;
        c.runs = 100;
    } else if (id == "fig4" || id == "fig5") {
        // defaults already match the closed-loop task
    } else if (id == "fig6a") {
        c.N_sweep = {50, 100, 200, 400, 800};
        c.compress = true;
    } else if (id == "fig6b" || id == "fig7") {
        c.compress = true;
    } else if (id == "fig8") {
        c.N_sweep = {100, 200, 400, 800, 1600};
        c.runs = 3;
    } else {
        throw std::invalid_argument("unknown experiment id: " + id);
    }
    return c;
}

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    j = nlohmann::json{{"experiment", c.experiment},
                       {"system", c.system},
                       {"N", c.N},
                       {"L0", c.L0},
                       {"Lp", c.Lp},
                       {"sigma2", c.sigma2},
                       {"sigma_p2", c.sigma_p2},
                       {"runs", c.runs},
                       {"steps", c.steps},
                       {"seed", c.seed},
                       {"q_weight", c.q_weight},
                       {"r_weight", c.r_weight},
                       {"lambda_y", c.lambda_y},
                       {"lambda_g", c.lambda_g},
                       {"lambda_g_grid", c.lambda_g_grid},
                       {"noise_sweep", c.noise_sweep},
                       {"N_sweep", c.N_sweep},
                       {"alpha_grid", c.alpha_grid},
                       {"beta_grid", c.beta_grid},
                       {"known_past", c.known_past},
                       {"compress", c.compress},
                       {"workers", c.workers},
                       {"out_dir", c.out_dir}};
}

/// Patch a config with the fields present in j (missing fields keep their
/// current values, so partial config files work).
inline void patch_config(ExperimentConfig& c, const nlohmann::json& j) {
    auto get = [&j](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    get("experiment", c.experiment);
    get("system", c.system);
    get("N", c.N);
    get("L0", c.L0);
    get("Lp", c.Lp);
    get("sigma2", c.sigma2);
    get("sigma_p2", c.sigma_p2);
    get("runs", c.runs);
    get("steps", c.steps);
    get("seed", c.seed);
    get("q_weight", c.q_weight);
    get("r_weight", c.r_weight);
    get("lambda_y", c.lambda_y);
    get("lambda_g", c.lambda_g);
    get("lambda_g_grid", c.lambda_g_grid);
    get("noise_sweep", c.noise_sweep);
    get("N_sweep", c.N_sweep);
    get("alpha_grid", c.alpha_grid);
    get("beta_grid", c.beta_grid);
    get("known_past", c.known_past);
    get("compress", c.compress);
    get("workers", c.workers);
    get("out_dir", c.out_dir);
}

/// 64-bit FNV-1a of the canonical JSON dump, as fixed-width hex. Any field
/// change alters the dump and therefore the hash.
inline std::string config_hash(const ExperimentConfig& c) {
    nlohmann::json j;
    to_json(j, c);
    const std::string dump = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

/// Resolve a system name: the two built-in benchmarks, or csv:<path> where
/// the file holds two CSV rows (numerator, then denominator coefficients
/// in descending powers of z).
inline LtiSystem make_system(const std::string& name) {
    if (name == "g1") return make_g1();
    if (name == "g2") return make_g2();
    if (name.rfind("csv:", 0) == 0) {
        const std::string path = name.substr(4);
        std::ifstream is(path);
        if (!is) throw std::runtime_error("cannot open system file: " + path);
        std::string num_line, den_line;
        if (!std::getline(is, num_line) || !std::getline(is, den_line))
            throw std::runtime_error("system file needs numerator and denominator rows: " + path);
        auto parse = [](const std::string& line) {
            std::vector<double> out;
            for (const std::string& cell : split_csv_line(line)) out.push_back(std::stod(cell));
            return out;
        };
        const std::vector<double> num = parse(num_line);
        const std::vector<double> den = parse(den_line);
        return tf_to_ss(Eigen::Map<const Eigen::VectorXd>(num.data(), static_cast<Eigen::Index>(num.size())),
                        Eigen::Map<const Eigen::VectorXd>(den.data(), static_cast<Eigen::Index>(den.size())));
    }
    throw std::invalid_argument("unknown system name: " + name + " (want g1, g2 or csv:<path>)");
}

// ---------------------------------------------------------------------------
// Dataset builders
// ---------------------------------------------------------------------------

/// Identification data: N recorded samples of a unit-variance Gaussian
/// input through the plant from rest, preceded by n-1 warm-up inputs so
/// that the "known past" estimator has a full regressor for every recorded
/// sample. Output noise is added to the recorded window only.
struct IdentDataset {
    Eigen::VectorXd u, y, y_clean, past_u;
    double sigma2 = 0.0;
};

inline IdentDataset make_ident_dataset(const LtiSystem& sys, Eigen::Index N, Eigen::Index n,
                                       double sigma2, std::uint64_t seed,
                                       const std::string& stream_prefix = "") {
    if (N < 1 || n < 1) throw std::invalid_argument("make_ident_dataset: need N, n >= 1");
    Rng in_rng(stream_seed(seed, stream_prefix + "input"));
    const Eigen::Index total = N + n - 1;
    const Eigen::VectorXd u_all = in_rng.gaussian_vector(total);
    Eigen::MatrixXd input(1, total);
    input.row(0) = u_all.transpose();
    const Trajectory traj = simulate(sys, input);

    IdentDataset ds;
    ds.sigma2 = sigma2;
    ds.past_u = u_all.head(n - 1);
    ds.u = u_all.tail(N);
    ds.y_clean = traj.y.row(0).tail(N).transpose();
    ds.y = ds.y_clean;
    if (sigma2 > 0.0) {
        Rng noise_rng(stream_seed(seed, stream_prefix + "noise"));
        ds.y += std::sqrt(sigma2) * noise_rng.gaussian_vector(N);
    }
    return ds;
}

inline FirEstimate run_ident_method(const IdentDataset& ds, FirMethod method, Eigen::Index L0,
                                    Eigen::Index n, bool known_past,
                                    const std::vector<double>& alpha_grid,
                                    const std::vector<double>& beta_grid) {
    const std::optional<Eigen::VectorXd> past =
        known_past ? std::optional<Eigen::VectorXd>(ds.past_u) : std::nullopt;
    switch (method) {
        case FirMethod::LS:
            return ls_fir(ds.u, ds.y, n, ds.sigma2, past);
        case FirMethod::LSTC:
            return kernel_regularize(ls_fir(ds.u, ds.y, n, ds.sigma2, past), alpha_grid, beta_grid)
                .estimate;
        case FirMethod::SMM: {
            const SignalMatrixSet set = partition(ds.u.transpose(), ds.y.transpose(), L0, n);
            return smm_fir(set, n, ds.sigma2);
        }
        case FirMethod::SMMTC: {
            const SignalMatrixSet set = partition(ds.u.transpose(), ds.y.transpose(), L0, n);
            return kernel_regularize(smm_fir(set, n, ds.sigma2), alpha_grid, beta_grid).estimate;
        }
    }
    throw std::invalid_argument("run_ident_method: unknown method");
}

/// Offline closed-loop data: unit-variance Gaussian input through the
/// plant from rest, output noise of variance sigma2 on every sample, then
/// the depth-(L0+Lp) partition (optionally compressed to 2L columns).
inline SignalMatrixSet make_control_set(const LtiSystem& sys, Eigen::Index N, Eigen::Index L0,
                                        Eigen::Index Lp, double sigma2, std::uint64_t seed,
                                        bool compressed) {
    Rng in_rng(stream_seed(seed, "offline-input"));
    Eigen::MatrixXd input(1, N);
    input.row(0) = in_rng.gaussian_vector(N).transpose();
    Trajectory traj = simulate(sys, input);
    if (sigma2 > 0.0) traj = add_noise(traj, sigma2, stream_seed(seed, "offline-noise"));
    SignalMatrixSet set = partition(traj.u, traj.y, L0, Lp);
    if (compressed) set = compress(set);
    return set;
}

/// The tracking reference used by all closed-loop experiments.
inline double bench_reference(Eigen::Index t) {
    return 0.5 * std::sin(M_PI * static_cast<double>(t) / 10.0);
}

struct ControlRun {
    ClosedLoopResult loop;
    double best_lambda_g = 0.0;  // nonzero only for the grid-searched controller
};

inline ControllerConfig make_controller_config(const ExperimentConfig& cfg, ControllerKind kind,
                                               double lambda_g) {
    ControllerConfig cc;
    cc.kind = kind;
    cc.L0 = cfg.L0;
    cc.Lp = cfg.Lp;
    cc.q = Eigen::VectorXd::Constant(1, cfg.q_weight);
    cc.r = Eigen::VectorXd::Constant(1, cfg.r_weight);
    cc.lambda_g = lambda_g;
    cc.lambda_y = cfg.lambda_y;
    cc.noise = NoiseModel{cfg.sigma2, cfg.sigma_p2};
    return cc;
}

/// One closed-loop run. For the regularized controller the weight grid is
/// searched and the best-cost run kept (every grid point replays the same
/// noise realization, so the comparison is paired).
inline ControlRun run_control(const LtiSystem& plant, const SignalMatrixSet& set,
                              const ExperimentConfig& cfg, ControllerKind kind,
                              std::uint64_t run_seed_value) {
    ControlRun out;
    if (kind == ControllerKind::DeePC && !cfg.lambda_g_grid.empty()) {
        bool first = true;
        for (double lg : cfg.lambda_g_grid) {
            const ControllerConfig cc = make_controller_config(cfg, kind, lg);
            ClosedLoopResult res =
                receding_horizon_run(plant, cc, set, bench_reference, cfg.steps, run_seed_value);
            if (first || res.J < out.loop.J) {
                out.loop = std::move(res);
                out.best_lambda_g = lg;
                first = false;
            }
        }
        return out;
    }
    const ControllerConfig cc = make_controller_config(cfg, kind, cfg.lambda_g);
    out.loop = receding_horizon_run(plant, cc, set, bench_reference, cfg.steps, run_seed_value);
    return out;
}

// ---------------------------------------------------------------------------
// Experiment execution
// ---------------------------------------------------------------------------

struct ExperimentReport {
    Table runs;
    Table summary;
    nlohmann::json meta;
};

namespace detail {

/// Run n_jobs closures on up to `workers` threads. Each job fills its own
/// slot, so assembly order (and therefore every output file) is
/// independent of scheduling.
inline void run_jobs(std::size_t n_jobs, int workers, const std::function<void(std::size_t)>& job) {
    const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(n_jobs)));
    if (n_threads == 1) {
        for (std::size_t i = 0; i < n_jobs; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n_jobs) return;
                job(i);
            }
        });
    for (auto& th : pool) th.join();
}

struct JobOutput {
    std::vector<std::vector<Cell>> rows;
    std::string error;  // non-empty when the job failed
    std::string label;  // what failed, for the metadata record
};

inline std::vector<FirMethod> all_fir_methods() {
    return {FirMethod::LS, FirMethod::LSTC, FirMethod::SMM, FirMethod::SMMTC};
}

inline std::vector<ControllerKind> all_controllers() {
    return {ControllerKind::IdealMPC, ControllerKind::SubPC, ControllerKind::DeePC,
            ControllerKind::SmmPC};
}

inline std::size_t count_failures(const ClosedLoopResult& res) {
    std::size_t n = 0;
    for (bool ok : res.step_ok)
        if (!ok) ++n;
    return n;
}

}  // namespace detail

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    const std::string& id = cfg.experiment;
    const auto& ids = experiment_ids();
    if (std::find(ids.begin(), ids.end(), id) == ids.end())
        throw std::invalid_argument("unknown experiment id: " + id);

    ExperimentReport report;
    Table& runs = report.runs;
    std::vector<std::string> summary_keys;
    std::vector<detail::JobOutput> slots;
    std::function<void(std::size_t)> job;
    std::size_t n_jobs = 0;

    const bool ident_family = (id == "fig1a" || id == "fig1b" || id == "fig2" || id == "fig3");
    const LtiSystem plant = make_system(cfg.system);

    if (ident_family && id != "fig3") {
        runs.columns = {"run", "method", "k", "h_true", "h_est", "post_sd"};
        summary_keys = {"method", "k"};
        const Eigen::VectorXd h_true = impulse_response_siso(plant, cfg.Lp);
        const std::vector<FirMethod> methods =
            (id == "fig1a") ? std::vector<FirMethod>{FirMethod::LS, FirMethod::SMM}
                            : detail::all_fir_methods();
        n_jobs = static_cast<std::size_t>(cfg.runs);
        slots.resize(n_jobs);
        job = [&, methods, h_true](std::size_t r) {
            detail::JobOutput& out = slots[r];
            out.label = "run " + std::to_string(r);
            try {
                const std::uint64_t rs = run_seed(cfg.seed, static_cast<std::uint64_t>(r));
                const IdentDataset ds = make_ident_dataset(plant, cfg.N, cfg.Lp, cfg.sigma2, rs);
                for (FirMethod m : methods) {
                    const FirEstimate est = run_ident_method(ds, m, cfg.L0, cfg.Lp, cfg.known_past,
                                                             cfg.alpha_grid, cfg.beta_grid);
                    for (Eigen::Index k = 0; k < cfg.Lp; ++k)
                        out.rows.push_back({std::to_string(r), std::string(to_string(m)),
                                            static_cast<double>(k), h_true(k), est.h(k),
                                            std::sqrt(std::max(0.0, est.cov(k, k)))});
                }
            } catch (const std::exception& e) {
                out.rows.clear();
                out.error = e.what();
            }
        };
    } else if (id == "fig3") {
        runs.columns = {"run", "case", "method", "w"};
        summary_keys = {"case", "method"};
        struct Case {
            const char* name;
            const char* system;
            bool known_past;
        };
        const std::vector<Case> cases = {{"g1-known-past", "g1", true},
                                         {"g2-unknown-past", "g2", false},
                                         {"g2-known-past", "g2", true}};
        n_jobs = static_cast<std::size_t>(cfg.runs);
        slots.resize(n_jobs);
        job = [&, cases](std::size_t r) {
            detail::JobOutput& out = slots[r];
            out.label = "run " + std::to_string(r);
            try {
                const std::uint64_t rs = run_seed(cfg.seed, static_cast<std::uint64_t>(r));
                for (const Case& cs : cases) {
                    const LtiSystem sys = make_system(cs.system);
                    const Eigen::VectorXd h_true = impulse_response_siso(sys, cfg.Lp);
                    const IdentDataset ds = make_ident_dataset(
                        sys, cfg.N, cfg.Lp, cfg.sigma2, rs, std::string(cs.system) + "-");
                    for (FirMethod m : detail::all_fir_methods()) {
                        const FirEstimate est = run_ident_method(
                            ds, m, cfg.L0, cfg.Lp, cs.known_past, cfg.alpha_grid, cfg.beta_grid);
                        out.rows.push_back({std::to_string(r), std::string(cs.name),
                                            std::string(to_string(m)),
                                            fit_metric(h_true, est.h)});
                    }
                }
            } catch (const std::exception& e) {
                out.rows.clear();
                out.error = e.what();
            }
        };
    } else if (id == "fig4") {
        runs.columns = {"run", "controller", "t", "u", "y", "y0", "r"};
        summary_keys = {"controller", "t"};
        n_jobs = static_cast<std::size_t>(cfg.runs);
        slots.resize(n_jobs);
        job = [&](std::size_t r) {
            detail::JobOutput& out = slots[r];
            out.label = "run " + std::to_string(r);
            try {
                const std::uint64_t rs = run_seed(cfg.seed, static_cast<std::uint64_t>(r));
                const SignalMatrixSet set =
                    make_control_set(plant, cfg.N, cfg.L0, cfg.Lp, cfg.sigma2, rs, cfg.compress);
                for (ControllerKind kind : detail::all_controllers()) {
                    const ControlRun cr = run_control(plant, set, cfg, kind, rs);
                    for (Eigen::Index t = 0; t < cfg.steps; ++t)
                        out.rows.push_back({std::to_string(r), std::string(to_string(kind)),
                                            static_cast<double>(t), cr.loop.u(t), cr.loop.y(t),
                                            cr.loop.y0(t), cr.loop.r(t)});
                }
            } catch (const std::exception& e) {
                out.rows.clear();
                out.error = e.what();
            }
        };
    } else if (id == "fig5") {
        runs.columns = {"run", "controller", "J", "failures", "best_lambda_g"};
        summary_keys = {"controller"};
        n_jobs = static_cast<std::size_t>(cfg.runs);
        slots.resize(n_jobs);
        job = [&](std::size_t r) {
            detail::JobOutput& out = slots[r];
            out.label = "run " + std::to_string(r);
            try {
                const std::uint64_t rs = run_seed(cfg.seed, static_cast<std::uint64_t>(r));
                const SignalMatrixSet set =
                    make_control_set(plant, cfg.N, cfg.L0, cfg.Lp, cfg.sigma2, rs, cfg.compress);
                for (ControllerKind kind : detail::all_controllers()) {
                    const ControlRun cr = run_control(plant, set, cfg, kind, rs);
                    out.rows.push_back({std::to_string(r), std::string(to_string(kind)),
                                        cr.loop.J,
                                        static_cast<double>(detail::count_failures(cr.loop)),
                                        cr.best_lambda_g});
                }
            } catch (const std::exception& e) {
                out.rows.clear();
                out.error = e.what();
            }
        };
    } else if (id == "fig6a" || id == "fig6b") {
        const bool sweep_n = (id == "fig6a");
        runs.columns = {sweep_n ? "N" : "noise", "run", "controller", "J", "failures",
                        "best_lambda_g"};
        summary_keys = {sweep_n ? "N" : "noise", "controller"};
        const std::size_t n_levels =
            sweep_n ? cfg.N_sweep.size() : cfg.noise_sweep.size();
        if (n_levels == 0)
            throw std::invalid_argument(id + ": sweep list must not be empty");
        n_jobs = n_levels * static_cast<std::size_t>(cfg.runs);
        slots.resize(n_jobs);
        job = [&, sweep_n](std::size_t slot) {
            detail::JobOutput& out = slots[slot];
            const std::size_t level_i = slot / static_cast<std::size_t>(cfg.runs);
            const std::size_t r = slot % static_cast<std::size_t>(cfg.runs);
            ExperimentConfig local = cfg;
            double level_value = 0.0;
            if (sweep_n) {
                local.N = cfg.N_sweep[level_i];
                level_value = static_cast<double>(local.N);
            } else {
                local.sigma2 = local.sigma_p2 = cfg.noise_sweep[level_i];
                level_value = local.sigma2;
            }
            out.label = id + " level " + format_double(level_value) + " run " + std::to_string(r);
            try {
                const std::uint64_t rs = run_seed(cfg.seed, static_cast<std::uint64_t>(r));
                const SignalMatrixSet set = make_control_set(plant, local.N, local.L0, local.Lp,
                                                             local.sigma2, rs, local.compress);
                for (ControllerKind kind : detail::all_controllers()) {
                    const ControlRun cr = run_control(plant, set, local, kind, rs);
                    out.rows.push_back({level_value, std::to_string(r),
                                        std::string(to_string(kind)), cr.loop.J,
                                        static_cast<double>(detail::count_failures(cr.loop)),
                                        cr.best_lambda_g});
                }
            } catch (const std::exception& e) {
                out.rows.clear();
                out.error = e.what();
            }
        };
    } else if (id == "fig7") {
        runs.columns = {"noise", "run", "best_lambda_g", "log10_best_lambda_g", "J"};
        summary_keys = {"noise"};
        if (cfg.noise_sweep.empty()) throw std::invalid_argument("fig7: sweep list must not be empty");
        n_jobs = cfg.noise_sweep.size() * static_cast<std::size_t>(cfg.runs);
        slots.resize(n_jobs);
        job = [&](std::size_t slot) {
            detail::JobOutput& out = slots[slot];
            const std::size_t level_i = slot / static_cast<std::size_t>(cfg.runs);
            const std::size_t r = slot % static_cast<std::size_t>(cfg.runs);
            ExperimentConfig local = cfg;
            local.sigma2 = local.sigma_p2 = cfg.noise_sweep[level_i];
            out.label =
                "fig7 level " + format_double(local.sigma2) + " run " + std::to_string(r);
            try {
                const std::uint64_t rs = run_seed(cfg.seed, static_cast<std::uint64_t>(r));
                const SignalMatrixSet set = make_control_set(plant, local.N, local.L0, local.Lp,
                                                             local.sigma2, rs, local.compress);
                const ControlRun cr = run_control(plant, set, local, ControllerKind::DeePC, rs);
                out.rows.push_back({local.sigma2, std::to_string(r), cr.best_lambda_g,
                                    std::log10(cr.best_lambda_g), cr.loop.J});
            } catch (const std::exception& e) {
                out.rows.clear();
                out.error = e.what();
            }
        };
    } else {  // fig8
        runs.columns = {"N",  "compressed",          "run",
                        "J",  "median_step_seconds", "mean_step_seconds",
                        "decision_dim"};
        summary_keys = {"N", "compressed"};
        if (cfg.N_sweep.empty()) throw std::invalid_argument("fig8: sweep list must not be empty");
        n_jobs = cfg.N_sweep.size() * 2 * static_cast<std::size_t>(cfg.runs);
        slots.resize(n_jobs);
        job = [&](std::size_t slot) {
            detail::JobOutput& out = slots[slot];
            const std::size_t per_level = 2 * static_cast<std::size_t>(cfg.runs);
            const std::size_t level_i = slot / per_level;
            const bool compressed = ((slot % per_level) / static_cast<std::size_t>(cfg.runs)) == 1;
            const std::size_t r = slot % static_cast<std::size_t>(cfg.runs);
            ExperimentConfig local = cfg;
            local.N = cfg.N_sweep[level_i];
            local.compress = compressed;
            out.label = "fig8 N=" + std::to_string(local.N) +
                        (compressed ? " compressed" : " raw") + " run " + std::to_string(r);
            try {
                const std::uint64_t rs = run_seed(cfg.seed, static_cast<std::uint64_t>(r));
                const SignalMatrixSet set = make_control_set(plant, local.N, local.L0, local.Lp,
                                                             local.sigma2, rs, compressed);
                const ControlRun cr = run_control(plant, set, local, ControllerKind::SmmPC, rs);
                const Eigen::Index controlled = cfg.steps - cfg.L0;
                std::vector<double> times(static_cast<std::size_t>(controlled));
                for (Eigen::Index k = 0; k < controlled; ++k)
                    times[static_cast<std::size_t>(k)] = cr.loop.solve_seconds(cfg.L0 + k);
                out.rows.push_back({static_cast<double>(local.N), compressed ? 1.0 : 0.0,
                                    std::to_string(r), cr.loop.J, median(times),
                                    vector_mean(times),
                                    static_cast<double>(cr.loop.decision_dim)});
            } catch (const std::exception& e) {
                out.rows.clear();
                out.error = e.what();
            }
        };
    }

    detail::run_jobs(n_jobs, cfg.workers, job);

    nlohmann::json failed = nlohmann::json::array();
    for (const detail::JobOutput& slot : slots) {
        for (const auto& row : slot.rows) runs.push_row(row);
        if (!slot.error.empty()) failed.push_back({{"what", slot.label}, {"error", slot.error}});
    }
    if (runs.rows.empty())
        throw std::runtime_error("experiment " + id + " produced no rows; first failure: " +
                                 (failed.empty() ? std::string("none recorded")
                                                 : failed[0]["error"].get<std::string>()));

    report.summary = aggregate(runs, summary_keys);
    nlohmann::json cfg_json;
    to_json(cfg_json, cfg);
    report.meta = {{"experiment", id},       {"config", cfg_json},
                   {"config_hash", config_hash(cfg)}, {"seed", cfg.seed},
                   {"version", kVersion},    {"failed_runs", failed}};
    return report;
}

/// Write <out_dir>/<id>/{runs.csv, summary.csv, meta.json}.
inline std::filesystem::path write_report(const ExperimentConfig& cfg,
                                          const ExperimentReport& report) {
    const std::filesystem::path dir = std::filesystem::path(cfg.out_dir) / cfg.experiment;
    std::filesystem::create_directories(dir);
    {
        std::ofstream os = open_output((dir / "runs.csv").string());
        write_table_csv(os, report.runs);
    }
    {
        std::ofstream os = open_output((dir / "summary.csv").string());
        write_table_csv(os, report.summary);
    }
    {
        std::ofstream os = open_output((dir / "meta.json").string());
        os << report.meta.dump(2) << "\n";
    }
    return dir;
}

}  // namespace smm
