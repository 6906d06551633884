// Command-line front end: FIR identification runs, closed-loop control
// runs, and the Monte Carlo experiment harness.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <smm/smm.hpp>

namespace {

smm::FirMethod parse_method(const std::string& name) {
    if (name == "ls") return smm::FirMethod::LS;
    if (name == "ls-tc") return smm::FirMethod::LSTC;
    if (name == "smm") return smm::FirMethod::SMM;
    if (name == "smm-tc") return smm::FirMethod::SMMTC;
    throw CLI::ValidationError("--method", "unknown method: " + name);
}

smm::ControllerKind parse_controller(const std::string& name) {
    if (name == "subpc") return smm::ControllerKind::SubPC;
    if (name == "deepc") return smm::ControllerKind::DeePC;
    if (name == "smmpc") return smm::ControllerKind::SmmPC;
    if (name == "mpc") return smm::ControllerKind::IdealMPC;
    throw CLI::ValidationError("--controller", "unknown controller: " + name);
}

void write_table(const std::string& path, const smm::Table& table) {
    if (path == "-") {
        smm::write_table_csv(std::cout, table);
        return;
    }
    std::ofstream os = smm::open_output(path);
    smm::write_table_csv(os, table);
}

int run_identify(const std::string& system, Eigen::Index n, double sigma2, Eigen::Index N,
                 Eigen::Index L0, const std::string& method_name, bool known_past,
                 std::uint64_t seed, Eigen::Index runs, const std::string& out) {
    const smm::LtiSystem sys = smm::make_system(system);
    const smm::FirMethod method = parse_method(method_name);
    const Eigen::VectorXd h_true = smm::impulse_response_siso(sys, n);
    const std::vector<double> alpha = smm::default_alpha_grid();
    const std::vector<double> beta = smm::default_beta_grid();

    smm::Table table;
    table.columns = {"run", "method", "k", "h_true", "h_est", "post_sd", "w"};
    for (Eigen::Index r = 0; r < runs; ++r) {
        const std::uint64_t rs = smm::run_seed(seed, static_cast<std::uint64_t>(r));
        const smm::IdentDataset ds = smm::make_ident_dataset(sys, N, n, sigma2, rs);
        const smm::FirEstimate est =
            smm::run_ident_method(ds, method, L0, n, known_past, alpha, beta);
        const double w = smm::fit_metric(h_true, est.h);
        for (Eigen::Index k = 0; k < n; ++k)
            table.push_row({std::to_string(r), std::string(smm::to_string(method)),
                            static_cast<double>(k), h_true(k), est.h(k),
                            std::sqrt(std::max(0.0, est.cov(k, k))), w});
    }
    write_table(out, table);
    return 0;
}

int run_control(const std::string& controller_name, Eigen::Index N, Eigen::Index L0,
                Eigen::Index Lp, double sigma2, double sigma_p2, double lambda_g, double lambda_y,
                Eigen::Index steps, std::uint64_t seed, Eigen::Index runs, bool compressed,
                const std::string& out_dir) {
    const smm::LtiSystem plant = smm::make_g1();
    const smm::ControllerKind kind = parse_controller(controller_name);

    smm::ControllerConfig cc;
    cc.kind = kind;
    cc.L0 = L0;
    cc.Lp = Lp;
    cc.lambda_g = lambda_g;
    cc.lambda_y = lambda_y;
    cc.noise = smm::NoiseModel{sigma2, sigma_p2};

    smm::Table traj;
    traj.columns = {"run", "t", "u", "y", "y0", "r"};
    smm::Table summary;
    summary.columns = {"run", "J", "solve_time_total"};
    for (Eigen::Index r = 0; r < runs; ++r) {
        const std::uint64_t rs = smm::run_seed(seed, static_cast<std::uint64_t>(r));
        const smm::SignalMatrixSet set =
            smm::make_control_set(plant, N, L0, Lp, sigma2, rs, compressed);
        const smm::ClosedLoopResult res =
            smm::receding_horizon_run(plant, cc, set, smm::bench_reference, steps, rs);
        for (Eigen::Index t = 0; t < steps; ++t)
            traj.push_row({std::to_string(r), static_cast<double>(t), res.u(t), res.y(t),
                           res.y0(t), res.r(t)});
        summary.push_row({std::to_string(r), res.J, res.solve_seconds.sum()});
    }
    std::filesystem::create_directories(out_dir);
    write_table((std::filesystem::path(out_dir) / "trajectories.csv").string(), traj);
    write_table((std::filesystem::path(out_dir) / "summary.csv").string(), summary);
    std::cout << "wrote " << out_dir << "/trajectories.csv and " << out_dir << "/summary.csv\n";
    return 0;
}

int run_bench(const std::optional<std::string>& experiment,
              const std::optional<std::string>& config_path,
              const std::optional<std::string>& out_dir, const std::optional<std::uint64_t>& seed,
              const std::optional<int>& workers) {
    nlohmann::json file_json;
    if (config_path) {
        std::ifstream is(*config_path);
        if (!is) throw std::runtime_error("cannot open config: " + *config_path);
        is >> file_json;
    }
    std::string id;
    if (experiment)
        id = *experiment;
    else if (file_json.contains("experiment"))
        id = file_json.at("experiment").get<std::string>();
    else
        throw std::runtime_error("no experiment id: pass --experiment or put it in the config");

    smm::ExperimentConfig cfg = smm::experiment_defaults(id);
    if (config_path) smm::patch_config(cfg, file_json);
    cfg.experiment = id;
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (out_dir) cfg.out_dir = *out_dir;

    const smm::ExperimentReport report = smm::run_experiment(cfg);
    const std::filesystem::path dir = smm::write_report(cfg, report);
    std::cout << "experiment " << id << ": " << report.runs.rows.size() << " rows, "
              << report.summary.rows.size() << " summary groups -> " << dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Data-driven modeling, identification and predictive control"};
    app.require_subcommand(1);

    // identify
    auto* ident = app.add_subcommand("identify", "Estimate an impulse response from data");
    std::string id_system = "g1", id_method = "ls", id_out = "-";
    Eigen::Index id_n = 11, id_N = 50, id_L0 = 4, id_runs = 1;
    double id_sigma2 = 0.01;
    bool id_known_past = true;
    std::uint64_t id_seed = 17;
    ident->add_option("--system", id_system, "g1, g2 or csv:<path>")->capture_default_str();
    ident->add_option("--n", id_n, "FIR length")->capture_default_str();
    ident->add_option("--sigma2", id_sigma2, "output noise variance")->capture_default_str();
    ident->add_option("--N", id_N, "data length")->capture_default_str();
    ident->add_option("--L0", id_L0, "past window")->capture_default_str();
    ident->add_option("--method", id_method, "ls, ls-tc, smm or smm-tc")->capture_default_str();
    ident->add_option("--known-past", id_known_past, "past inputs available to the regressor")
        ->capture_default_str();
    ident->add_option("--seed", id_seed, "base seed")->capture_default_str();
    ident->add_option("--runs", id_runs, "Monte Carlo runs")->capture_default_str();
    ident->add_option("--out", id_out, "output CSV path ('-' for stdout)")->capture_default_str();

    // control
    auto* ctl = app.add_subcommand("control", "Run a closed loop on the benchmark plant");
    std::string ct_controller = "smmpc", ct_compress = "off", ct_out = "control-out";
    Eigen::Index ct_N = 200, ct_L0 = 4, ct_Lp = 11, ct_steps = 60, ct_runs = 1;
    double ct_sigma2 = 1.0, ct_sigma_p2 = 1.0, ct_lambda_g = 100.0, ct_lambda_y = 1000.0;
    std::uint64_t ct_seed = 17;
    ctl->add_option("--controller", ct_controller, "subpc, deepc, smmpc or mpc")
        ->capture_default_str();
    ctl->add_option("--N", ct_N, "offline data length")->capture_default_str();
    ctl->add_option("--L0", ct_L0, "past window")->capture_default_str();
    ctl->add_option("--Lp", ct_Lp, "prediction horizon")->capture_default_str();
    ctl->add_option("--sigma2", ct_sigma2, "offline noise variance")->capture_default_str();
    ctl->add_option("--sigmap2", ct_sigma_p2, "online noise variance")->capture_default_str();
    ctl->add_option("--lambda-g", ct_lambda_g, "parameter-norm weight")->capture_default_str();
    ctl->add_option("--lambda-y", ct_lambda_y, "past-output slack weight")->capture_default_str();
    ctl->add_option("--steps", ct_steps, "closed-loop steps")->capture_default_str();
    ctl->add_option("--seed", ct_seed, "base seed")->capture_default_str();
    ctl->add_option("--runs", ct_runs, "Monte Carlo runs")->capture_default_str();
    ctl->add_option("--compress", ct_compress, "on or off")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    ctl->add_option("--out", ct_out, "output directory")->capture_default_str();

    // bench
    auto* bench = app.add_subcommand("bench", "Run a canned experiment and write its report");
    std::string be_experiment, be_config, be_out;
    std::uint64_t be_seed = 0;
    int be_workers = 0;
    auto* be_exp_opt = bench->add_option("--experiment", be_experiment, "experiment id");
    auto* be_cfg_opt = bench->add_option("--config", be_config, "JSON config path");
    auto* be_out_opt = bench->add_option("--out", be_out, "output directory");
    auto* be_seed_opt = bench->add_option("--seed", be_seed, "base seed");
    auto* be_workers_opt = bench->add_option("--workers", be_workers, "worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ident->parsed())
            return run_identify(id_system, id_n, id_sigma2, id_N, id_L0, id_method, id_known_past,
                                id_seed, id_runs, id_out);
        if (ctl->parsed())
            return run_control(ct_controller, ct_N, ct_L0, ct_Lp, ct_sigma2, ct_sigma_p2,
                               ct_lambda_g, ct_lambda_y, ct_steps, ct_seed, ct_runs,
                               ct_compress == "on", ct_out);
        if (bench->parsed()) {
            auto opt_str = [](const CLI::Option* o, const std::string& v) {
                return o->count() ? std::optional<std::string>(v) : std::nullopt;
            };
            return run_bench(opt_str(be_exp_opt, be_experiment), opt_str(be_cfg_opt, be_config),
                             opt_str(be_out_opt, be_out),
                             be_seed_opt->count() ? std::optional<std::uint64_t>(be_seed)
                                                  : std::nullopt,
                             be_workers_opt->count() ? std::optional<int>(be_workers)
                                                     : std::nullopt);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
