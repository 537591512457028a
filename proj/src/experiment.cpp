#include "ivpinn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "ivpinn/problem.hpp"
#include "ivpinn/quadrature.hpp"
#include "ivpinn/reporting.hpp"

namespace ivpinn {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

const std::set<std::string> kModes = {"ivpinn",    "vpinn",      "oracle-interp",   "infsup",
                                      "zero-data", "parametric", "hyperparam-sweep"};

}  // namespace

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    return from_kv(KeyValueConfig::parse_file(path));
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValueConfig& kv) {
    ExperimentConfig cfg;
    cfg.case_name = kv.get_string("experiment.case", cfg.case_name);
    cfg.mode = kv.get_string("experiment.mode", cfg.mode);
    cfg.k_test = kv.get_int("experiment.k_test", cfg.k_test);
    cfg.q = kv.get_int("experiment.q", cfg.q);
    cfg.seed = static_cast<std::uint64_t>(kv.get_int("experiment.seed", static_cast<int>(cfg.seed)));
    cfg.out_dir = kv.get_string("experiment.out_dir", cfg.out_dir);

    cfg.nx_list = kv.get_int_list("mesh.nx", cfg.nx_list);
    cfg.mesh_file = kv.get_string("mesh.mesh_file", cfg.mesh_file);

    cfg.net_layers = kv.get_int("network.layers", cfg.net_layers);
    cfg.net_width = kv.get_int("network.width", cfg.net_width);

    cfg.training.adam_epochs = kv.get_int("training.adam_epochs", cfg.training.adam_epochs);
    cfg.training.adam_lr0 = kv.get_double("training.adam_lr0", cfg.training.adam_lr0);
    cfg.training.lr_half_life = kv.get_double("training.lr_half_life", cfg.training.lr_half_life);
    std::string method = kv.get_string("training.second_order", "lbfgs");
    if (method == "bfgs")
        cfg.training.second_order = SecondOrderMethod::bfgs;
    else if (method == "lbfgs")
        cfg.training.second_order = SecondOrderMethod::lbfgs;
    else if (method == "none")
        cfg.training.second_order = SecondOrderMethod::none;
    else
        throw std::invalid_argument("training.second_order must be bfgs, lbfgs or none");
    cfg.training.second_order_max_iters =
        kv.get_int("training.max_iters", cfg.training.second_order_max_iters);
    cfg.training.lbfgs_memory = kv.get_int("training.memory", cfg.training.lbfgs_memory);
    cfg.training.grad_tol = kv.get_double("training.grad_tol", cfg.training.grad_tol);
    cfg.training.stagnation_patience =
        kv.get_int("training.stagnation_patience", cfg.training.stagnation_patience);
    cfg.training.record_h1 = kv.get_bool("training.record_h1", cfg.training.record_h1);
    cfg.training.seed = cfg.seed;

    cfg.sweep_layers = kv.get_int_list("sweep.layers", cfg.sweep_layers);
    cfg.sweep_widths = kv.get_int_list("sweep.widths", cfg.sweep_widths);
    cfg.sweep_nx = kv.get_int("sweep.nx", cfg.sweep_nx);

    cfg.par_n_train = kv.get_int("parametric.n_train", cfg.par_n_train);
    cfg.par_n_eval = kv.get_int("parametric.n_eval", cfg.par_n_eval);
    cfg.par_nx = kv.get_int("parametric.nx", cfg.par_nx);
    cfg.par_p_min = kv.get_double("parametric.p_min", cfg.par_p_min);
    cfg.par_p_max = kv.get_double("parametric.p_max", cfg.par_p_max);

    cfg.dump_system_flag = kv.get_bool("output.dump_system", cfg.dump_system_flag);
    cfg.parallel_rows = kv.get_bool("output.parallel_rows", cfg.parallel_rows);
    return cfg;
}

void ExperimentConfig::validate() const {
    if (kModes.count(mode) == 0) throw std::invalid_argument("unknown mode '" + mode + "'");
    if (mode != "zero-data" && mode != "parametric") {
        // resolves the case eagerly so bad names fail before any compute
        case_by_name(case_name);
    }
    DiscretizationConfig::from_kq(k_test, q).validate();
    if (nx_list.empty()) throw std::invalid_argument("mesh.nx must be a nonempty list");
    for (int nx : nx_list)
        if (nx < 1) throw std::invalid_argument("mesh.nx entries must be >= 1");
    if (net_layers < 1 || net_width < 1)
        throw std::invalid_argument("network.layers and network.width must be >= 1");
    training.validate();
    if (mode == "hyperparam-sweep" && (sweep_layers.empty() || sweep_widths.empty()))
        throw std::invalid_argument("hyperparam-sweep needs sweep.layers and sweep.widths");
    if (mode == "parametric") {
        if (par_n_train < 1 || par_n_eval < 1)
            throw std::invalid_argument("parametric.n_train and parametric.n_eval must be >= 1");
        if (!(par_p_min < par_p_max)) throw std::invalid_argument("parametric.p_min < p_max required");
    }
}

namespace {

std::vector<int> net_widths(int dim_in, int layers, int width) {
    std::vector<int> w;
    w.push_back(dim_in);
    for (int l = 0; l < layers; ++l) w.push_back(width);
    w.push_back(1);
    return w;
}

Mesh coarse_mesh_for(const TestCase& tc, int nx, const std::string& mesh_file) {
    if (!mesh_file.empty()) return read_mesh_file(mesh_file);
    if (tc.problem.dim == 1) return build_interval_mesh(nx, tc.problem.domain.x0, tc.problem.domain.x1);
    return build_structured_mesh(nx, nx, tc.problem.domain, tc.problem.boundary);
}

std::string out_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

struct ManifestWriter {
    std::ofstream out;
    explicit ManifestWriter(const std::string& dir) : out(out_path(dir, "manifest.txt")) {
        out << "ivpinn 0.1.0\n";
    }
    void echo_config(const ExperimentConfig& cfg) {
        out << "case=" << cfg.case_name << " mode=" << cfg.mode << " k_test=" << cfg.k_test
            << " q=" << cfg.q << " seed=" << cfg.seed << '\n';
        out << "nx=";
        for (std::size_t i = 0; i < cfg.nx_list.size(); ++i)
            out << (i ? "," : "") << cfg.nx_list[i];
        out << " layers=" << cfg.net_layers << " width=" << cfg.net_width
            << " adam_epochs=" << cfg.training.adam_epochs
            << " max_iters=" << cfg.training.second_order_max_iters << '\n';
    }
    void line(const std::string& s) {
        out << s << '\n';
        out.flush();
    }
};

std::string row_tag(const ExperimentConfig& cfg, int nx) {
    return cfg.case_name + "_" + std::to_string(cfg.k_test) + "_" + std::to_string(cfg.q) + "_nx" +
           std::to_string(nx);
}

// one convergence-style row: assemble, train (or not), measure
ConvergenceRow convergence_row(const ExperimentConfig& cfg, const TestCase& tc, int nx,
                               const std::string& dir, std::vector<std::string>& files,
                               std::vector<std::string>& log) {
    const auto t0 = Clock::now();
    DiscretizationConfig disc = DiscretizationConfig::from_kq(cfg.k_test, cfg.q);
    Mesh mesh_H = coarse_mesh_for(tc, nx, cfg.mesh_file);

    ConvergenceRow row;
    row.H = meshsize(mesh_H);
    row.n_inputs = 0;

    if (cfg.mode == "oracle-interp") {
        auto coarse = std::make_shared<const Mesh>(mesh_H);
        auto space = build_space(coarse, disc.k_int);
        row.h = row.H / disc.k_int;
        row.n_inputs = space.n_nodes();
        std::vector<double> u_nodes(space.n_nodes());
        for (int i = 0; i < space.n_nodes(); ++i) u_nodes[i] = tc.problem.exact->value(space.nodes[i]);
        auto em = build_error_measure(space, disc.q + 2);
        auto err = h1_l2_error(em, u_nodes, *tc.problem.exact);
        row.h1_error = err.h1;
        row.l2_error = err.l2;
        row.final_loss = 0.0;
        row.wall_time = seconds_since(t0);
        return row;
    }

    auto sys = assemble_system(tc.problem, disc, mesh_H);
    row.h = meshsize(*sys.mesh_h);
    row.n_inputs = sys.n_interp_nodes();
    if (cfg.dump_system_flag) {
        std::string p = out_path(dir, "system_" + row_tag(cfg, nx) + ".txt");
        dump_system(sys, p);
        files.push_back(p);
    }

    auto em = build_error_measure(sys.space_U, disc.q + 2);
    const ScalarField& exact = tc.problem.exact ? *tc.problem.exact : zero_field();

    TrainingConfig tcfg = cfg.training;
    tcfg.seed = cfg.seed + static_cast<std::uint64_t>(nx) * 7919;

    NodeObserver observer = [&](std::span<const double> u) {
        return h1_l2_error(em, u, exact).h1;
    };
    const NodeObserver* obs = tcfg.record_h1 ? &observer : nullptr;

    auto widths = net_widths(sys.dim, cfg.net_layers, cfg.net_width);
    auto net = init_weights(widths, Activation::tanh, tcfg.seed);

    TrainResult run = cfg.mode == "vpinn" ? train_vpinn_noninterp(sys, tc.lifting, net, tcfg, obs)
                                          : train_ivpinn(sys, tc.lifting, net, tcfg, obs);
    if (run.history.aborted_nonfinite)
        log.push_back("row nx=" + std::to_string(nx) + ": non-finite loss, restored checkpoint");

    if (cfg.mode == "vpinn") {
        // error of the network itself, not of its interpolant
        std::vector<double> coords;
        for (const auto& p : em.points) {
            coords.push_back(p.x);
            if (sys.dim == 2) coords.push_back(p.y);
        }
        MlpEvalCache cache;
        std::vector<double> jac;
        auto vals = mlp_forward_cached(run.net, coords, cache, true, &jac);
        std::vector<Vec2> w_grads(em.points.size());
        for (std::size_t i = 0; i < em.points.size(); ++i)
            w_grads[i] = {jac[i * sys.dim], sys.dim == 2 ? jac[i * sys.dim + 1] : 0.0};
        auto bw = apply_B(tc.lifting, em.points, vals, w_grads);
        auto err = h1_l2_error_values(em, bw.values, bw.grads, exact);
        row.h1_error = err.h1;
        row.l2_error = err.l2;
    } else {
        auto u_nodes = interpolation_node_values(sys, tc.lifting, run.net);
        auto err = h1_l2_error(em, u_nodes, exact);
        row.h1_error = err.h1;
        row.l2_error = err.l2;
    }
    row.final_loss = run.final_loss;
    row.wall_time = seconds_since(t0);

    std::string net_path = out_path(dir, "net_" + row_tag(cfg, nx) + ".ivnn");
    save_network(run.net, net_path);
    files.push_back(net_path);
    std::string hist_path = out_path(dir, "history_" + row_tag(cfg, nx) + ".csv");
    write_history_csv(run.history, hist_path);
    files.push_back(hist_path);
    return row;
}

RunSummary run_convergence_modes(const ExperimentConfig& cfg, const std::string& dir,
                                 ManifestWriter& manifest) {
    RunSummary summary;
    TestCase tc = cfg.mode == "zero-data" ? case_zero_data(cfg.case_name == "zero-2d" ? 2 : 1)
                                          : case_by_name(cfg.case_name);

    ConvergenceRecord record;
    record.case_name = tc.name;
    record.k_test = cfg.k_test;
    record.q = cfg.q;
    record.k_int = cfg.q + 2 - cfg.k_test;
    record.seed = cfg.seed;

    summary.table.columns = {"H", "h", "n_inputs", "h1_error", "l2_error", "final_loss", "wall_time"};
    std::atomic<bool> any_failed{false};
    std::mutex merge_mutex;

    std::vector<ConvergenceRow> rows(cfg.nx_list.size());
    std::vector<char> ok(cfg.nx_list.size(), 0);
    auto run_row = [&](std::size_t idx) {
        int nx = cfg.nx_list[idx];
        std::vector<std::string> files, log;
        try {
            ConvergenceRow row = convergence_row(cfg, tc, nx, dir, files, log);
            std::lock_guard<std::mutex> lock(merge_mutex);
            rows[idx] = row;
            ok[idx] = 1;
            summary.files_written.insert(summary.files_written.end(), files.begin(), files.end());
            summary.log.insert(summary.log.end(), log.begin(), log.end());
            manifest.line("row nx=" + std::to_string(nx) + " ok h1=" + std::to_string(row.h1_error) +
                          " time=" + std::to_string(row.wall_time));
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(merge_mutex);
            manifest.line("row nx=" + std::to_string(nx) + " FAILED: " + e.what());
            summary.log.push_back("row nx=" + std::to_string(nx) + " failed: " + e.what());
            any_failed = true;
        }
    };

    if (cfg.parallel_rows && cfg.nx_list.size() > 1) {
        std::vector<std::thread> workers;
        std::atomic<std::size_t> next{0};
        unsigned n_threads = std::min<unsigned>(std::thread::hardware_concurrency(),
                                                static_cast<unsigned>(cfg.nx_list.size()));
        for (unsigned t = 0; t < std::max(1u, n_threads); ++t)
            workers.emplace_back([&]() {
                for (std::size_t i = next.fetch_add(1); i < cfg.nx_list.size();
                     i = next.fetch_add(1))
                    run_row(i);
            });
        for (auto& w : workers) w.join();
    } else {
        for (std::size_t i = 0; i < cfg.nx_list.size(); ++i) run_row(i);
    }

    for (std::size_t i = 0; i < rows.size(); ++i)
        if (ok[i]) {
            record.rows.push_back(rows[i]);
            summary.table.rows.push_back({rows[i].H, rows[i].h, static_cast<double>(rows[i].n_inputs),
                                          rows[i].h1_error, rows[i].l2_error, rows[i].final_loss,
                                          rows[i].wall_time});
        }
    std::sort(record.rows.begin(), record.rows.end(),
              [](const ConvergenceRow& a, const ConvergenceRow& b) { return a.H > b.H; });

    record.fit();
    summary.rate_defined = record.rate_defined;
    if (record.rate_defined) summary.fitted_rate = record.fitted_rate;

    std::string csv = out_path(dir, convergence_csv_name(tc.name, cfg.k_test, cfg.q));
    write_convergence_csv(record, csv);
    summary.files_written.push_back(csv);
    summary.exit_code = any_failed ? 1 : 0;
    return summary;
}

RunSummary run_infsup_mode(const ExperimentConfig& cfg, const std::string& dir,
                           ManifestWriter& manifest) {
    RunSummary summary;
    TestCase tc = case_by_name(cfg.case_name);
    DiscretizationConfig disc = DiscretizationConfig::from_kq(cfg.k_test, cfg.q);
    summary.table.columns = {"H", "h", "dim_U0", "dim_V", "alpha_tilde", "c_h", "C_h"};
    bool any_failed = false;

    std::string csv_path = out_path(dir, "infsup_" + cfg.case_name + "_" + std::to_string(cfg.k_test) +
                                             "_" + std::to_string(cfg.q) + ".csv");
    std::ofstream csv(csv_path);
    csv.precision(16);
    csv << "H,h,dim_U0,dim_V,alpha_tilde,c_h,C_h\n";
    for (int nx : cfg.nx_list) {
        try {
            Mesh mesh_H = coarse_mesh_for(tc, nx, cfg.mesh_file);
            auto sys = assemble_system(tc.problem, disc, mesh_H);
            auto rep = compute_infsup(sys);
            double H = meshsize(mesh_H), h = meshsize(*sys.mesh_h);
            csv << H << ',' << h << ',' << rep.dim_U0 << ',' << rep.dim_V << ',' << rep.alpha_tilde
                << ',' << rep.c_h << ',' << rep.C_h << '\n';
            summary.table.rows.push_back({H, h, static_cast<double>(rep.dim_U0),
                                          static_cast<double>(rep.dim_V), rep.alpha_tilde, rep.c_h,
                                          rep.C_h});
            manifest.line("infsup nx=" + std::to_string(nx) +
                          " alpha=" + std::to_string(rep.alpha_tilde));
        } catch (const std::exception& e) {
            manifest.line("infsup nx=" + std::to_string(nx) + " FAILED: " + e.what());
            summary.log.push_back(e.what());
            any_failed = true;
        }
    }
    summary.files_written.push_back(csv_path);
    summary.exit_code = any_failed ? 1 : 0;
    return summary;
}

RunSummary run_parametric_mode(const ExperimentConfig& cfg, const std::string& dir,
                               ManifestWriter& manifest) {
    RunSummary summary;
    summary.table.columns = {"p", "h1_error", "l2_error", "is_train"};

    auto ps = parametric_training_set(cfg.par_n_train, cfg.par_p_min, cfg.par_p_max);
    std::vector<TestCase> cases;
    cases.reserve(ps.size());
    for (double p : ps) cases.push_back(case_parametric_nonlinear(p));

    DiscretizationConfig disc = DiscretizationConfig::from_kq(cfg.k_test, cfg.q);
    Mesh mesh_H = coarse_mesh_for(cases.front(), cfg.par_nx, cfg.mesh_file);

    std::vector<AssembledSystem> systems;
    systems.reserve(cases.size());
    for (const auto& c : cases) systems.push_back(assemble_system(c.problem, disc, mesh_H));

    std::vector<const AssembledSystem*> sys_ptrs;
    std::vector<const BoundaryLifting*> lift_ptrs;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        sys_ptrs.push_back(&systems[i]);
        lift_ptrs.push_back(&cases[i].lifting);
    }

    TrainingConfig tcfg = cfg.training;
    tcfg.seed = cfg.seed;
    auto widths = net_widths(3, cfg.net_layers, cfg.net_width);
    auto net = init_weights(widths, Activation::tanh, tcfg.seed);
    auto run = train_parametric(sys_ptrs, lift_ptrs, net, tcfg);
    manifest.line("parametric trained, final_loss=" + std::to_string(run.final_loss));

    std::string hist_path = out_path(dir, "history_parametric.csv");
    write_history_csv(run.history, hist_path);
    summary.files_written.push_back(hist_path);
    std::string net_path = out_path(dir, "net_parametric.ivnn");
    save_network(run.net, net_path);
    summary.files_written.push_back(net_path);

    auto em = build_error_measure(systems.front().space_U, disc.q + 2);
    auto eval_at = [&](double p, bool is_train) {
        auto tc = case_parametric_nonlinear(p);
        if (!parametric_in_range(p))
            summary.log.push_back("p=" + std::to_string(p) + " outside [0.5,2]: extrapolation");
        auto u = interpolation_node_values(systems.front(), tc.lifting, run.net, p, true);
        auto err = h1_l2_error(em, u, *tc.problem.exact);
        summary.table.rows.push_back({p, err.h1, err.l2, is_train ? 1.0 : 0.0});
    };
    for (double p : ps) eval_at(p, true);
    // unseen parameters: midpoint offsets, fixed and reproducible
    for (int i = 0; i < cfg.par_n_eval; ++i) {
        double t = (i + 0.5) / cfg.par_n_eval;
        eval_at(cfg.par_p_min + t * (cfg.par_p_max - cfg.par_p_min), false);
    }

    std::string csv_path = out_path(dir, "parametric_errors.csv");
    std::ofstream csv(csv_path);
    csv.precision(16);
    csv << "p,h1_error,l2_error,is_train\n";
    for (const auto& row : summary.table.rows)
        csv << row[0] << ',' << row[1] << ',' << row[2] << ',' << (row[3] != 0.0 ? 1 : 0) << '\n';
    summary.files_written.push_back(csv_path);
    return summary;
}

RunSummary run_sweep_mode(const ExperimentConfig& cfg, const std::string& dir,
                          ManifestWriter& manifest) {
    RunSummary summary;
    summary.table.columns = {"layers", "width", "h1_error", "final_loss"};
    TestCase tc = case_by_name(cfg.case_name);
    DiscretizationConfig disc = DiscretizationConfig::from_kq(cfg.k_test, cfg.q);
    Mesh mesh_H = coarse_mesh_for(tc, cfg.sweep_nx, cfg.mesh_file);
    auto sys = assemble_system(tc.problem, disc, mesh_H);
    auto em = build_error_measure(sys.space_U, disc.q + 2);
    bool any_failed = false;

    for (int layers : cfg.sweep_layers)
        for (int width : cfg.sweep_widths) {
            try {
                TrainingConfig tcfg = cfg.training;
                tcfg.seed = cfg.seed + static_cast<std::uint64_t>(layers) * 1009 +
                            static_cast<std::uint64_t>(width) * 9176;
                auto net = init_weights(net_widths(sys.dim, layers, width), Activation::tanh,
                                        tcfg.seed);
                auto run = train_ivpinn(sys, tc.lifting, net, tcfg);
                auto u = interpolation_node_values(sys, tc.lifting, run.net);
                auto err = h1_l2_error(em, u, *tc.problem.exact);
                summary.table.rows.push_back({static_cast<double>(layers),
                                              static_cast<double>(width), err.h1, run.final_loss});
                manifest.line("sweep layers=" + std::to_string(layers) + " width=" +
                              std::to_string(width) + " h1=" + std::to_string(err.h1));
            } catch (const std::exception& e) {
                manifest.line("sweep layers=" + std::to_string(layers) + " width=" +
                              std::to_string(width) + " FAILED: " + e.what());
                summary.log.push_back(e.what());
                any_failed = true;
            }
        }

    std::string csv_path = out_path(dir, "sweep_" + cfg.case_name + ".csv");
    std::ofstream csv(csv_path);
    csv.precision(16);
    csv << "layers,width,h1_error,final_loss\n";
    for (const auto& row : summary.table.rows)
        csv << static_cast<int>(row[0]) << ',' << static_cast<int>(row[1]) << ',' << row[2] << ','
            << row[3] << '\n';
    summary.files_written.push_back(csv_path);
    summary.exit_code = any_failed ? 1 : 0;
    return summary;
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg, const std::string& out_dir_override) {
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        RunSummary s;
        s.exit_code = 2;
        s.log.push_back(std::string("config error: ") + e.what());
        return s;
    }

    std::string dir = out_dir_override;
    if (dir.empty()) dir = cfg.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv("IVPINN_OUT");
        dir = env != nullptr && *env != '\0' ? env : "ivpinn_out";
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        RunSummary s;
        s.exit_code = 2;
        s.log.push_back("cannot create output directory " + dir);
        return s;
    }

    ManifestWriter manifest(dir);
    manifest.echo_config(cfg);

    RunSummary summary;
    try {
        if (cfg.mode == "infsup")
            summary = run_infsup_mode(cfg, dir, manifest);
        else if (cfg.mode == "parametric")
            summary = run_parametric_mode(cfg, dir, manifest);
        else if (cfg.mode == "hyperparam-sweep")
            summary = run_sweep_mode(cfg, dir, manifest);
        else
            summary = run_convergence_modes(cfg, dir, manifest);
    } catch (const std::exception& e) {
        summary.exit_code = 1;
        summary.log.push_back(std::string("experiment failed: ") + e.what());
        manifest.line(std::string("FAILED: ") + e.what());
    }
    summary.files_written.push_back(out_path(dir, "manifest.txt"));
    if (summary.rate_defined)
        manifest.line("fitted_rate=" + std::to_string(summary.fitted_rate));
    manifest.line("exit=" + std::to_string(summary.exit_code));
    return summary;
}

bool run_self_check(std::vector<std::string>& log) {
    bool ok = true;
    auto check = [&](bool pass, const std::string& what) {
        log.push_back(std::string(pass ? "ok   " : "FAIL ") + what);
        ok = ok && pass;
    };

    // quadrature exactness against the closed form a! b! / (a+b+2)!
    auto factorial = [](int n) {
        double f = 1.0;
        for (int i = 2; i <= n; ++i) f *= i;
        return f;
    };
    for (int q : {3, 5}) {
        auto rule = reference_triangle_rule(q);
        double worst = 0.0;
        for (int a = 0; a <= q; ++a)
            for (int b = 0; a + b <= q; ++b) {
                double s = 0.0;
                for (std::size_t k = 0; k < rule.points.size(); ++k)
                    s += rule.weights[k] * std::pow(rule.points[k].x, a) *
                         std::pow(rule.points[k].y, b);
                double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                worst = std::max(worst, std::abs(s - exact) / exact);
            }
        check(worst <= 1e-13, "triangle rule q=" + std::to_string(q) + " exactness");
    }

    // interpolation matrices: partition of unity on a refined pair
    {
        auto coarse = std::make_shared<const Mesh>(
            build_structured_mesh(2, 2, Rect{}, BoundarySpec::all_dirichlet()));
        auto fine = refine_nested(*coarse, 4);
        auto space = build_space(coarse, 4);
        auto rule = reference_triangle_rule(3);
        std::vector<std::vector<Vec2>> groups;
        std::vector<int> parents;
        for (int e = 0; e < fine.n_elements(); ++e) {
            const auto& el = fine.elements[e];
            auto mapped = map_rule_triangle(rule, fine.vertices[el[0]], fine.vertices[el[1]],
                                            fine.vertices[el[2]]);
            groups.push_back(mapped.points);
            parents.push_back(fine.parent_map[e]);
        }
        auto mats = build_interpolation_matrices(space, groups, parents);
        std::vector<double> ones(space.n_nodes(), 1.0);
        auto v = mats.values.multiply(ones);
        auto dx = mats.dx.multiply(ones);
        double worst = 0.0;
        for (int i = 0; i < mats.n_points; ++i) {
            worst = std::max(worst, std::abs(v[i] - 1.0));
            worst = std::max(worst, std::abs(dx[i]) * 1e-2);
        }
        check(worst <= 1e-12, "interpolation partition of unity (k_int=4)");
    }

    // manufactured-data consistency of every registered case
    for (const auto& name : registered_case_names()) {
        auto tc = case_by_name(name);
        double err = manufactured_consistency_error(tc.problem, 100, 12345);
        check(err <= 1e-6, "case '" + name + "' manufactured-data consistency");
    }
    return ok;
}

}  // namespace ivpinn
