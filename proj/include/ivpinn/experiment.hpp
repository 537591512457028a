#pragma once

#include <limits>
#include <string>
#include <vector>

#include "ivpinn/config_file.hpp"
#include "ivpinn/training.hpp"

namespace ivpinn {

/// Experiment description parsed from a config file. Modes:
///   ivpinn          train the interpolated network over a mesh sequence
///   vpinn           train the non-interpolated variant over a mesh sequence
///   oracle-interp   measure the interpolation error of the exact solution
///   infsup          inf-sup / norm-equivalence diagnostics over the sequence
///   zero-data       stability study on the zero problem (1D by default)
///   parametric      one network over a family of parameter values
///   hyperparam-sweep  error vs (layers, width) grid on one fixed mesh
struct ExperimentConfig {
    std::string case_name = "smooth";
    std::string mode = "ivpinn";
    int k_test = 1;
    int q = 3;
    std::vector<int> nx_list = {2, 4};
    std::string mesh_file;  // optional: import the coarse mesh (single row)

    int net_layers = 3;
    int net_width = 20;
    TrainingConfig training;
    std::uint64_t seed = 1;

    std::vector<int> sweep_layers = {1, 2, 3, 4, 5};
    std::vector<int> sweep_widths = {1, 5, 10, 20, 30, 50};
    int sweep_nx = 4;

    int par_n_train = 13;
    int par_n_eval = 50;
    int par_nx = 8;
    double par_p_min = 0.5;
    double par_p_max = 2.0;

    std::string out_dir;
    bool dump_system_flag = false;
    bool parallel_rows = false;

    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_kv(const KeyValueConfig& kv);
    void validate() const;  // throws std::invalid_argument on bad combinations
};

struct RunTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct RunSummary {
    int exit_code = 0;  // 0 success, 1 partial failure, 2 config error
    RunTable table;
    double fitted_rate = std::numeric_limits<double>::quiet_NaN();
    bool rate_defined = false;
    std::vector<std::string> files_written;
    std::vector<std::string> log;
};

/// Executes the experiment, writing CSVs, checkpoints and a manifest under
/// the output directory. Per-row failures are logged and skipped; the exit
/// code reflects them. out_dir_override, when nonempty, wins over the config
/// and the IVPINN_OUT environment variable.
RunSummary run_experiment(const ExperimentConfig& cfg, const std::string& out_dir_override = "");

/// Consistency/exactness self-tests behind the `check` CLI subcommand:
/// quadrature exactness, interpolation partition of unity, manufactured-data
/// checks of every registered case. Returns true when everything passes.
bool run_self_check(std::vector<std::string>& log);

}  // namespace ivpinn
