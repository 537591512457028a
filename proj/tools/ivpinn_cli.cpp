// Experiment driver built on the C API of the ivpinn shared library.
#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "ivpinn.h"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_dir) {
    char err[1024] = {0};
    ivpinn_run* run = nullptr;
    int rc = ivpinn_run_create(config_path.c_str(), &run, err, sizeof err);
    if (rc != IVPINN_OK) {
        std::fprintf(stderr, "error (%s): %s\n", ivpinn_error_name(rc), err);
        return 2;
    }
    if (!out_dir.empty()) ivpinn_run_set_out_dir(run, out_dir.c_str(), err, sizeof err);

    rc = ivpinn_run_execute(run, err, sizeof err);
    if (rc == IVPINN_ERR_CONFIG) {
        std::fprintf(stderr, "config error: %s\n", err);
        ivpinn_run_destroy(run);
        return 2;
    }
    if (rc == IVPINN_ERR_RUNTIME || rc == IVPINN_ERR_INVALID_ARGUMENT) {
        std::fprintf(stderr, "error (%s): %s\n", ivpinn_error_name(rc), err);
        ivpinn_run_destroy(run);
        return 1;
    }
    if (rc == IVPINN_ERR_PARTIAL) std::fprintf(stderr, "warning, some rows failed: %s\n", err);

    int n_rows = 0, n_cols = 0;
    ivpinn_run_row_count(run, &n_rows);
    ivpinn_run_col_count(run, &n_cols);
    for (int c = 0; c < n_cols; ++c) {
        char name[64];
        ivpinn_run_col_name(run, c, name, sizeof name);
        std::printf("%s%s", c ? "," : "", name);
    }
    std::printf("\n");
    for (int r = 0; r < n_rows; ++r) {
        for (int c = 0; c < n_cols; ++c) {
            double v = 0.0;
            ivpinn_run_value(run, r, c, &v);
            std::printf("%s%.10g", c ? "," : "", v);
        }
        std::printf("\n");
    }
    double rate = 0.0;
    if (ivpinn_run_fitted_rate(run, &rate) == IVPINN_OK) std::printf("fitted_rate,%.6g\n", rate);

    int n_files = 0;
    ivpinn_run_file_count(run, &n_files);
    for (int i = 0; i < n_files; ++i) {
        char path[4096];
        ivpinn_run_file_path(run, i, path, sizeof path);
        std::fprintf(stderr, "wrote %s\n", path);
    }

    int exit_code = 0;
    ivpinn_run_exit_code(run, &exit_code);
    ivpinn_run_destroy(run);
    return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ivpinn experiment driver"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    auto* run_cmd = app.add_subcommand("run", "run an experiment from a config file");
    run_cmd->add_option("config", config_path, "config file")->required();
    run_cmd->add_option("--out-dir", out_dir, "output directory (default: config, then $IVPINN_OUT)");

    auto* list_cmd = app.add_subcommand("list-cases", "list the built-in test cases");
    auto* check_cmd = app.add_subcommand("check", "run the consistency/exactness self-tests");

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) return cmd_run(config_path, out_dir);

    if (list_cmd->parsed()) {
        char buf[1024];
        if (ivpinn_list_cases(buf, sizeof buf) != IVPINN_OK) return 1;
        std::printf("%s", buf);
        return 0;
    }

    if (check_cmd->parsed()) {
        char buf[8192];
        int rc = ivpinn_self_check(buf, sizeof buf);
        std::printf("%s", buf);
        std::printf(rc == IVPINN_OK ? "self-check passed\n" : "self-check FAILED\n");
        return rc == IVPINN_OK ? 0 : 1;
    }
    return 2;
}
