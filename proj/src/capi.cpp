#include "ivpinn.h"

#include <cstring>
#include <new>
#include <string>

#include "ivpinn/experiment.hpp"
#include "ivpinn/problem.hpp"

namespace {

void put_message(char* buf, int len, const std::string& msg) {
    if (buf == nullptr || len <= 0) return;
    std::size_t n = std::min<std::size_t>(msg.size(), static_cast<std::size_t>(len) - 1);
    std::memcpy(buf, msg.data(), n);
    buf[n] = '\0';
}

template <typename Fn>
int guarded(char* errmsg, int errmsg_len, Fn&& fn) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        put_message(errmsg, errmsg_len, e.what());
        return IVPINN_ERR_INVALID_ARGUMENT;
    } catch (const std::exception& e) {
        put_message(errmsg, errmsg_len, e.what());
        return IVPINN_ERR_RUNTIME;
    } catch (...) {
        put_message(errmsg, errmsg_len, "unknown error");
        return IVPINN_ERR_RUNTIME;
    }
}

}  // namespace

struct ivpinn_run {
    ivpinn::ExperimentConfig config;
    std::string out_dir_override;
    ivpinn::RunSummary summary;
    bool executed = false;
};

extern "C" {

const char* ivpinn_version(void) { return "0.1.0"; }

const char* ivpinn_error_name(int code) {
    switch (code) {
        case IVPINN_OK: return "ok";
        case IVPINN_ERR_INVALID_ARGUMENT: return "invalid argument";
        case IVPINN_ERR_RUNTIME: return "runtime error";
        case IVPINN_ERR_CONFIG: return "config error";
        case IVPINN_ERR_PARTIAL: return "partial failure";
        default: return "unknown code";
    }
}

int ivpinn_run_create(const char* config_path, ivpinn_run** out, char* errmsg, int errmsg_len) {
    if (config_path == nullptr || out == nullptr) {
        put_message(errmsg, errmsg_len, "null argument");
        return IVPINN_ERR_INVALID_ARGUMENT;
    }
    *out = nullptr;
    return guarded(errmsg, errmsg_len, [&]() {
        auto* run = new (std::nothrow) ivpinn_run;
        if (run == nullptr) {
            put_message(errmsg, errmsg_len, "out of memory");
            return IVPINN_ERR_RUNTIME;
        }
        try {
            run->config = ivpinn::ExperimentConfig::from_file(config_path);
            run->config.validate();
        } catch (const std::exception& e) {
            delete run;
            put_message(errmsg, errmsg_len, e.what());
            return IVPINN_ERR_CONFIG;
        }
        *out = run;
        return IVPINN_OK;
    });
}

int ivpinn_run_set_out_dir(ivpinn_run* run, const char* out_dir, char* errmsg, int errmsg_len) {
    if (run == nullptr || out_dir == nullptr) {
        put_message(errmsg, errmsg_len, "null argument");
        return IVPINN_ERR_INVALID_ARGUMENT;
    }
    run->out_dir_override = out_dir;
    return IVPINN_OK;
}

int ivpinn_run_execute(ivpinn_run* run, char* errmsg, int errmsg_len) {
    if (run == nullptr) {
        put_message(errmsg, errmsg_len, "null run");
        return IVPINN_ERR_INVALID_ARGUMENT;
    }
    return guarded(errmsg, errmsg_len, [&]() {
        run->summary = ivpinn::run_experiment(run->config, run->out_dir_override);
        run->executed = true;
        if (run->summary.exit_code == 2) {
            put_message(errmsg, errmsg_len,
                        run->summary.log.empty() ? "config error" : run->summary.log.back());
            return IVPINN_ERR_CONFIG;
        }
        if (run->summary.exit_code == 1) {
            put_message(errmsg, errmsg_len,
                        run->summary.log.empty() ? "some rows failed" : run->summary.log.back());
            return IVPINN_ERR_PARTIAL;
        }
        return IVPINN_OK;
    });
}

int ivpinn_run_row_count(const ivpinn_run* run, int* n) {
    if (run == nullptr || n == nullptr) return IVPINN_ERR_INVALID_ARGUMENT;
    *n = static_cast<int>(run->summary.table.rows.size());
    return IVPINN_OK;
}

int ivpinn_run_col_count(const ivpinn_run* run, int* n) {
    if (run == nullptr || n == nullptr) return IVPINN_ERR_INVALID_ARGUMENT;
    *n = static_cast<int>(run->summary.table.columns.size());
    return IVPINN_OK;
}

int ivpinn_run_col_name(const ivpinn_run* run, int col, char* buf, int buf_len) {
    if (run == nullptr || buf == nullptr) return IVPINN_ERR_INVALID_ARGUMENT;
    if (col < 0 || col >= static_cast<int>(run->summary.table.columns.size()))
        return IVPINN_ERR_INVALID_ARGUMENT;
    put_message(buf, buf_len, run->summary.table.columns[col]);
    return IVPINN_OK;
}

int ivpinn_run_value(const ivpinn_run* run, int row, int col, double* out) {
    if (run == nullptr || out == nullptr) return IVPINN_ERR_INVALID_ARGUMENT;
    const auto& rows = run->summary.table.rows;
    if (row < 0 || row >= static_cast<int>(rows.size())) return IVPINN_ERR_INVALID_ARGUMENT;
    if (col < 0 || col >= static_cast<int>(rows[row].size())) return IVPINN_ERR_INVALID_ARGUMENT;
    *out = rows[row][col];
    return IVPINN_OK;
}

int ivpinn_run_fitted_rate(const ivpinn_run* run, double* out) {
    if (run == nullptr || out == nullptr) return IVPINN_ERR_INVALID_ARGUMENT;
    if (!run->summary.rate_defined) return IVPINN_ERR_RUNTIME;
    *out = run->summary.fitted_rate;
    return IVPINN_OK;
}

int ivpinn_run_exit_code(const ivpinn_run* run, int* out) {
    if (run == nullptr || out == nullptr) return IVPINN_ERR_INVALID_ARGUMENT;
    *out = run->executed ? run->summary.exit_code : -1;
    return IVPINN_OK;
}

int ivpinn_run_file_count(const ivpinn_run* run, int* n) {
    if (run == nullptr || n == nullptr) return IVPINN_ERR_INVALID_ARGUMENT;
    *n = static_cast<int>(run->summary.files_written.size());
    return IVPINN_OK;
}

int ivpinn_run_file_path(const ivpinn_run* run, int i, char* buf, int buf_len) {
    if (run == nullptr || buf == nullptr) return IVPINN_ERR_INVALID_ARGUMENT;
    if (i < 0 || i >= static_cast<int>(run->summary.files_written.size()))
        return IVPINN_ERR_INVALID_ARGUMENT;
    put_message(buf, buf_len, run->summary.files_written[i]);
    return IVPINN_OK;
}

void ivpinn_run_destroy(ivpinn_run* run) { delete run; }

int ivpinn_list_cases(char* buf, int buf_len) {
    if (buf == nullptr) return IVPINN_ERR_INVALID_ARGUMENT;
    return guarded(nullptr, 0, [&]() {
        std::string joined;
        for (const auto& name : ivpinn::registered_case_names()) {
            joined += name;
            joined += '\n';
        }
        put_message(buf, buf_len, joined);
        return IVPINN_OK;
    });
}

int ivpinn_self_check(char* buf, int buf_len) {
    return guarded(buf, buf_len, [&]() {
        std::vector<std::string> log;
        bool ok = ivpinn::run_self_check(log);
        std::string joined;
        for (const auto& line : log) {
            joined += line;
            joined += '\n';
        }
        put_message(buf, buf_len, joined);
        return ok ? IVPINN_OK : IVPINN_ERR_RUNTIME;
    });
}

}  // extern "C"
