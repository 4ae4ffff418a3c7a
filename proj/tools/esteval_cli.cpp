// Command line front end; talks to the library exclusively through the C API.
#include <esteval/esteval.h>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct StringOut {
    char* p = nullptr;
    ~StringOut() { esteval_string_free(p); }
};

struct ConfigHandle {
    esteval_config* c = nullptr;
    ~ConfigHandle() { esteval_config_free(c); }
};

int exit_for(esteval_status s) {
    if (s == ESTEVAL_OK) return kExitOk;
    return s == ESTEVAL_E_CONFIG ? kExitConfig : kExitRuntime;
}

int fail(esteval_status s) {
    std::fprintf(stderr, "error: %s\n", esteval_last_error());
    return exit_for(s);
}

struct Overrides {
    std::string config_path;
    std::string out_dir;
    uint64_t seed = 0;
    uint64_t replications = 0;
    uint64_t threads = 0;
};

void add_common_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "experiment config (json)")->required();
    cmd->add_option("--seed", o.seed, "override the master seed");
    cmd->add_option("--replications", o.replications, "override the replication count");
    cmd->add_option("--out", o.out_dir, "override the output directory");
    cmd->add_option("--threads", o.threads, "worker threads");
}

int load_with_overrides(const Overrides& o, const CLI::App* cmd, ConfigHandle& cfg) {
    esteval_status s = esteval_config_load(o.config_path.c_str(), &cfg.c);
    if (s != ESTEVAL_OK) return fail(s);
    if (cmd->count("--seed") && (s = esteval_config_set_seed(cfg.c, o.seed)) != ESTEVAL_OK)
        return fail(s);
    if (cmd->count("--replications") &&
        (s = esteval_config_set_replications(cfg.c, o.replications)) != ESTEVAL_OK)
        return fail(s);
    if (cmd->count("--out") &&
        (s = esteval_config_set_output_dir(cfg.c, o.out_dir.c_str())) != ESTEVAL_OK)
        return fail(s);
    if (cmd->count("--threads") &&
        (s = esteval_config_set_threads(cfg.c, o.threads)) != ESTEVAL_OK)
        return fail(s);
    return kExitOk;
}

int report_issues(esteval_config* cfg) {
    StringOut issues;
    esteval_status s = esteval_config_validate(cfg, &issues.p);
    if (s != ESTEVAL_OK) return fail(s);
    if (issues.p[0] != '\0') {
        std::fprintf(stderr, "config issues:\n%s\n", issues.p);
        return kExitConfig;
    }
    return kExitOk;
}

int cmd_validate(const Overrides& o, const CLI::App* cmd) {
    ConfigHandle cfg;
    if (int rc = load_with_overrides(o, cmd, cfg); rc != kExitOk) return rc;
    if (int rc = report_issues(cfg.c); rc != kExitOk) return rc;
    std::printf("config ok\n");
    return kExitOk;
}

int cmd_run(const Overrides& o, const CLI::App* cmd) {
    ConfigHandle cfg;
    if (int rc = load_with_overrides(o, cmd, cfg); rc != kExitOk) return rc;
    if (int rc = report_issues(cfg.c); rc != kExitOk) return rc;
    StringOut report;
    esteval_status s = esteval_run(cfg.c, &report.p);
    if (s != ESTEVAL_OK) return fail(s);
    std::printf("report written\n");
    return kExitOk;
}

int cmd_report(const std::string& report_path) {
    std::ifstream in(report_path, std::ios::binary);
    if (!in) {
        std::fprintf(stderr, "error: cannot open %s\n", report_path.c_str());
        return kExitConfig;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    StringOut csv;
    esteval_status s = esteval_render_table(text.c_str(), &csv.p);
    if (s != ESTEVAL_OK) return fail(s);
    std::fputs(csv.p, stdout);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"evaluation experiment runner"};
    app.require_subcommand(1);

    Overrides validate_opts, run_opts;
    CLI::App* validate = app.add_subcommand("validate", "check a config without running it");
    add_common_flags(validate, validate_opts);
    CLI::App* run = app.add_subcommand("run", "execute an experiment and write its artifacts");
    add_common_flags(run, run_opts);

    std::string report_path;
    CLI::App* report = app.add_subcommand("report", "render the summary table of a report.json");
    report->add_option("--report", report_path, "path to report.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    if (validate->parsed()) return cmd_validate(validate_opts, validate);
    if (run->parsed()) return cmd_run(run_opts, run);
    if (report->parsed()) return cmd_report(report_path);
    return kExitConfig;
}
