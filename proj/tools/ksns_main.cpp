// Command-line driver: run experiments from a config file, compute a
// Wasserstein distance between two stored fields, or re-evaluate the
// inequality ledger on a stored trajectory.
//
// Exit codes: 0 pass, 1 check failure, 2 usage/config error, 3 numerical abort.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "ksns/runner.hpp"

namespace {

int dispatch(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ksns::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ksns::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << '\n';
        return 2;
    } catch (const ksns::NumericError& e) {
        std::cerr << "numerical abort: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ksns: chemotaxis-fluid solvers with verified a priori estimates"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run an experiment config");
    std::string config_path, outdir;
    run->add_option("--config", config_path, "flat key = value config file")->required();
    run->add_option("--out", outdir, "output directory (default: config's 'out')");

    auto* w2 = app.add_subcommand("w2", "distance between two KSNS1 density files");
    std::string field_a, field_b;
    double sinkhorn_eps = 0.0;
    bool exact = false;
    w2->add_option("a", field_a, "first field file")->required();
    w2->add_option("b", field_b, "second field file")->required();
    w2->add_flag("--exact", exact, "force the exact solver");
    w2->add_option("--sinkhorn", sinkhorn_eps, "entropic solver with this epsilon");

    auto* ledger = app.add_subcommand("ledger", "recompute the ledger for a trajectory");
    std::string traj_dir, ledger_out;
    ledger->add_option("--traj", traj_dir, "directory with config.resolved and fields")
        ->required();
    ledger->add_option("--out", ledger_out, "output directory (default: --traj)");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        return dispatch([&] {
            std::ifstream in(config_path);
            if (!in) throw ksns::ConfigError("cannot open config: " + config_path);
            std::stringstream ss;
            ss << in.rdbuf();
            ksns::ExperimentConfig cfg = ksns::parse_config(ss.str());
            std::string dir = outdir.empty() ? cfg.out : outdir;
            return ksns::run_experiment(cfg, dir, std::cout);
        });
    }
    if (w2->parsed()) {
        return dispatch([&] {
            std::string method = "auto";
            if (exact && sinkhorn_eps > 0.0)
                throw ksns::ConfigError("choose one of --exact / --sinkhorn");
            if (exact) method = "exact";
            if (sinkhorn_eps > 0.0) method = "sinkhorn";
            double d = ksns::w2_files(field_a, field_b, method, sinkhorn_eps);
            std::cout << ksns::fmt_g17(d) << '\n';
            return 0;
        });
    }
    if (ledger->parsed()) {
        return dispatch([&] {
            ksns::ExperimentConfig cfg;
            cfg.mode = "ledger";
            cfg.traj_dir = traj_dir;
            std::string dir = ledger_out.empty() ? traj_dir : ledger_out;
            return ksns::run_experiment(cfg, dir, std::cout);
        });
    }
    return 2;
}
