// Copyright 2026 The qsmlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "qsm/cli.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qsm/config.hpp"
#include "qsm/error.hpp"
#include "qsm/experiments.hpp"

namespace qsm {

namespace {

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::ConfigError:
        case ErrorCode::EmptyShell:
        case ErrorCode::TooLarge:
        case ErrorCode::DecompositionIncompatible:
        case ErrorCode::IndexOutOfRange:
        case ErrorCode::InvalidArgument:
        case ErrorCode::OffGrid:
            return kExitConfig;
        case ErrorCode::IoError:
            return kExitIo;
        default:
            return kExitNumerical;
    }
}

void report(std::ostream& err, const std::string& kind, const std::string& message, const std::string& field) {
    err << nlohmann::json{{"error", kind}, {"message", message}, {"field", field}}.dump() << '\n';
}

struct Args {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    int threads = 1;
};

void add_common(CLI::App* sub, Args& a) {
    sub->add_option("--config", a.config, "scenario config (JSON)")->required();
    sub->add_option("--seed", a.seed, "override the master seed");
    sub->add_option("--out", a.out, "override the output directory");
    sub->add_option("--threads", a.threads, "worker threads")->check(CLI::Range(1, 256));
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"qsmlab: quantum statistical mechanics scenarios"};
    app.require_subcommand(1);
    Args args;
    const char* names[] = {"entropy", "equivalence", "grw", "bohm", "decompose", "validate"};
    const char* help[] = {"macro-weight and entropy traces for sampled states and W_IPH",
                          "ensemble average versus the initial projection",
                          "first-flash statistics of W-GRW and Psi-GRW",
                          "Bohmian trajectories and equivariance",
                          "print the macrostructure as JSON",
                          "check a config without running"};
    for (int i = 0; i < 6; ++i) add_common(app.add_subcommand(names[i], help[i]), args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        report(err, "UsageError", e.what(), "");
        return kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        ScenarioConfig cfg = load_config(args.config);
        if (args.seed) override_seed(cfg, *args.seed);
        if (args.out) override_output_dir(cfg, *args.out);
        if (command == "validate") {
            const Scenario sc(cfg);
            out << nlohmann::json{{"valid", true}, {"config_hash", config_hash(cfg)}}.dump() << '\n';
            return kExitOk;
        }
        if (command == "decompose") {
            out << decompose_summary(cfg).dump(2) << '\n';
            return kExitOk;
        }
        const RunOptions opts{args.threads, true};
        RunRecord rec;
        if (command == "entropy") rec = run_entropy_experiment(cfg, opts);
        else if (command == "equivalence") rec = run_equivalence_experiment(cfg, opts);
        else if (command == "grw") rec = run_grw_equivalence(cfg, opts);
        else rec = run_bohm_experiment(cfg, opts);
        nlohmann::json summary = rec.manifest();
        summary["output_dir"] = cfg.output_dir;
        summary["results"].erase("samples");
        out << summary.dump(2) << '\n';
        return kExitOk;
    } catch (const Error& e) {
        report(err, std::string(to_string(e.code())), e.what(), e.field());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        report(err, "InternalError", e.what(), "");
        return kExitNumerical;
    }
}

}  // namespace qsm
