#include "lienard/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace lienard;

int main(int argc, char** argv)
{
    CLI::App app{"Quadratic Lienard oscillators: scenario runner"};
    app.require_subcommand(1);

    cli::RunOptions opt;
    std::string config;
    auto* run = app.add_subcommand("run", "run a scenario file");
    run->add_option("config", config, "scenario JSON")->required();
    run->add_option("--jobs", opt.jobs, "parallel jobs")->check(CLI::PositiveNumber);
    run->add_option("--out", opt.out, "output directory (overrides config and LIENARD_OUT)");
    run->add_option("--tol-scale", opt.tol_scale, "multiplier for every declared tolerance")->check(CLI::PositiveNumber);

    std::string type_filter;
    int dim_filter = 0;
    auto* list = app.add_subcommand("list", "list catalog models");
    list->add_option("--lienard-type", type_filter, "I or II");
    list->add_option("--dimension", dim_filter, "1 or 3");

    std::string manifest, json_out;
    auto* report = app.add_subcommand("report", "summarize a manifest");
    report->add_option("manifest", manifest, "manifest.json")->required();
    report->add_option("--json", json_out, "write the machine summary here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto s = cli::load_scenario(config);
            auto sum = cli::run_scenario(s, opt);
            for (const auto& r : sum.results) {
                std::cout << (r.status == "ok" ? "ok      " : "FAILED  ") << r.id;
                if (!r.error.empty())
                    std::cout << "  " << r.error;
                std::cout << "\n";
            }
            std::cout << "manifest: " << sum.manifest.string() << "\n";
            return sum.ok ? 0 : 1;
        }
        if (*list) {
            std::optional<int> t, d;
            if (!type_filter.empty()) {
                if (type_filter != "I" && type_filter != "II")
                    fail(Errc::ConfigError, "--lienard-type must be I or II");
                t = type_filter == "II" ? 2 : 1;
            }
            if (dim_filter)
                d = dim_filter;
            std::cout << cli::format_models(cli::list_models(t, d));
            return 0;
        }
        auto rep = cli::emit_report(nlohmann::json::parse(cli::read_file(manifest)));
        std::cout << rep.text;
        if (!json_out.empty())
            std::ofstream(json_out) << rep.summary.dump(2) << "\n";
        return rep.ok ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return e.code == Errc::ConfigError ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
}
