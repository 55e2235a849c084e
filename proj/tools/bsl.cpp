#include <bsl/bsl.hpp>

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

namespace {

int exit_code(bsl::ErrorKind k) {
    switch (k) {
    case bsl::ErrorKind::Config:
    case bsl::ErrorKind::Format:
    case bsl::ErrorKind::Domain:
    case bsl::ErrorKind::Io: return 2;
    default: return 3;
    }
}

void print_table(const bsl::Table& t) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) std::cout << (i ? "," : "") << t.columns[i];
    std::cout << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) std::cout << ',';
            if (std::holds_alternative<double>(r[i]))
                std::cout << bsl::format_number(std::get<double>(r[i]));
            else
                std::cout << std::get<std::string>(r[i]);
        }
        std::cout << '\n';
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shear-flow Boussinesq stability lab"};
    app.set_version_flag("--version", BSL_VERSION);
    std::string command, config, out, format = "csv";
    unsigned jobs = 1;
    std::uint64_t seed = 0;
    std::vector<std::string> names;
    for (const auto& [n, c] : bsl::command_names()) names.push_back(n);
    app.add_option("command", command, "eigen|exponents|mode|coupled|admit|simulate|threshold|scaling")
        ->required()
        ->check(CLI::IsMember(names));
    app.add_option("--config", config, "JSON config file")->required();
    app.add_option("--out", out, "output directory");
    app.add_option("--jobs", jobs, "worker threads for sweep points")->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", seed, "base seed (overrides the config)");
    app.add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        bsl::ExperimentConfig cfg;
        cfg.command = bsl::parse_command(command);
        cfg.params = bsl::load_config(config);
        cfg.config_dir = std::filesystem::path(config).parent_path();
        cfg.jobs = jobs;
        cfg.seed = seed_opt->count() ? seed : bsl::config_get<std::uint64_t>(cfg.params, "seed", 1);
        cfg.out_dir = out;
        cfg.format = format == "json" ? bsl::ExportFormat::json : bsl::ExportFormat::csv;

        const auto r = bsl::run_experiment(cfg);
        if (!out.empty())
            bsl::write_result(r, out, cfg.format);
        else
            print_table(r.table);
        for (const auto& f : r.failures) std::cerr << "bsl: " << f << '\n';
        if (r.instability) {
            std::cerr << "bsl: instability observed\n";
            return 4;
        }
        return r.numerical_failure ? 3 : 0;
    } catch (const bsl::Error& e) {
        std::cerr << "bsl: " << bsl::to_string(e.kind()) << " error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "bsl: " << e.what() << '\n';
        return 3;
    }
}
