#include <filesystem>
#include <iostream>

#include "cli.hpp"
#include "pcqa/util/errors.hpp"

int main(int argc, char** argv) {
    using namespace pcqa;
    CLI::App app{"Point cloud quality assessment toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    app.set_version_flag("--version", "pcqa 1.0.0");

    cli::Globals g;
    app.add_option("--adapter", g.adapter, "Codec adapter: config file, name on PCQA_ADAPTER_PATH, or 'mock'")
        ->envname("PCQA_ADAPTER");
    app.add_option("--seed", g.seed, "Seed for every randomized step");
    app.add_option("--jobs", g.jobs, "Worker threads (0 = all cores)");
    app.add_option("--out", g.out, "Output directory (default: standard output)");

    cli::add_metric_commands(app, g);
    cli::add_codec_commands(app, g);
    cli::add_stats_commands(app, g);
    cli::add_session_commands(app, g);

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const Error& e) {
        std::cerr << "pcqa: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::Validation: return 1;
            case ErrorKind::Environment: return 2;
            case ErrorKind::Internal: return 3;
        }
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "pcqa: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "pcqa: internal error: " << e.what() << "\n";
        return 3;
    }
}
