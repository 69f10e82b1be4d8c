#include <atomic>
#include <chrono>
#include <csignal>
#include <memory>
#include <thread>

#include "cli.hpp"
#include "pcqa/core/ply.hpp"
#include "pcqa/session/server.hpp"
#include "pcqa/util/errors.hpp"

namespace pcqa::cli {

namespace fs = std::filesystem;

namespace {

struct CatalogArgs {
    std::string catalog;
    std::vector<std::string> contents;
    std::string assets;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--catalog", catalog, "File listing one stimulus id per line");
        cmd->add_option("--contents", contents, "Contents expanded to the full codec x rate x strategy design")
            ->delimiter(',');
    }
    std::vector<StimulusMeta> load() const { return load_catalog(catalog, contents, assets); }
};

struct PlanArgs {
    CatalogArgs catalog;
    std::string protocol = "dsis";
    int parts = 1;
    bool mixed = false;
};

void run_plan(const PlanArgs& a, const Globals& g) {
    PlanOptions o;
    o.parts = a.parts;
    o.separate_contents = !a.mixed;
    const auto plan = generate_plan(parse_protocol(a.protocol), a.catalog.load(), g.seed, o);
    Output out(g, "plan.json");
    out.stream() << to_json(plan).dump(2) << "\n";
    out.finish();
}

struct ServeArgs {
    CatalogArgs catalog;
    std::string sessions;
    std::string host = "127.0.0.1";
    int port = 8080;
};

std::atomic<bool> g_interrupted{false};
extern "C" void on_signal(int) { g_interrupted = true; }

void run_serve(const ServeArgs& a) {
    std::shared_ptr<AssetStore> assets;
    if (!a.catalog.assets.empty()) {
        if (!fs::is_directory(a.catalog.assets))
            throw EnvironmentError("asset directory '" + a.catalog.assets + "' does not exist");
        assets = std::make_shared<AssetStore>(a.catalog.assets);
    }
    SessionStore store(a.sessions, a.catalog.load());
    SessionServer server(store, assets);
    const int port = server.bind(a.host, a.port);
    std::cerr << "serving on http://" << a.host << ":" << port << " (" << store.catalog().size() << " stimuli, "
              << store.sessions().size() << " sessions restored)\n";

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::thread watcher([&server] {
        while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        server.stop();
    });
    server.run();
    g_interrupted = true;
    watcher.join();
}

void run_export(const CatalogArgs& c, const std::string& sessions, const std::vector<std::string>& ids, Globals g) {
    if (!fs::is_directory(sessions)) throw EnvironmentError("session directory '" + sessions + "' does not exist");
    if (g.out.empty()) g.out = ".";
    SessionStore store(sessions, c.load());
    const auto files = store.export_results(ids);
    Output dsis(g, "dsis_scores.csv");
    dsis.stream() << files.dsis_csv;
    dsis.finish();
    Output pwc(g, "pwc_votes.jsonl");
    pwc.stream() << files.pwc_jsonl;
    pwc.finish();
}

void run_pack(const std::string& in, std::string out_path, const std::optional<int>& bit_depth, const Globals& g) {
    const auto cloud = load_ply(in, bit_depth);
    const auto bytes = pack_points(cloud);
    if (out_path.empty()) {
        Globals files = g;
        if (files.out.empty()) files.out = ".";
        Output out(files, fs::path(in).stem().string() + ".bin");
        out.stream() << bytes;
        out.finish();
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    f << bytes;
    f.flush();
    if (!f) throw EnvironmentError("cannot write '" + out_path + "'");
}

}  // namespace

void add_session_commands(CLI::App& app, Globals& g) {
    {
        auto a = std::make_shared<PlanArgs>();
        auto* cmd = app.add_subcommand("plan", "Randomized playlist for one subject (JSON)");
        cmd->add_option("--protocol", a->protocol, "dsis or pwc");
        cmd->add_option("--parts", a->parts, "1 or 2 parts balanced by codec and rate");
        cmd->add_flag("--mixed", a->mixed, "Allow the same content in consecutive trials");
        a->catalog.add_to(cmd);
        cmd->add_option("--assets", a->catalog.assets, "Take the catalog from the PLY files in this directory");
        cmd->final_callback([a, &g] { run_plan(*a, g); });
    }
    {
        auto a = std::make_shared<ServeArgs>();
        auto* cmd = app.add_subcommand("serve", "HTTP session service for the experiment client");
        cmd->add_option("--sessions", a->sessions, "Directory of session logs")->required();
        cmd->add_option("--assets", a->catalog.assets, "Directory of stimulus PLY files");
        cmd->add_option("--host", a->host, "Listen address");
        cmd->add_option("--port", a->port, "Listen port (0 picks a free one)")->check(CLI::Range(0, 65535));
        a->catalog.add_to(cmd);
        cmd->final_callback([a] { run_serve(*a); });
    }
    {
        auto c = std::make_shared<CatalogArgs>();
        auto sessions = std::make_shared<std::string>();
        auto ids = std::make_shared<std::vector<std::string>>();
        auto* cmd = app.add_subcommand("export", "Write dsis_scores.csv and pwc_votes.jsonl from closed sessions");
        cmd->add_option("--sessions", *sessions, "Directory of session logs")->required();
        cmd->add_option("--ids", *ids, "Sessions to export (default: all)")->delimiter(',');
        cmd->add_option("--assets", c->assets, "Take the catalog from the PLY files in this directory");
        c->add_to(cmd);
        cmd->final_callback([c, sessions, ids, &g] { run_export(*c, *sessions, *ids, g); });
    }
    {
        auto in = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto depth = std::make_shared<std::optional<int>>();
        auto* cmd = app.add_subcommand("pack", "Convert a PLY file to the packed browser asset format");
        cmd->add_option("input", *in, "PLY file")->required();
        cmd->add_option("output", *out, "Packed file (default: <out>/<stem>.bin)");
        cmd->add_option("--bit-depth", *depth, "Content precision override");
        cmd->final_callback([in, out, depth, &g] { run_pack(*in, *out, *depth, g); });
    }
}

}  // namespace pcqa::cli
