#include <memory>

#include "cli.hpp"
#include "pcqa/core/ply.hpp"
#include "pcqa/metrics/metrics.hpp"

namespace pcqa::cli {

namespace {

struct MetricArgs {
    std::string reference;
    std::string decoded;
    std::string bitstream;
    bool color = false;
    bool no_color = false;
    std::optional<int> bit_depth;
    std::size_t neighbors = kDefaultNormalNeighbors;
    ReportLabels labels;
};

void run_metric(const MetricArgs& a, const Globals& g) {
    MetricOptions opts;
    opts.bit_depth = a.bit_depth;
    opts.normal_neighbors = a.neighbors;
    opts.jobs = g.workers();
    if (a.color) opts.color = true;
    if (a.no_color) opts.color = false;

    const auto ref = load_ply(a.reference, a.bit_depth);
    const auto dec = load_ply(a.decoded, a.bit_depth ? a.bit_depth : std::optional<int>(ref.bit_depth()));
    const std::uint64_t bytes = a.bitstream.empty() ? 0 : file_size_of(a.bitstream);
    const auto report = evaluate_triple(ref, dec, bytes, opts);

    ReportLabels labels = a.labels;
    if (labels.content.empty()) labels.content = std::filesystem::path(a.reference).stem().string();
    Output out(g, "metrics.csv");
    out.stream() << metric_csv_header() << "\n" << metric_csv_row(labels, report) << "\n";
    out.finish();
}

}  // namespace

void add_metric_commands(CLI::App& app, Globals& g) {
    auto args = std::make_shared<MetricArgs>();
    auto* cmd = app.add_subcommand("metric", "D1/D2/Y/YUV PSNR and bitrate of one decoded cloud");
    cmd->add_option("reference", args->reference, "Reference PLY")->required();
    cmd->add_option("decoded", args->decoded, "Decoded PLY")->required();
    cmd->add_option("bitstream", args->bitstream, "Bitstream file (its size sets the bitrate; omit for 0)");
    auto* c = cmd->add_flag("--color", args->color, "Require color metrics");
    cmd->add_flag("--no-color", args->no_color, "Skip color metrics")->excludes(c);
    cmd->add_option("--bit-depth", args->bit_depth, "Geometry precision for the PSNR peak")->check(CLI::Range(1, 30));
    cmd->add_option("--normals-k", args->neighbors, "Neighbors for reference normal estimation")
        ->check(CLI::Range(3, 1000));
    cmd->add_option("--content", args->labels.content, "Content label (default: reference file stem)");
    cmd->add_option("--codec", args->labels.codec, "Codec label");
    cmd->add_option("--rate", args->labels.rate, "Rate label");
    cmd->add_option("--strategy", args->labels.strategy, "Strategy label");
    cmd->final_callback([args, &g] { run_metric(*args, g); });
}

}  // namespace pcqa::cli
