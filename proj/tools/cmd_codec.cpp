#include <cmath>
#include <map>
#include <memory>

#include "cli.hpp"
#include "pcqa/codec/ctc_tables.hpp"
#include "pcqa/core/ply.hpp"
#include "pcqa/util/csv.hpp"
#include "pcqa/util/errors.hpp"
#include "pcqa/util/kv_config.hpp"

namespace pcqa::cli {

namespace fs = std::filesystem;

namespace {

SweepOptions sweep_options(const Globals& g, const std::vector<std::string>& fixed) {
    SweepOptions o;
    o.fixed = parse_params(fixed);
    o.jobs = g.workers();
    o.metrics.jobs = 1;  // parallelism lives at the job level
    return o;
}

// sweep ---------------------------------------------------------------------

struct SweepArgs {
    std::string content;
    std::string outer;
    std::string inner;
    std::vector<std::string> fixed;
    std::optional<int> bit_depth;
};

void run_sweep(const SweepArgs& a, const Globals& g) {
    const GridAxis outer = parse_axis(a.outer);
    const GridAxis inner = parse_axis(a.inner);
    const auto codec = CodecAdapter::resolve(g.adapter);
    codec.check_environment();
    const auto cloud = load_ply(a.content, a.bit_depth);
    const auto rows = grid_sweep(codec, cloud, outer, inner, sweep_options(g, a.fixed));
    Output out(g, cloud.name() + "_sweep.csv");
    write_sweep_csv(out.stream(), rows, outer, inner);
    out.finish();
}

// isorate -------------------------------------------------------------------

struct IsorateArgs {
    std::vector<std::string> contents;
    std::vector<std::string> targets;
    std::string sweep;
    std::string ladder;
    std::vector<std::string> fixed;
    std::optional<int> bit_depth;
    bool exhaustive = false;
};

struct Target {
    std::string content;  // empty: every content
    std::string rate;
    double bpp = 0.0;
};

// "[content:]rate=bpp"
Target parse_target(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw ValidationError("target '" + spec + "' must look like [content:]rate=bpp");
    Target t;
    std::string key = trim(spec.substr(0, eq));
    if (const auto colon = key.find(':'); colon != std::string::npos) {
        t.content = trim(key.substr(0, colon));
        key = trim(key.substr(colon + 1));
    }
    t.rate = key;
    if (t.rate.empty()) throw ValidationError("target '" + spec + "' has no rate label");
    t.bpp = parse_params({"bpp=" + spec.substr(eq + 1)}).at("bpp");
    if (t.bpp <= 0) throw ValidationError("target '" + spec + "' must be positive");
    return t;
}

GridAxis default_ladder(CodecId codec, int bit_depth) {
    switch (codec) {
        case CodecId::GPCC:
        case CodecId::Mock: return {"pqs", gpcc_pqs_ladder(bit_depth == 12 ? 12 : 10)};
        case CodecId::VPCC: return {"gqp", vpcc_gqp_ladder()};
        case CodecId::JPEGPleno: break;
    }
    throw ValidationError("no default ladder for " + to_string(codec) + "; pass --ladder");
}

void run_isorate(const IsorateArgs& a, const Globals& g) {
    if (a.sweep.empty()) throw ValidationError("isorate needs a non-empty --sweep name=v1,v2,...");
    const GridAxis sweep = parse_axis(a.sweep);
    std::vector<Target> targets;
    for (const auto& s : a.targets) targets.push_back(parse_target(s));
    if (targets.empty()) throw ValidationError("isorate needs at least one --target [content:]rate=bpp");

    const auto codec = CodecAdapter::resolve(g.adapter);
    codec.check_environment();

    Globals files = g;
    if (files.out.empty()) files.out = ".";
    const auto options = sweep_options(g, a.fixed);
    for (const auto& path : a.contents) {
        const auto cloud = load_ply(path, a.bit_depth);
        const GridAxis ladder = a.ladder.empty() ? default_ladder(codec.id(), cloud.bit_depth()) : parse_axis(a.ladder);
        for (const auto& t : targets) {
            if (!t.content.empty() && t.content != cloud.name()) continue;
            IsorateRequest req{t.bpp, sweep, ladder, a.exhaustive};
            const auto rows = isorate_search(codec, cloud, req, options);
            Output out(files, cloud.name() + "_" + t.rate + "_isorate.csv");
            write_isorate_csv(out.stream(), rows);
            out.finish();
            std::size_t feasible = 0;
            for (const auto& r : rows) feasible += r.feasible() ? 1 : 0;
            std::cerr << cloud.name() << " " << t.rate << ": " << feasible << "/" << rows.size()
                      << " sweep values feasible at " << format_real(t.bpp, 6) << " bpp\n";
        }
    }
}

// encode --------------------------------------------------------------------

struct EncodeArgs {
    std::string manifest;
    std::string dataset;
    std::vector<std::string> contents;
    std::vector<std::string> rates;
    std::vector<std::string> strategies;
    std::vector<std::string> fixed;
    std::optional<int> bit_depth;
    bool no_decoded = false;
};

std::vector<std::string> merged(const std::vector<std::string>& flag, const KvConfig* m, const std::string& key) {
    if (!flag.empty() || !m) return flag;
    if (auto v = m->get(key)) return split_list(*v);
    return {};
}

void run_encode(EncodeArgs a, Globals g) {
    std::optional<KvConfig> manifest;
    if (!a.manifest.empty()) {
        manifest = KvConfig::load(a.manifest);
        if (a.dataset.empty()) a.dataset = manifest->get("dataset").value_or("");
        if (g.out.empty()) g.out = manifest->get("out").value_or("");
        if (auto v = manifest->get("adapter"); v && g.adapter == "mock") g.adapter = *v;
        if (auto v = manifest->get("seed")) {
            const auto parsed = parse_params({"seed=" + *v}).at("seed");
            if (parsed < 0 || parsed != std::floor(parsed)) throw ConfigurationError("manifest seed must be an unsigned integer");
            g.seed = static_cast<std::uint64_t>(parsed);
        }
    }
    const KvConfig* m = manifest ? &*manifest : nullptr;
    a.contents = merged(a.contents, m, "contents");
    a.rates = merged(a.rates, m, "rates");
    a.strategies = merged(a.strategies, m, "strategies");
    if (a.dataset.empty()) throw ValidationError("encode needs --dataset or a manifest with 'dataset'");
    if (!fs::is_directory(a.dataset)) throw EnvironmentError("dataset directory '" + a.dataset + "' does not exist");
    if (a.contents.empty()) throw ValidationError("encode needs at least one content");
    if (g.out.empty()) throw ValidationError("encode writes files; pass --out or set 'out' in the manifest");

    std::vector<RatePoint> rates;
    for (const auto& r : a.rates) rates.push_back(parse_rate(r));
    if (rates.empty()) rates.assign(std::begin(kAllRates), std::end(kAllRates));
    std::vector<Strategy> keep;
    for (const auto& s : a.strategies) keep.push_back(parse_strategy(s));
    if (keep.empty()) keep.assign(std::begin(kAllStrategies), std::end(kAllStrategies));

    const auto codec = CodecAdapter::resolve(g.adapter);
    codec.check_environment();
    const auto options = sweep_options(g, a.fixed);

    Output table(g, "encodings.csv");
    auto& os = table.stream();
    os << csv_join({"stimulus_id", "content", "codec", "rate", "strategy", "params", "target_bpp", "bpp", "d1_psnr",
                    "d2_psnr", "y_psnr", "yuv_psnr", "error"})
       << "\n";
    for (const auto& content : a.contents) {
        const auto path = fs::path(a.dataset) / (content + ".ply");
        const auto cloud = load_ply(path, a.bit_depth);
        for (const auto rate : rates) {
            for (const auto& enc : encode_rate_point(codec, cloud, rate, options)) {
                if (std::find(keep.begin(), keep.end(), enc.id.strategy) == keep.end()) continue;
                std::vector<std::string> cols = {enc.id.str(), content, to_string(codec.id()), to_string(rate),
                                                 to_string(enc.id.strategy)};
                if (enc.result) {
                    std::string params;
                    for (const auto& [k, v] : enc.result->params)
                        params += (params.empty() ? "" : " ") + k + "=" + format_param(v);
                    const auto& rep = *enc.result->report;
                    cols.insert(cols.end(),
                                {params, enc.target_bpp ? format_real(*enc.target_bpp, 6) : "na",
                                 format_real(enc.result->bitrate_bpp, 6), format_psnr(rep.d1_psnr),
                                 format_psnr(rep.d2_psnr), rep.y_psnr ? format_psnr(*rep.y_psnr) : "na",
                                 rep.yuv_psnr ? format_psnr(*rep.yuv_psnr) : "na", ""});
                    if (!a.no_decoded && enc.result->decoded)
                        save_ply(*enc.result->decoded, fs::path(g.out) / (enc.id.str() + ".ply"));
                } else {
                    cols.insert(cols.end(), {"na", enc.target_bpp ? format_real(*enc.target_bpp, 6) : "na", "na",
                                             "na", "na", "na", "na", enc.error});
                }
                os << csv_join(cols) << "\n";
            }
        }
    }
    table.finish();
}

// ctc -----------------------------------------------------------------------

void ctc_gpcc(int bit_depth, const Globals& g) {
    Output out(g, "gpcc_ctc.csv");
    out.stream() << "rate,pqs,qp\n";
    for (int r = 1; r <= 6; ++r) {
        const auto p = gpcc_ctc_params(static_cast<GpccCtcRate>(r), bit_depth);
        out.stream() << "r0" << r << "," << format_param(p.pqs) << "," << p.qp << "\n";
    }
    out.finish();
}

void ctc_vpcc(const Globals& g) {
    Output out(g, "vpcc_ctc.csv");
    out.stream() << "rate,aqp,gqp,occupancy_precision\n";
    for (int r = 1; r <= 5; ++r) {
        const auto p = vpcc_ctc_params(static_cast<VpccCtcRate>(r));
        out.stream() << "r" << r << "," << p.aqp << "," << p.gqp << "," << p.occupancy_precision << "\n";
    }
    out.finish();
}

std::vector<std::string> jpeg_contents(const std::string& only) {
    if (!only.empty()) return {only};
    std::vector<std::string> names;
    for (const auto& c : dataset_catalog()) names.push_back(c.name);
    return names;
}

void ctc_jpeg(const std::string& content, const Globals& g) {
    Output out(g, "jpeg_configs.csv");
    out.stream() << "content,rate,strategy,lambda,sf,cri\n";
    for (const auto& c : jpeg_contents(content))
        for (auto r : kAllRates)
            for (auto s : kAllStrategies) {
                const auto cfg = jpeg_config_lookup(c, r, s);
                out.stream() << csv_join({c, to_string(r), to_string(s), format_param(cfg.lambda),
                                          std::to_string(cfg.sf), std::to_string(cfg.cri)})
                             << "\n";
            }
    out.finish();
}

void ctc_relation(const std::string& content, const Globals& g) {
    Output out(g, "jpeg_relations.csv");
    out.stream() << "content,rate,a,b,relation\n";
    for (const auto& c : jpeg_contents(content))
        for (auto r : kAllRates)
            for (auto a : kAllStrategies)
                for (auto b : kAllStrategies) {
                    if (static_cast<int>(b) <= static_cast<int>(a)) continue;
                    const auto rel = config_relation(jpeg_config_lookup(c, r, a), jpeg_config_lookup(c, r, b));
                    out.stream() << csv_join({c, to_string(r), to_string(a), to_string(b), std::string(to_string(rel))})
                                 << "\n";
                }
    out.finish();
}

struct StrategyArgs {
    std::string codec = "gpcc";
    std::string rate = "R1";
    std::string strategy = "P1";
    std::string content;
    int bit_depth = 10;
};

void ctc_strategy(const StrategyArgs& a, const Globals& g) {
    const auto d = strategy_directive(parse_codec(a.codec), a.content, a.bit_depth, parse_rate(a.rate),
                                      parse_strategy(a.strategy));
    Output out(g, "strategy.txt");
    for (const auto& [k, v] : d.fixed) out.stream() << k << " = " << format_param(v) << "\n";
    if (d.search) out.stream() << "search = " << d.search->param << " (" << d.search->values.size() << " candidates)\n";
    out.finish();
}

void ctc_ladder(const std::string& codec, int bit_depth, const Globals& g) {
    const auto axis = default_ladder(parse_codec(codec), bit_depth);
    Output out(g, "ladder.txt");
    for (double v : axis.values) out.stream() << format_param(v) << "\n";
    out.finish();
}

}  // namespace

void add_codec_commands(CLI::App& app, Globals& g) {
    {
        auto a = std::make_shared<SweepArgs>();
        auto* cmd = app.add_subcommand("sweep", "Encode a parameter grid and score every cell");
        cmd->add_option("content", a->content, "Content PLY")->required();
        cmd->add_option("--outer", a->outer, "Outer axis name=v1,v2,... or name=lo:step:hi")->required();
        cmd->add_option("--inner", a->inner, "Inner axis")->required();
        cmd->add_option("--fixed", a->fixed, "Constant parameter name=value (repeatable)");
        cmd->add_option("--bit-depth", a->bit_depth, "Content precision override");
        cmd->final_callback([a, &g] { run_sweep(*a, g); });
    }
    {
        auto a = std::make_shared<IsorateArgs>();
        auto* cmd = app.add_subcommand("isorate", "Isorate curves: best ladder entry under a bitrate target");
        cmd->add_option("contents", a->contents, "Content PLY files")->required();
        cmd->add_option("--target", a->targets, "Target [content:]rate=bpp (repeatable)");
        cmd->add_option("--sweep", a->sweep, "Swept parameter name=v1,v2,...");
        cmd->add_option("--ladder", a->ladder, "Searched parameter, by increasing bitrate (default: codec ladder)");
        cmd->add_option("--fixed", a->fixed, "Constant parameter name=value (repeatable)");
        cmd->add_option("--bit-depth", a->bit_depth, "Content precision override");
        cmd->add_flag("--exhaustive", a->exhaustive, "Evaluate every ladder entry");
        cmd->final_callback([a, &g] { run_isorate(*a, g); });
    }
    {
        auto a = std::make_shared<EncodeArgs>();
        auto* cmd = app.add_subcommand("encode", "Encode the stimuli of the design (P1 from tables, P2/P3 rate-matched)");
        cmd->add_option("--manifest", a->manifest, "Run manifest (dataset, adapter, out, seed, contents, rates, strategies)");
        cmd->add_option("--dataset", a->dataset, "Directory holding <content>.ply");
        cmd->add_option("--contents", a->contents, "Contents to encode")->delimiter(',');
        cmd->add_option("--rates", a->rates, "Rate points (default: all)")->delimiter(',');
        cmd->add_option("--strategies", a->strategies, "Strategies to report (default: all)")->delimiter(',');
        cmd->add_option("--fixed", a->fixed, "Constant parameter name=value (repeatable)");
        cmd->add_option("--bit-depth", a->bit_depth, "Content precision override");
        cmd->add_flag("--no-decoded", a->no_decoded, "Do not write decoded PLY files");
        cmd->final_callback([a, &g] { run_encode(*a, g); });
    }

    auto* ctc = app.add_subcommand("ctc", "Common test conditions and strategy tables");
    ctc->require_subcommand(1);
    {
        auto depth = std::make_shared<int>(10);
        auto* cmd = ctc->add_subcommand("gpcc", "G-PCC CTC rate points");
        cmd->add_option("--bit-depth", *depth, "10 or 12");
        cmd->final_callback([depth, &g] { ctc_gpcc(*depth, g); });
    }
    ctc->add_subcommand("vpcc", "V-PCC CTC rate points")->final_callback([&g] { ctc_vpcc(g); });
    {
        auto content = std::make_shared<std::string>();
        auto* cmd = ctc->add_subcommand("jpeg", "JPEG Pleno configurations per content, rate and strategy");
        cmd->add_option("--content", *content, "Only this content");
        cmd->final_callback([content, &g] { ctc_jpeg(*content, g); });
    }
    {
        auto content = std::make_shared<std::string>();
        auto* cmd = ctc->add_subcommand("relation", "Quality relation of JPEG Pleno strategy pairs");
        cmd->add_option("--content", *content, "Only this content");
        cmd->final_callback([content, &g] { ctc_relation(*content, g); });
    }
    {
        auto a = std::make_shared<StrategyArgs>();
        auto* cmd = ctc->add_subcommand("strategy", "Encoder parameters of one strategy cell");
        cmd->add_option("--codec", a->codec, "gpcc, vpcc, jpeg or mock");
        cmd->add_option("--rate", a->rate, "R1..R4");
        cmd->add_option("--strategy", a->strategy, "P1..P3");
        cmd->add_option("--content", a->content, "Content (JPEG Pleno only)");
        cmd->add_option("--bit-depth", a->bit_depth, "Content precision");
        cmd->final_callback([a, &g] { ctc_strategy(*a, g); });
    }
    {
        auto codec = std::make_shared<std::string>("gpcc");
        auto depth = std::make_shared<int>(10);
        auto* cmd = ctc->add_subcommand("ladder", "Search ladder of the rate-matched parameter");
        cmd->add_option("--codec", *codec, "gpcc, vpcc or mock");
        cmd->add_option("--bit-depth", *depth, "Content precision");
        cmd->final_callback([codec, depth, &g] { ctc_ladder(*codec, *depth, g); });
    }
    {
        auto sizes = std::make_shared<std::vector<std::uint64_t>>();
        auto* cmd = ctc->add_subcommand("pg", "Strategy band of a geometry share");
        cmd->add_option("sizes", *sizes, "geometry_bytes total_bytes")->expected(2)->required();
        cmd->final_callback([sizes, &g] {
            Output out(g, "pg.txt");
            out.stream() << to_string(classify_pg((*sizes)[0], (*sizes)[1])) << "\n";
            out.finish();
        });
    }
}

}  // namespace pcqa::cli
