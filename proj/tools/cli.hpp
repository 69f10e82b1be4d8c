#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pcqa/codec/search.hpp"
#include "pcqa/stats/dsis.hpp"

namespace pcqa::cli {

/// Flags shared by every subcommand.
struct Globals {
    std::string adapter = "mock";
    std::uint64_t seed = 0;
    unsigned jobs = 1;  // 0: one per hardware thread
    std::string out;    // empty: standard output

    unsigned workers() const;
};

/// Destination of one output file: `<out>/<name>` or stdout when --out is unset.
class Output {
public:
    Output(const Globals& g, const std::string& name);
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    /// Flushes and reports a failed write as EnvironmentError.
    void finish();

private:
    std::optional<std::ofstream> file_;
    std::filesystem::path path_;
};

std::ifstream open_input(const std::string& path);
std::uint64_t file_size_of(const std::string& path);

/// "name=v1,v2,..." with "lo:step:hi" accepted as an inclusive range.
GridAxis parse_axis(const std::string& spec);
/// "name=value" pairs.
ParamValues parse_params(const std::vector<std::string>& specs);

/// Stimulus catalog from a file (one id per line), a content list expanded
/// to the evaluated design, or the PLY stems of an asset directory.
std::vector<StimulusMeta> load_catalog(const std::string& catalog_file, const std::vector<std::string>& contents,
                                       const std::string& asset_dir);

void add_metric_commands(CLI::App& app, Globals& g);
void add_codec_commands(CLI::App& app, Globals& g);
void add_stats_commands(CLI::App& app, Globals& g);
void add_session_commands(CLI::App& app, Globals& g);

}  // namespace pcqa::cli
