#include <algorithm>
#include <cmath>
#include <regex>

#include "cli.hpp"
#include "pcqa/session/plan.hpp"
#include "pcqa/util/errors.hpp"
#include "pcqa/util/kv_config.hpp"
#include "pcqa/util/parallel.hpp"

namespace pcqa::cli {

namespace fs = std::filesystem;

unsigned Globals::workers() const { return jobs == 0 ? default_jobs() : jobs; }

Output::Output(const Globals& g, const std::string& name) {
    if (g.out.empty()) return;
    std::error_code ec;
    fs::create_directories(g.out, ec);
    if (ec) throw EnvironmentError("cannot create output directory '" + g.out + "': " + ec.message());
    path_ = fs::path(g.out) / name;
    file_.emplace(path_, std::ios::binary);
    if (!*file_) throw EnvironmentError("cannot write '" + path_.string() + "'");
}

void Output::finish() {
    auto& s = stream();
    s.flush();
    if (!s) throw EnvironmentError("failed writing '" + (file_ ? path_.string() : std::string("<stdout>")) + "'");
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw EnvironmentError("cannot read '" + path + "'");
    return in;
}

std::uint64_t file_size_of(const std::string& path) {
    std::error_code ec;
    const auto n = fs::file_size(path, ec);
    if (ec) throw EnvironmentError("cannot read '" + path + "': " + ec.message());
    return n;
}

namespace {

double parse_number(const std::string& text, const std::string& spec) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || text.empty() || !std::isfinite(v))
        throw ValidationError("'" + text + "' in '" + spec + "' is not a number");
    return v;
}

}  // namespace

GridAxis parse_axis(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("axis '" + spec + "' must look like name=v1,v2,...");
    GridAxis axis{trim(spec.substr(0, eq)), {}};
    for (const auto& item : split_list(spec.substr(eq + 1))) {
        const auto parts = split_list(item, ':');
        if (parts.size() == 1) {
            axis.values.push_back(parse_number(parts[0], spec));
        } else if (parts.size() == 3) {
            const double lo = parse_number(parts[0], spec), step = parse_number(parts[1], spec),
                         hi = parse_number(parts[2], spec);
            if (step <= 0 || hi < lo) throw ValidationError("range '" + item + "' needs step > 0 and lo <= hi");
            const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
            if (n > 100000) throw ValidationError("range '" + item + "' is too long");
            for (std::size_t k = 0; k <= n; ++k) axis.values.push_back(lo + static_cast<double>(k) * step);
        } else {
            throw ValidationError("bad axis item '" + item + "' in '" + spec + "'");
        }
    }
    if (axis.values.empty()) throw ValidationError("axis '" + axis.param + "' has no values");
    return axis;
}

ParamValues parse_params(const std::vector<std::string>& specs) {
    ParamValues out;
    for (const auto& s : specs) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw ValidationError("parameter '" + s + "' must look like name=value");
        out[trim(s.substr(0, eq))] = parse_number(trim(s.substr(eq + 1)), s);
    }
    return out;
}

std::vector<StimulusMeta> load_catalog(const std::string& catalog_file, const std::vector<std::string>& contents,
                                       const std::string& asset_dir) {
    std::vector<StimulusMeta> out;
    if (!catalog_file.empty()) {
        auto in = open_input(catalog_file);
        std::string line;
        while (std::getline(in, line)) {
            line = trim(line);
            if (line.empty() || line[0] == '#') continue;
            out.push_back(StimulusMeta::from_id(line));
        }
    } else if (!contents.empty()) {
        out = design_stimuli(contents);
    } else if (!asset_dir.empty()) {
        std::error_code ec;
        std::vector<std::string> ids;
        for (const auto& e : fs::directory_iterator(asset_dir, ec)) {
            if (e.path().extension() != ".ply") continue;
            const auto id = e.path().stem().string();
            if (auto parsed = StimulusId::parse(id); parsed && !parsed->is_reference()) ids.push_back(id);
        }
        if (ec) throw EnvironmentError("cannot list '" + asset_dir + "': " + ec.message());
        std::sort(ids.begin(), ids.end());
        for (const auto& id : ids) out.push_back(StimulusMeta::from_id(id));
    }
    if (out.empty()) throw ValidationError("no stimuli: pass --catalog, --contents or an asset directory");
    return out;
}

}  // namespace pcqa::cli
