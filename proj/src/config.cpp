#include "lfgnn/config.hpp"

#include <algorithm>
#include <cctype>
#include <iomanip>
#include <set>
#include <sstream>

#include "lfgnn/errors.hpp"
#include "lfgnn/io.hpp"

namespace lfgnn {
namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad number for " + key + ": '" + value + "'");
    }
}

std::uint64_t parse_count(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size() || v < 0) throw std::invalid_argument(value);
        return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
        throw ConfigError("bad count for " + key + ": '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "yes" || value == "1") return true;
    if (value == "false" || value == "no" || value == "0") return false;
    throw ConfigError("bad flag for " + key + ": '" + value + "'");
}

std::vector<BandSpec> parse_bands(const std::string& value) {
    std::vector<BandSpec> out;
    std::stringstream in(value);
    std::string item;
    const char* names[] = {"delta", "theta", "alpha", "beta", "gamma"};
    while (std::getline(in, item, ',')) {
        item = trim(item);
        const std::size_t dash = item.find('-');
        if (dash == std::string::npos)
            throw ConfigError("bands entries look like low-high, got '" + item + "'");
        BandSpec band;
        band.low_hz = parse_double("signal.bands", item.substr(0, dash));
        band.high_hz = parse_double("signal.bands", item.substr(dash + 1));
        band.name = out.size() < 5 ? names[out.size()] : "band" + std::to_string(out.size() + 1);
        out.push_back(band);
    }
    if (out.empty()) throw ConfigError("signal.bands is empty");
    return out;
}

std::string format_double(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

} // namespace

IniFile IniFile::parse(const std::string& text) {
    IniFile file;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string body = trim(line.substr(0, std::min(line.find('#'), line.find(';'))));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']' || body.size() < 3)
                throw FormatError("bad section header at line " + std::to_string(line_no));
            section = trim(body.substr(1, body.size() - 2));
            continue;
        }
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw FormatError("expected key = value at line " + std::to_string(line_no));
        const std::string key =
            (section.empty() ? "" : section + ".") + trim(body.substr(0, eq));
        if (trim(body.substr(0, eq)).empty())
            throw FormatError("empty key at line " + std::to_string(line_no));
        if (!seen.insert(key).second)
            throw FormatError("duplicate key '" + key + "' at line " + std::to_string(line_no));
        file.entries.emplace_back(key, trim(body.substr(eq + 1)));
    }
    return file;
}

IniFile IniFile::load(const std::string& path) { return parse(read_file(path)); }

const std::string* IniFile::find(const std::string& key) const {
    // last wins, so programmatic overrides can simply append
    const std::string* hit = nullptr;
    for (const auto& [k, v] : entries)
        if (k == key) hit = &v;
    return hit;
}

RunConfig RunConfig::defaults(bool paper) {
    RunConfig rc;
    rc.paper_protocol = paper;
    rc.model.pooled_nodes = 0; // resolved to the region count by model_for
    if (paper) {
        rc.surrogates = 1000;
        rc.train = TrainConfig();
    }
    return rc;
}

RunConfig RunConfig::from_ini(const IniFile& file) {
    bool paper = false;
    if (const std::string* v = file.find("run.paper_protocol"))
        paper = parse_bool("run.paper_protocol", *v);
    RunConfig rc = defaults(paper);
    for (const auto& [key, value] : file.entries) {
        if (key == "paths.dataset") rc.dataset_dir = value;
        else if (key == "paths.regions") rc.regions_path = value;
        else if (key == "paths.output") rc.output_dir = value;
        else if (key == "run.label") rc.label = value;
        else if (key == "run.paper_protocol") continue; // consumed above
        else if (key == "run.seed") rc.seed = parse_count(key, value);
        else if (key == "run.jobs") rc.jobs = static_cast<int>(parse_count(key, value));
        else if (key == "signal.target_rate") rc.target_rate = parse_double(key, value);
        else if (key == "signal.window_seconds") rc.window_seconds = parse_double(key, value);
        else if (key == "signal.bands") rc.bands = parse_bands(value);
        else if (key == "causality.alpha") rc.alpha = parse_double(key, value);
        else if (key == "causality.surrogates") rc.surrogates = parse_count(key, value);
        else if (key == "causality.block_length") rc.block_length = parse_count(key, value);
        else if (key == "graph.topk") rc.topk = parse_count(key, value);
        else if (key == "graph.granger_order") rc.granger_order = parse_count(key, value);
        else if (key == "model.global_hidden") rc.model.global_hidden = parse_count(key, value);
        else if (key == "model.local_hidden") rc.model.local_hidden = parse_count(key, value);
        else if (key == "model.k_global") rc.model.k_global = parse_count(key, value);
        else if (key == "model.k_local") rc.model.k_local = parse_count(key, value);
        else if (key == "model.pooled_nodes") rc.model.pooled_nodes = parse_count(key, value);
        else if (key == "model.gate_hidden") rc.model.gate_hidden = parse_count(key, value);
        else if (key == "model.hidden_dim") rc.model.hidden_dim = parse_count(key, value);
        else if (key == "model.classifier_hidden")
            rc.model.classifier_hidden = parse_count(key, value);
        else if (key == "model.dropout") rc.model.dropout = parse_double(key, value);
        else if (key == "train.outer_folds") rc.train.outer_folds = parse_count(key, value);
        else if (key == "train.inner_folds") rc.train.inner_folds = parse_count(key, value);
        else if (key == "train.stage1_lr") rc.train.stage1_lr = parse_double(key, value);
        else if (key == "train.stage1_epochs") rc.train.stage1_epochs = parse_count(key, value);
        else if (key == "train.stage2_lr") rc.train.stage2_lr = parse_double(key, value);
        else if (key == "train.stage2_epochs") rc.train.stage2_epochs = parse_count(key, value);
        else if (key == "train.batch") rc.train.batch = parse_count(key, value);
        else throw ConfigError("unknown config key '" + key + "'");
    }
    return rc;
}

void RunConfig::validate() const {
    if (label != "arousal" && label != "valence")
        throw ConfigError("run.label must be arousal or valence");
    if (!(target_rate > 0.0)) throw ConfigError("signal.target_rate must be positive");
    if (!(window_seconds > 0.0)) throw ConfigError("signal.window_seconds must be positive");
    for (const BandSpec& b : bands)
        if (!(0.0 < b.low_hz && b.low_hz < b.high_hz))
            throw ConfigError("band edges must satisfy 0 < low < high");
    if (granger_order == 0) throw ConfigError("graph.granger_order must be >= 1");
    if (jobs < 0) throw ConfigError("run.jobs must be >= 0");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("causality.alpha must lie in (0, 1]");
    // alpha = 1 means "keep every edge, skip the surrogate test", so the
    // test's own settings only need to hold below it
    if (alpha < 1.0) significance().validate();
    train_config().validate();
}

std::string RunConfig::echo() const {
    std::ostringstream out;
    out << "[paths]\n"
        << "dataset = " << dataset_dir << "\n"
        << "regions = " << regions_path << "\n"
        << "output = " << output_dir << "\n\n"
        << "[run]\n"
        << "label = " << label << "\n"
        << "paper_protocol = " << (paper_protocol ? "true" : "false") << "\n"
        << "seed = " << seed << "\n"
        << "jobs = " << jobs << "\n\n"
        << "[signal]\n"
        << "target_rate = " << format_double(target_rate) << "\n"
        << "window_seconds = " << format_double(window_seconds) << "\n"
        << "bands = ";
    for (std::size_t b = 0; b < bands.size(); ++b)
        out << (b ? "," : "") << format_double(bands[b].low_hz) << "-"
            << format_double(bands[b].high_hz);
    out << "\n\n"
        << "[causality]\n"
        << "alpha = " << format_double(alpha) << "\n"
        << "surrogates = " << surrogates << "\n"
        << "block_length = " << block_length << "\n\n"
        << "[graph]\n"
        << "topk = " << topk << "\n"
        << "granger_order = " << granger_order << "\n\n"
        << "[model]\n"
        << "global_hidden = " << model.global_hidden << "\n"
        << "local_hidden = " << model.local_hidden << "\n"
        << "k_global = " << model.k_global << "\n"
        << "k_local = " << model.k_local << "\n"
        << "pooled_nodes = " << model.pooled_nodes << "\n"
        << "gate_hidden = " << model.gate_hidden << "\n"
        << "hidden_dim = " << model.hidden_dim << "\n"
        << "classifier_hidden = " << model.classifier_hidden << "\n"
        << "dropout = " << format_double(model.dropout) << "\n\n"
        << "[train]\n"
        << "outer_folds = " << train.outer_folds << "\n"
        << "inner_folds = " << train.inner_folds << "\n"
        << "stage1_lr = " << format_double(train.stage1_lr) << "\n"
        << "stage1_epochs = " << train.stage1_epochs << "\n"
        << "stage2_lr = " << format_double(train.stage2_lr) << "\n"
        << "stage2_epochs = " << train.stage2_epochs << "\n"
        << "batch = " << train.batch << "\n";
    return out.str();
}

SignificanceConfig RunConfig::significance() const {
    SignificanceConfig cfg;
    cfg.alpha = alpha;
    cfg.surrogate_count = surrogates;
    cfg.block_length = block_length;
    cfg.seed = seed;
    cfg.jobs = jobs;
    return cfg;
}

ModelConfig RunConfig::model_for(const RegionMap& map) const {
    ModelConfig cfg = model;
    cfg.channels = map.channel_count();
    cfg.regions = map;
    cfg.feature_dim = bands.size();
    cfg.seed = seed;
    if (cfg.pooled_nodes == 0) cfg.pooled_nodes = map.region_count();
    return cfg;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig cfg = train;
    cfg.seed = seed;
    cfg.jobs = jobs;
    return cfg;
}

} // namespace lfgnn
