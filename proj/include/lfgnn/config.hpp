#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lfgnn/causality.hpp"
#include "lfgnn/model.hpp"
#include "lfgnn/signal.hpp"
#include "lfgnn/train.hpp"

namespace lfgnn {

// `key = value` lines grouped under `[section]` headers, '#' and ';'
// comments. Keys are stored as "section.key" in file order; a key may not
// repeat.
struct IniFile {
    std::vector<std::pair<std::string, std::string>> entries;

    static IniFile parse(const std::string& text); // FormatError
    static IniFile load(const std::string& path);
    const std::string* find(const std::string& key) const;
};

// One struct carries every knob of a run. Resolution order: protocol
// defaults (desk unless paper_protocol), then the config file, then CLI
// flags; echo() serializes the final state back to INI so an output
// directory fully describes the run that produced it.
struct RunConfig {
    std::string dataset_dir;
    std::string regions_path;
    std::string output_dir = "out";
    std::string label = "arousal"; // or "valence"
    bool paper_protocol = false;
    std::uint64_t seed = 0;
    int jobs = 1;

    double target_rate = 200.0;
    double window_seconds = 4.0;
    std::vector<BandSpec> bands = default_bands();

    double alpha = 0.01;
    std::size_t surrogates = 200; // 1000 under the paper protocol
    std::size_t block_length = 0; // 0 = derive from the rate

    std::size_t topk = 0; // 0 = keep all significant edges
    std::size_t granger_order = 5;

    // channels/regions/feature_dim/seed are filled from the run at
    // model_for(); pooled_nodes 0 resolves to the region count there.
    ModelConfig model;
    TrainConfig train = TrainConfig::desk();

    static RunConfig defaults(bool paper);
    // Defaults for the file's own paper_protocol value, overlaid with the
    // file. Unknown keys and unparsable values are ConfigErrors.
    static RunConfig from_ini(const IniFile& file);

    void validate() const;
    std::string echo() const;

    SignificanceConfig significance() const;
    ModelConfig model_for(const RegionMap& map) const;
    TrainConfig train_config() const;
};

} // namespace lfgnn
