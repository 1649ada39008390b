#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lfgnn/graphs.hpp"
#include "lfgnn/nn.hpp"
#include "lfgnn/numerics.hpp"
#include "lfgnn/rng.hpp"

namespace lfgnn {

// One classified window: node features plus the two directed adjacencies the
// branches diffuse over. channel_labels may be empty when the rows already
// follow the region map's canonical order; otherwise forward reorders by
// label before any arithmetic.
struct FeatureGraphSample {
    Matrix features;   // channels x feature_dim
    Matrix global_adj; // channels x channels
    Matrix local_adj;  // channels x channels, block diagonal by region
    int label = 0;
    std::uint64_t trial = 0;
    std::vector<std::string> channel_labels;
};

struct ModelConfig {
    std::size_t channels = 32;
    RegionMap regions;
    std::size_t feature_dim = 5;
    std::size_t global_hidden = 16;
    std::size_t local_hidden = 16;
    std::size_t k_global = 4;
    std::size_t k_local = 2;
    std::size_t pooled_nodes = 7;
    std::size_t gate_hidden = 16;
    std::size_t hidden_dim = 32;
    std::size_t classifier_hidden = 16;
    double dropout = 0.3;
    std::uint64_t seed = 0;

    void validate() const; // ConfigError on violation
};

struct ModelOutput {
    std::vector<double> logits;                 // one per class
    std::vector<std::vector<double>> attention; // per region, per channel
    std::vector<double> gates;                  // per abstract node
};

// Global branch: two diffusion convolutions over the full causal graph, then
// soft pooling to the abstract nodes. Local branch: two diffusion
// convolutions over the block-diagonal regional graph, then attention
// pooling per region. A gate computed from the raw feature summary mixes the
// branches; the classifier reads the fused hidden vector.
//
// Forward caches activations for the matching backward, so a model instance
// must not run concurrent forwards; clone the model instead.
class Model {
    // State precedes the layers so construction can consume the seed stream
    // in declaration order.
    ModelConfig cfg_;
    std::vector<std::string> canonical_labels_;
    Rng init_rng_;

public:
    explicit Model(const ModelConfig& cfg);

    const ModelConfig& config() const { return cfg_; }
    const std::vector<std::string>& channel_order() const { return canonical_labels_; }

    std::vector<ParamRef> params();
    std::size_t param_count();
    // Hash of the architecture shape structure; independent of values/seed.
    std::uint64_t fingerprint();

    ModelOutput forward(const FeatureGraphSample& sample, bool train, std::uint64_t seed);
    // Gradient of the last forward; returns d(features) in canonical order.
    Matrix backward(const std::vector<double>& d_logits);
    void zero_grad();

    DConv global1, global2;
    DiffPool pool;
    DConv local1, local2;
    AttentionPool attention;
    GatedFusion fusion;
    Classifier classifier;

private:
    Matrix canonical_features_; // cached by forward for the summary backward
};

// Weight files: 8-byte magic, little-endian u64 JSON header length, JSON
// header (fingerprint + per-tensor name/shape), then all tensor values as
// little-endian doubles in declaration order.
void save_weights(Model& model, const std::string& path);
void load_weights(Model& model, const std::string& path); // FormatError/CorruptFile

struct AttentionRow {
    std::string region;
    std::string channel;
    double mean_weight;
};
// Eval-mode attention weights averaged over samples, rows in canonical
// channel order grouped by region.
std::vector<AttentionRow> mean_attention(Model& model,
                                         const std::vector<FeatureGraphSample>& samples);
std::string attention_csv(const std::vector<AttentionRow>& rows);

} // namespace lfgnn
