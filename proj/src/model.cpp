#include "lfgnn/model.hpp"

#include <bit>
#include <cstring>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "lfgnn/errors.hpp"
#include "lfgnn/io.hpp"

namespace lfgnn {
namespace {

const ModelConfig& validated(const ModelConfig& cfg) {
    cfg.validate();
    return cfg;
}

Matrix permuted_rows(const Matrix& m, const std::vector<std::size_t>& order) {
    Matrix out(order.size(), m.cols);
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t j = 0; j < m.cols; ++j) out(i, j) = m(order[i], j);
    return out;
}

Matrix permuted_square(const Matrix& m, const std::vector<std::size_t>& order) {
    Matrix out(order.size(), order.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t j = 0; j < order.size(); ++j) out(i, j) = m(order[i], order[j]);
    return out;
}

std::uint64_t fnv1a(std::uint64_t h, const void* bytes, std::size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ull;
    }
    return h;
}

constexpr char kWeightMagic[8] = {'L', 'F', 'G', 'W', 'T', 'S', '0', '1'};

} // namespace

void ModelConfig::validate() const {
    if (channels == 0 || feature_dim == 0) throw ConfigError("empty model dimensions");
    if (regions.channel_count() != channels)
        throw ConfigError("region map covers " + std::to_string(regions.channel_count()) +
                          " channels, config says " + std::to_string(channels));
    if (pooled_nodes != regions.region_count())
        throw ConfigError("pooled node count " + std::to_string(pooled_nodes) +
                          " must equal the region count " +
                          std::to_string(regions.region_count()));
    if (k_global == 0 || k_local == 0) throw ConfigError("diffusion orders must be >= 1");
    if (global_hidden == 0 || local_hidden == 0 || hidden_dim == 0 || gate_hidden == 0 ||
        classifier_hidden == 0)
        throw ConfigError("hidden widths must be positive");
    if (global_hidden != local_hidden)
        throw ConfigError("branch widths must match for gated mixing");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
}

Model::Model(const ModelConfig& cfg)
    : cfg_(validated(cfg)),
      canonical_labels_(cfg.regions.canonical_labels()),
      init_rng_(cfg.seed),
      global1(cfg.feature_dim, cfg.global_hidden, cfg.k_global, Activation::relu, init_rng_),
      global2(cfg.global_hidden, cfg.global_hidden, cfg.k_global, Activation::relu, init_rng_),
      pool(cfg.global_hidden, cfg.global_hidden, cfg.pooled_nodes, init_rng_),
      local1(cfg.feature_dim, cfg.local_hidden, cfg.k_local, Activation::relu, init_rng_),
      local2(cfg.local_hidden, cfg.local_hidden, cfg.k_local, Activation::relu, init_rng_),
      attention(cfg.regions.extents(), init_rng_),
      fusion(cfg.feature_dim, cfg.gate_hidden, cfg.pooled_nodes, cfg.global_hidden,
             cfg.hidden_dim, init_rng_),
      classifier(cfg.hidden_dim, cfg.classifier_hidden, 2, cfg.dropout, init_rng_) {}

std::vector<ParamRef> Model::params() {
    std::vector<ParamRef> out;
    global1.collect(out, "global1");
    global2.collect(out, "global2");
    pool.collect(out, "pool");
    local1.collect(out, "local1");
    local2.collect(out, "local2");
    attention.collect(out, "attention");
    fusion.collect(out, "fusion");
    classifier.collect(out, "classifier");
    return out;
}

std::size_t Model::param_count() {
    std::size_t count = 0;
    for (const ParamRef& p : params()) count += p.value->data.size();
    return count;
}

std::uint64_t Model::fingerprint() {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const ParamRef& p : params()) {
        h = fnv1a(h, p.name.data(), p.name.size());
        const std::uint64_t dims[2] = {p.value->rows, p.value->cols};
        h = fnv1a(h, dims, sizeof dims);
    }
    return h;
}

ModelOutput Model::forward(const FeatureGraphSample& sample, bool train, std::uint64_t seed) {
    const std::size_t n = cfg_.channels;
    if (sample.features.rows != n || sample.features.cols != cfg_.feature_dim)
        throw ShapeError("feature matrix shape mismatch");
    if (sample.global_adj.rows != n || !sample.global_adj.square() ||
        sample.local_adj.rows != n || !sample.local_adj.square())
        throw ShapeError("adjacency shape mismatch");

    Matrix x = sample.features;
    Matrix ga = sample.global_adj;
    Matrix la = sample.local_adj;
    if (!sample.channel_labels.empty() && sample.channel_labels != canonical_labels_) {
        const std::vector<std::size_t> order = cfg_.regions.order_for(sample.channel_labels);
        x = permuted_rows(x, order);
        ga = permuted_square(ga, order);
        la = permuted_square(la, order);
    }
    canonical_features_ = x;

    const Transitions tg = degree_transitions(ga);
    const Transitions tl = degree_transitions(la);

    const Matrix h1 = global1.forward(x, tg.forward, tg.backward);
    const Matrix h2 = global2.forward(h1, tg.forward, tg.backward);
    const DiffPool::Out pooled = pool.forward(h2, ga, tg.forward, tg.backward);

    const Matrix m1 = local1.forward(x, tl.forward, tl.backward);
    const Matrix m2 = local2.forward(m1, tl.forward, tl.backward);
    const Matrix zl = attention.forward(m2);

    std::vector<double> summary(cfg_.feature_dim, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < cfg_.feature_dim; ++j) summary[j] += x(i, j);
    for (double& v : summary) v /= static_cast<double>(n);

    const std::vector<double> z = fusion.forward(pooled.x, zl, summary);

    ModelOutput out;
    out.logits = classifier.forward(z, train, seed);
    out.attention = attention.weights();
    out.gates = fusion.gates();
    return out;
}

Matrix Model::backward(const std::vector<double>& d_logits) {
    const std::vector<double> dz = classifier.backward(d_logits);
    GatedFusion::Back fused = fusion.backward(dz);

    const Matrix dh2 = pool.backward(fused.d_global);
    const Matrix dh1 = global2.backward(dh2);
    Matrix dx = global1.backward(dh1);

    const Matrix dm2 = attention.backward(fused.d_local);
    const Matrix dm1 = local2.backward(dm2);
    const Matrix dxl = local1.backward(dm1);

    const double inv_n = 1.0 / static_cast<double>(cfg_.channels);
    for (std::size_t i = 0; i < dx.rows; ++i)
        for (std::size_t j = 0; j < dx.cols; ++j)
            dx(i, j) += dxl(i, j) + fused.d_summary[j] * inv_n;
    return dx;
}

void Model::zero_grad() {
    global1.zero_grad();
    global2.zero_grad();
    pool.zero_grad();
    local1.zero_grad();
    local2.zero_grad();
    attention.zero_grad();
    fusion.zero_grad();
    classifier.zero_grad();
}

void save_weights(Model& model, const std::string& path) {
    static_assert(std::endian::native == std::endian::little,
                  "weight payload is written as raw little-endian doubles");
    const std::vector<ParamRef> params = model.params();
    nlohmann::ordered_json header;
    std::ostringstream fp;
    fp << std::hex << std::setw(16) << std::setfill('0') << model.fingerprint();
    header["kind"] = "lfgnn-weights";
    header["fingerprint"] = fp.str();
    header["tensors"] = nlohmann::ordered_json::array();
    for (const ParamRef& p : params)
        header["tensors"].push_back(
            {{"name", p.name}, {"rows", p.value->rows}, {"cols", p.value->cols}});
    const std::string head = header.dump();

    std::string blob(kWeightMagic, sizeof kWeightMagic);
    const std::uint64_t head_len = head.size();
    blob.append(reinterpret_cast<const char*>(&head_len), sizeof head_len);
    blob.append(head);
    for (const ParamRef& p : params)
        blob.append(reinterpret_cast<const char*>(p.value->data.data()),
                    p.value->data.size() * sizeof(double));
    write_file_atomic(path, blob);
}

void load_weights(Model& model, const std::string& path) {
    const std::string blob = read_file(path);
    if (blob.size() < sizeof kWeightMagic + sizeof(std::uint64_t) ||
        std::memcmp(blob.data(), kWeightMagic, sizeof kWeightMagic) != 0)
        throw FormatError("not a weight file: " + path);
    std::uint64_t head_len = 0;
    std::memcpy(&head_len, blob.data() + sizeof kWeightMagic, sizeof head_len);
    std::size_t off = sizeof kWeightMagic + sizeof head_len;
    if (blob.size() < off + head_len) throw CorruptFile("truncated weight header: " + path);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(blob.substr(off, head_len));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad weight header: " + std::string(e.what()));
    }
    off += head_len;

    const std::vector<ParamRef> params = model.params();
    try {
        if (header.at("kind") != "lfgnn-weights") throw FormatError("not a weight file");
        const auto& tensors = header.at("tensors");
        if (tensors.size() != params.size())
            throw FormatError("weight file tensor count does not match the model");
        for (std::size_t i = 0; i < params.size(); ++i) {
            const auto& t = tensors.at(i);
            if (t.at("name") != params[i].name ||
                t.at("rows") != params[i].value->rows ||
                t.at("cols") != params[i].value->cols)
                throw FormatError("weight tensor " + params[i].name +
                                  " does not match the model architecture");
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad weight header: " + std::string(e.what()));
    }

    std::size_t need = 0;
    for (const ParamRef& p : params) need += p.value->data.size() * sizeof(double);
    if (blob.size() - off < need) throw CorruptFile("truncated weight payload: " + path);
    for (const ParamRef& p : params) {
        std::memcpy(p.value->data.data(), blob.data() + off,
                    p.value->data.size() * sizeof(double));
        off += p.value->data.size() * sizeof(double);
    }
}

std::vector<AttentionRow> mean_attention(Model& model,
                                         const std::vector<FeatureGraphSample>& samples) {
    if (samples.empty()) throw DataError("attention export needs at least one sample");
    const RegionMap& map = model.config().regions;
    const auto extents = map.extents();
    const std::vector<std::string> labels = map.canonical_labels();
    const std::vector<std::size_t> channel_region = map.canonical_channel_region();

    std::vector<double> acc(labels.size(), 0.0);
    for (const FeatureGraphSample& s : samples) {
        model.forward(s, false, 0);
        const auto& weights = model.attention.weights();
        for (std::size_t r = 0; r < extents.size(); ++r)
            for (std::size_t i = extents[r].first; i < extents[r].second; ++i)
                acc[i] += weights[r][i - extents[r].first];
    }
    std::vector<AttentionRow> rows;
    rows.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        rows.push_back({map.regions[channel_region[i]], labels[i],
                        acc[i] / static_cast<double>(samples.size())});
    return rows;
}

std::string attention_csv(const std::vector<AttentionRow>& rows) {
    std::ostringstream out;
    out << "region,channel,mean_weight\n";
    out << std::setprecision(17);
    for (const AttentionRow& r : rows)
        out << r.region << ',' << r.channel << ',' << r.mean_weight << '\n';
    return out.str();
}

} // namespace lfgnn
