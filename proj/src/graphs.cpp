#include "lfgnn/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "lfgnn/errors.hpp"
#include "lfgnn/io.hpp"

namespace lfgnn {
namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

} // namespace

RegionMap RegionMap::parse(const std::string& text) {
    RegionMap map;
    std::map<std::string, std::size_t> region_index;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw FormatError("region map line " + std::to_string(lineno) +
                              ": expected channel,region");
        const std::string channel = trim(line.substr(0, comma));
        const std::string region = trim(line.substr(comma + 1));
        if (channel.empty() || region.empty())
            throw FormatError("region map line " + std::to_string(lineno) +
                              ": empty channel or region name");
        for (const auto& existing : map.channels)
            if (existing == channel)
                throw FormatError("region map: duplicate channel " + channel);

        auto [it, inserted] = region_index.try_emplace(region, map.regions.size());
        if (inserted) map.regions.push_back(region);
        map.channels.push_back(channel);
        map.channel_region.push_back(it->second);
    }
    if (map.channels.empty()) throw FormatError("region map is empty");
    return map;
}

RegionMap RegionMap::load(const std::string& path) { return parse(read_file(path)); }

std::vector<std::size_t> RegionMap::canonical_order() const {
    std::vector<std::size_t> order;
    order.reserve(channels.size());
    for (std::size_t r = 0; r < regions.size(); ++r)
        for (std::size_t c = 0; c < channels.size(); ++c)
            if (channel_region[c] == r) order.push_back(c);
    return order;
}

std::vector<std::pair<std::size_t, std::size_t>> RegionMap::extents() const {
    std::vector<std::pair<std::size_t, std::size_t>> ext(regions.size(), {0, 0});
    std::size_t pos = 0;
    for (std::size_t r = 0; r < regions.size(); ++r) {
        std::size_t count = 0;
        for (std::size_t c = 0; c < channels.size(); ++c)
            if (channel_region[c] == r) ++count;
        ext[r] = {pos, pos + count};
        pos += count;
    }
    return ext;
}

std::vector<std::string> RegionMap::canonical_labels() const {
    std::vector<std::string> out;
    out.reserve(channels.size());
    for (std::size_t c : canonical_order()) out.push_back(channels[c]);
    return out;
}

std::vector<std::size_t> RegionMap::canonical_channel_region() const {
    std::vector<std::size_t> out;
    out.reserve(channels.size());
    for (std::size_t c : canonical_order()) out.push_back(channel_region[c]);
    return out;
}

std::vector<std::size_t> RegionMap::order_for(const TimeSeriesSet& ts) const {
    if (ts.channel_count() != channels.size())
        throw DataError("series has " + std::to_string(ts.channel_count()) +
                        " channels, region map describes " + std::to_string(channels.size()));
    return order_for(ts.labels);
}

std::vector<std::size_t> RegionMap::order_for(const std::vector<std::string>& labels) const {
    const std::vector<std::size_t> canon = canonical_order();
    if (labels.empty()) return canon; // positional identification
    if (labels.size() != channels.size())
        throw DataError("label count does not match the region map");

    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!position.try_emplace(labels[i], i).second)
            throw DataError("duplicate channel label: " + labels[i]);
    }
    std::vector<std::size_t> order;
    order.reserve(canon.size());
    for (std::size_t c : canon) {
        const auto it = position.find(channels[c]);
        if (it == position.end())
            throw DataError("channel " + channels[c] + " missing from the series");
        order.push_back(it->second);
    }
    return order;
}

CausalGraph build_global_adjacency(const FlowDecomposition& f, double alpha,
                                   std::vector<std::string> labels) {
    const std::size_t n = f.tau.rows;
    if (!f.tau.square() || f.p_values.rows != n || f.p_values.cols != n)
        throw ShapeError("flow decomposition is missing tau or p-values");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (!labels.empty() && labels.size() != n)
        throw ShapeError("label count does not match node count");

    CausalGraph g;
    g.kind = GraphKind::global;
    g.labels = std::move(labels);
    if (g.labels.empty())
        for (std::size_t i = 0; i < n; ++i) g.labels.push_back("ch" + std::to_string(i));
    g.adjacency = Matrix(n, n);
    g.p_values = f.p_values;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && f.p_values(i, j) < alpha) g.adjacency(i, j) = std::abs(f.tau(i, j));
    return g;
}

CausalGraph build_local_adjacency(const TimeSeriesSet& x, const RegionMap& map,
                                  const SignificanceConfig& cfg) {
    cfg.validate();
    const std::vector<std::size_t> order = map.order_for(x);
    const TimeSeriesSet canon = x.select(order);
    const auto extents = map.extents();
    const std::size_t n = canon.channel_count();

    CausalGraph g;
    g.kind = GraphKind::local;
    g.labels = map.canonical_labels();
    for (std::size_t r : map.canonical_channel_region()) g.node_region.push_back(map.regions[r]);
    g.adjacency = Matrix(n, n);
    g.p_values = Matrix(n, n);
    for (double& p : g.p_values.data) p = 1.0;

    for (std::size_t r = 0; r < extents.size(); ++r) {
        const auto [begin, end] = extents[r];
        const std::size_t size = end - begin;
        if (size == 0) {
            g.warnings.push_back("region " + map.regions[r] + " has no channels");
            continue;
        }
        if (size == 1) {
            g.warnings.push_back("region " + map.regions[r] +
                                 " has a single channel; its block is zero");
            continue;
        }
        std::vector<std::size_t> idx(size);
        for (std::size_t k = 0; k < size; ++k) idx[k] = begin + k;
        const TimeSeriesSet sub = canon.select(idx);
        const FlowDecomposition flow =
            significance_test(sub, normalize_flow(estimate_information_flow(sub)), cfg);
        const CausalGraph block = build_global_adjacency(flow, cfg.alpha);
        for (std::size_t a = 0; a < size; ++a) {
            for (std::size_t b = 0; b < size; ++b) {
                g.adjacency(begin + a, begin + b) = block.adjacency(a, b);
                g.p_values(begin + a, begin + b) = block.p_values(a, b);
            }
        }
    }
    return g;
}

Transitions degree_transitions(const Matrix& adjacency) {
    if (!adjacency.square()) throw ShapeError("adjacency must be square");
    const std::size_t n = adjacency.rows;
    Transitions t;
    t.forward = Matrix(n, n);
    t.backward = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double out_deg = 0.0, in_deg = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            out_deg += adjacency(i, j);
            in_deg += adjacency(j, i);
        }
        if (out_deg > 0.0)
            for (std::size_t j = 0; j < n; ++j) t.forward(i, j) = adjacency(i, j) / out_deg;
        if (in_deg > 0.0)
            for (std::size_t j = 0; j < n; ++j) t.backward(i, j) = adjacency(j, i) / in_deg;
    }
    return t;
}

Transitions degree_transitions(const CausalGraph& g) { return degree_transitions(g.adjacency); }

Matrix topk_sparsify(const Matrix& a, std::size_t k) {
    if (k == 0) throw ConfigError("top-k needs k >= 1");
    Matrix out(a.rows, a.cols);
    std::vector<std::size_t> idx(a.rows);
    for (std::size_t j = 0; j < a.cols; ++j) {
        for (std::size_t i = 0; i < a.rows; ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t p, std::size_t q) {
            return std::abs(a(p, j)) > std::abs(a(q, j));
        });
        const std::size_t keep = std::min(k, a.rows);
        for (std::size_t r = 0; r < keep; ++r) out(idx[r], j) = a(idx[r], j);
    }
    return out;
}

namespace {

const char* kind_name(GraphKind k) { return k == GraphKind::global ? "global" : "local"; }

} // namespace

void export_graph(const CausalGraph& g, GraphFormat format, const std::string& path) {
    const std::size_t n = g.adjacency.rows;
    std::string content;

    if (format == GraphFormat::json) {
        nlohmann::ordered_json doc;
        doc["kind"] = kind_name(g.kind);
        doc["nodes"] = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < n; ++i) {
            nlohmann::ordered_json node;
            node["id"] = i;
            node["label"] = i < g.labels.size() ? g.labels[i] : "ch" + std::to_string(i);
            node["region"] = i < g.node_region.size() ? g.node_region[i] : "";
            doc["nodes"].push_back(node);
        }
        doc["edges"] = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (g.adjacency(i, j) == 0.0) continue;
                nlohmann::ordered_json edge;
                edge["src"] = i;
                edge["dst"] = j;
                edge["weight"] = g.adjacency(i, j);
                edge["p"] = g.p_values.empty() ? 1.0 : g.p_values(i, j);
                doc["edges"].push_back(edge);
            }
        }
        content = doc.dump(2);
        content.push_back('\n');
    } else if (format == GraphFormat::dot) {
        std::ostringstream out;
        out << "digraph causal {\n";
        for (std::size_t i = 0; i < n; ++i)
            out << "  n" << i << " [label=\"" << (i < g.labels.size() ? g.labels[i] : "") << "\"];\n";
        out.precision(17);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (g.adjacency(i, j) != 0.0)
                    out << "  n" << i << " -> n" << j << " [label=\"" << g.adjacency(i, j)
                        << "\"];\n";
        out << "}\n";
        content = out.str();
    } else {
        std::ostringstream out;
        out.precision(17);
        out << "src,dst,weight,p\n";
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (g.adjacency(i, j) != 0.0)
                    out << (i < g.labels.size() ? g.labels[i] : std::to_string(i)) << ","
                        << (j < g.labels.size() ? g.labels[j] : std::to_string(j)) << ","
                        << g.adjacency(i, j) << "," << (g.p_values.empty() ? 1.0 : g.p_values(i, j))
                        << "\n";
        content = out.str();
    }

    write_file_atomic(path, content);
}

CausalGraph load_graph(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("graph JSON parse error: " + std::string(e.what()));
    }
    try {
        CausalGraph g;
        const std::string kind = doc.at("kind").get<std::string>();
        if (kind == "global")
            g.kind = GraphKind::global;
        else if (kind == "local")
            g.kind = GraphKind::local;
        else
            throw FormatError("unknown graph kind: " + kind);

        const auto& nodes = doc.at("nodes");
        const std::size_t n = nodes.size();
        g.adjacency = Matrix(n, n);
        g.p_values = Matrix(n, n);
        for (double& p : g.p_values.data) p = 1.0;
        g.labels.resize(n);
        g.node_region.resize(n);
        for (const auto& node : nodes) {
            const auto id = node.at("id").get<std::size_t>();
            if (id >= n) throw FormatError("node id out of range");
            g.labels[id] = node.at("label").get<std::string>();
            g.node_region[id] = node.value("region", "");
        }
        if (std::all_of(g.node_region.begin(), g.node_region.end(),
                        [](const std::string& s) { return s.empty(); }))
            g.node_region.clear();

        for (const auto& edge : doc.at("edges")) {
            const auto src = edge.at("src").get<std::size_t>();
            const auto dst = edge.at("dst").get<std::size_t>();
            if (src >= n || dst >= n) throw FormatError("edge endpoint out of range");
            g.adjacency(src, dst) = edge.at("weight").get<double>();
            g.p_values(src, dst) = edge.value("p", 1.0);
        }
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("graph JSON structure error: " + std::string(e.what()));
    }
}

} // namespace lfgnn
