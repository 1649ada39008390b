#include "lfgnn/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"

#include "lfgnn/errors.hpp"
#include "lfgnn/io.hpp"
#include "lfgnn/rng.hpp"
#include "lfgnn/signal.hpp"

namespace lfgnn {
namespace {

constexpr char kTrialMagic[12] = {'L', 'F', 'G', 'N', 'N', '-', 'T', 'R', 'I', 'A', 'L', '\0'};
constexpr std::uint32_t kTrialVersion = 1;

std::vector<std::string> default_labels(std::size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back("ch" + std::to_string(i + 1));
    return out;
}

TimeSeriesSet parse_trial_csv(const std::string& text, double rate) {
    if (!(rate > 0.0)) throw DataError("CSV trials need a sampling rate");
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty trial CSV");
    TimeSeriesSet ts;
    ts.rate = rate;
    std::stringstream head(line);
    std::string cell;
    while (std::getline(head, cell, ',')) ts.labels.push_back(cell);
    const std::size_t n = ts.labels.size();
    if (n == 0) throw FormatError("trial CSV has no channel columns");
    ts.channels.assign(n, {});
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream row(line);
        std::size_t col = 0;
        while (std::getline(row, cell, ',')) {
            if (col >= n)
                throw FormatError("trial CSV row " + std::to_string(line_no) + " has extra columns");
            try {
                ts.channels[col].push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw FormatError("trial CSV row " + std::to_string(line_no) +
                                  " holds a non-numeric cell");
            }
            ++col;
        }
        if (col != n)
            throw FormatError("trial CSV row " + std::to_string(line_no) + " is short");
    }
    if (ts.channels[0].empty()) throw FormatError("trial CSV has no samples");
    return ts;
}

void check_against_manifest(const TimeSeriesSet& ts, const DatasetManifest& manifest,
                            const std::string& path) {
    if (ts.labels != manifest.channels)
        throw DataError("trial channels do not match the manifest: " + path);
    if (ts.rate != manifest.rate)
        throw DataError("trial rate does not match the manifest: " + path);
}

} // namespace

double spectral_radius_bound(const Matrix& a) {
    if (!a.square() || a.rows == 0) throw ShapeError("spectral radius needs a square matrix");
    double m0 = a.max_abs();
    if (m0 == 0.0) return 0.0;
    Matrix b = a;
    for (double& v : b.data) v /= m0;
    double log_scale = std::log(m0);
    const int squarings = 30;
    for (int k = 0; k < squarings; ++k) {
        b = matmul(b, b);
        const double m = b.max_abs();
        if (m == 0.0) return 0.0;
        for (double& v : b.data) v /= m;
        log_scale = 2.0 * log_scale + std::log(m);
    }
    return std::exp(log_scale / std::pow(2.0, squarings));
}

VarData generate_var(const VarSystemSpec& spec) {
    if (spec.dim == 0) throw ConfigError("system dimension must be positive");
    if (!spec.coupling.square() || spec.coupling.rows != spec.dim)
        throw ShapeError("coupling matrix must be dim x dim");
    if (spec.length < 2) throw ConfigError("series length must be >= 2");
    if (!(spec.rate > 0.0)) throw ConfigError("sampling rate must be positive");
    if (!(spec.noise_scale >= 0.0)) throw ConfigError("noise scale must be >= 0");
    const double radius = spectral_radius_bound(spec.coupling);
    if (radius >= 1.0)
        throw StabilityError("coupling spectral radius is about " + std::to_string(radius) +
                             "; need < 1 for stationarity");

    const std::size_t burn = 1000;
    Rng rng(spec.seed);
    std::vector<double> state(spec.dim, 0.0), next(spec.dim);

    VarData out;
    out.series.rate = spec.rate;
    out.series.labels = default_labels(spec.dim);
    out.series.channels.assign(spec.dim, {});
    for (auto& ch : out.series.channels) ch.reserve(spec.length);

    for (std::size_t t = 0; t < burn + spec.length; ++t) {
        for (std::size_t i = 0; i < spec.dim; ++i) {
            double acc = spec.noise_scale * rng.next_gaussian();
            for (std::size_t j = 0; j < spec.dim; ++j) acc += spec.coupling(i, j) * state[j];
            next[i] = acc;
        }
        state.swap(next);
        if (t >= burn)
            for (std::size_t i = 0; i < spec.dim; ++i) out.series.channels[i].push_back(state[i]);
    }

    for (std::size_t src = 0; src < spec.dim; ++src)
        for (std::size_t dst = 0; dst < spec.dim; ++dst)
            if (src != dst && spec.coupling(dst, src) != 0.0)
                out.true_edges.emplace_back(src, dst);
    return out;
}

DatasetManifest DatasetManifest::load(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
        DatasetManifest m;
        m.subject = j.at("subject").get<std::string>();
        m.channels = j.at("channels").get<std::vector<std::string>>();
        m.rate = j.at("rate").get<double>();
        for (const auto& t : j.at("trials")) {
            TrialInfo info;
            info.file = t.at("file").get<std::string>();
            info.duration = t.at("duration").get<double>();
            info.arousal = t.at("arousal").get<int>();
            info.valence = t.at("valence").get<int>();
            m.trials.push_back(std::move(info));
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad manifest " + path + ": " + e.what());
    }
}

void DatasetManifest::save(const std::string& path) const {
    nlohmann::ordered_json j;
    j["subject"] = subject;
    j["channels"] = channels;
    j["rate"] = rate;
    j["trials"] = nlohmann::ordered_json::array();
    for (const TrialInfo& t : trials)
        j["trials"].push_back({{"file", t.file},
                               {"duration", t.duration},
                               {"arousal", t.arousal},
                               {"valence", t.valence}});
    write_file_atomic(path, j.dump(2) + "\n");
}

void DatasetManifest::validate(const std::string& dir) const {
    if (channels.empty()) throw DataError("manifest lists no channels");
    std::set<std::string> unique(channels.begin(), channels.end());
    if (unique.size() != channels.size()) throw DataError("manifest channel labels repeat");
    if (!(rate > 0.0)) throw DataError("manifest rate must be positive");
    for (const TrialInfo& t : trials) {
        if ((t.arousal != 0 && t.arousal != 1) || (t.valence != 0 && t.valence != 1))
            throw DataError("trial labels must be binary: " + t.file);
        if (!std::filesystem::exists(std::filesystem::path(dir) / t.file))
            throw DataError("trial file missing: " + t.file);
    }
}

void save_trial(const std::string& path, const TimeSeriesSet& ts) {
    const std::size_t n = ts.channel_count();
    if (n == 0 || ts.sample_count() == 0) throw DataError("refusing to write an empty trial");
    const std::vector<std::string> labels = ts.labels.empty() ? default_labels(n) : ts.labels;

    nlohmann::ordered_json header;
    header["channels"] = labels;
    header["rate"] = ts.rate;
    header["samples"] = ts.sample_count();
    const std::string head = header.dump();

    std::string blob(kTrialMagic, sizeof kTrialMagic);
    blob.append(reinterpret_cast<const char*>(&kTrialVersion), sizeof kTrialVersion);
    const std::uint64_t head_len = head.size();
    blob.append(reinterpret_cast<const char*>(&head_len), sizeof head_len);
    blob.append(head);
    for (const std::vector<double>& ch : ts.channels)
        blob.append(reinterpret_cast<const char*>(ch.data()), ch.size() * sizeof(double));
    write_file_atomic(path, blob);
}

void save_trial_csv(const std::string& path, const TimeSeriesSet& ts) {
    const std::size_t n = ts.channel_count();
    if (n == 0 || ts.sample_count() == 0) throw DataError("refusing to write an empty trial");
    const std::vector<std::string> labels = ts.labels.empty() ? default_labels(n) : ts.labels;
    std::ostringstream out;
    out << std::setprecision(17);
    for (std::size_t c = 0; c < n; ++c) out << (c ? "," : "") << labels[c];
    out << '\n';
    for (std::size_t t = 0; t < ts.sample_count(); ++t) {
        for (std::size_t c = 0; c < n; ++c) out << (c ? "," : "") << ts.channels[c][t];
        out << '\n';
    }
    write_file_atomic(path, out.str());
}

TimeSeriesSet load_series(const std::string& path, double csv_rate) {
    const std::string blob = read_file(path);
    if (blob.size() < sizeof kTrialMagic + sizeof kTrialVersion ||
        std::memcmp(blob.data(), kTrialMagic, sizeof kTrialMagic) != 0)
        return parse_trial_csv(blob, csv_rate);

    std::uint32_t version = 0;
    std::memcpy(&version, blob.data() + sizeof kTrialMagic, sizeof version);
    if (version != kTrialVersion)
        throw FormatError("unsupported trial file version " + std::to_string(version));
    std::size_t off = sizeof kTrialMagic + sizeof version;
    if (blob.size() < off + sizeof(std::uint64_t)) throw CorruptFile("truncated trial header: " + path);
    std::uint64_t head_len = 0;
    std::memcpy(&head_len, blob.data() + off, sizeof head_len);
    off += sizeof head_len;
    if (blob.size() < off + head_len) throw CorruptFile("truncated trial header: " + path);

    TimeSeriesSet ts;
    std::size_t samples = 0;
    try {
        const nlohmann::json header = nlohmann::json::parse(blob.substr(off, head_len));
        ts.labels = header.at("channels").get<std::vector<std::string>>();
        ts.rate = header.at("rate").get<double>();
        samples = header.at("samples").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad trial header " + path + ": " + e.what());
    }
    off += head_len;

    const std::size_t n = ts.labels.size();
    if (n == 0 || samples == 0) throw FormatError("trial header describes no data: " + path);
    if (blob.size() - off != n * samples * sizeof(double))
        throw CorruptFile("trial payload does not match its header: " + path);
    ts.channels.assign(n, std::vector<double>(samples));
    for (std::size_t c = 0; c < n; ++c) {
        std::memcpy(ts.channels[c].data(), blob.data() + off, samples * sizeof(double));
        off += samples * sizeof(double);
    }
    return ts;
}

TimeSeriesSet load_trial(const std::string& path, const DatasetManifest& manifest) {
    TimeSeriesSet ts = load_series(path, manifest.rate);
    check_against_manifest(ts, manifest, path);
    return ts;
}

std::vector<LoadedTrial> load_dataset(const DatasetManifest& manifest, const std::string& dir) {
    manifest.validate(dir);
    std::vector<LoadedTrial> out;
    out.reserve(manifest.trials.size());
    for (std::size_t i = 0; i < manifest.trials.size(); ++i) {
        const TrialInfo& t = manifest.trials[i];
        LoadedTrial loaded;
        loaded.series = load_trial((std::filesystem::path(dir) / t.file).string(), manifest);
        loaded.arousal = t.arousal;
        loaded.valence = t.valence;
        loaded.trial_id = i;
        out.push_back(std::move(loaded));
    }
    return out;
}

void EmotionSynthConfig::validate() const {
    if (channels < 4) throw ConfigError("need at least 4 channels for 4 regions");
    if (trials < 2) throw ConfigError("need at least 2 trials");
    if (!(trial_seconds > 0.0)) throw ConfigError("trial duration must be positive");
    if (!(rate > 0.0)) throw ConfigError("sampling rate must be positive");
    if (!(separation >= 0.0)) throw ConfigError("separation must be >= 0");
    if (!(coupling >= 0.0)) throw ConfigError("coupling must be >= 0");
}

EmotionSynthResult generate_emotion_synthetic(const EmotionSynthConfig& cfg,
                                              const std::string& dir) {
    cfg.validate();
    std::filesystem::create_directories(dir);

    const std::vector<std::string> region_names = {"Frontal", "Temporal", "Central", "Posterior"};
    const char prefixes[4] = {'F', 'T', 'C', 'P'};
    std::vector<std::size_t> region_of;
    std::vector<std::string> labels;
    std::string region_text;
    for (std::size_t r = 0; r < 4; ++r) {
        const std::size_t size = cfg.channels / 4 + (r < cfg.channels % 4 ? 1 : 0);
        for (std::size_t k = 0; k < size; ++k) {
            labels.push_back(prefixes[r] + std::to_string(k + 1));
            region_of.push_back(r);
            region_text += labels.back() + "," + region_names[r] + "\n";
        }
    }

    EmotionSynthResult result;
    result.region_path = (std::filesystem::path(dir) / "regions.txt").string();
    write_file_atomic(result.region_path, region_text);
    result.regions = RegionMap::parse(region_text);

    // planted class-1 pairs: k-th frontal channel into k-th temporal channel
    std::vector<std::size_t> frontal, temporal;
    for (std::size_t c = 0; c < cfg.channels; ++c) {
        if (region_of[c] == 0) frontal.push_back(c);
        if (region_of[c] == 1) temporal.push_back(c);
    }
    std::vector<std::pair<std::size_t, std::size_t>> planted;
    for (std::size_t k = 0; k < std::min(frontal.size(), temporal.size()); ++k) {
        planted.emplace_back(frontal[k], temporal[k]);
        result.planted_edges.emplace_back(labels[frontal[k]], labels[temporal[k]]);
    }

    const std::vector<BandSpec> bands = default_bands();
    const std::vector<double> base_amp = {1.2, 1.0, 1.5, 0.9, 0.7};
    const std::size_t lead = 200;
    const std::size_t steps = static_cast<std::size_t>(std::llround(cfg.trial_seconds * cfg.rate));

    result.manifest.subject = cfg.subject;
    result.manifest.channels = labels;
    result.manifest.rate = cfg.rate;

    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
        const int label = static_cast<int>(trial % 2);
        Rng phase_rng = Rng(cfg.seed).split(trial, 1);
        Rng noise_rng = Rng(cfg.seed).split(trial, 2);

        // Band amplitudes with the class-1 power shifts. Frequencies are
        // jittered per channel; identical frequencies everywhere would
        // phase-lock the channels into a genuine linear dependence that the
        // flow estimator (rightly) reports, swamping the planted coupling.
        constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
        std::vector<std::vector<double>> amp(cfg.channels, std::vector<double>(bands.size()));
        std::vector<std::vector<double>> phase(cfg.channels, std::vector<double>(bands.size()));
        std::vector<std::vector<double>> omega(cfg.channels, std::vector<double>(bands.size()));
        for (std::size_t c = 0; c < cfg.channels; ++c) {
            for (std::size_t b = 0; b < bands.size(); ++b) {
                phase[c][b] = kTwoPi * phase_rng.next_double();
                const double center = std::sqrt(bands[b].low_hz * bands[b].high_hz);
                const double jitter = 0.9 + 0.2 * phase_rng.next_double();
                omega[c][b] = kTwoPi * center * jitter / cfg.rate;
                double a = base_amp[b];
                if (label == 1) {
                    if (region_of[c] == 0 && b >= 3) a *= 1.0 + 0.5 * cfg.separation;
                    if (region_of[c] == 1 && b == 2)
                        a *= std::max(0.1, 1.0 - 0.4 * cfg.separation);
                }
                amp[c][b] = a;
            }
        }

        const double kappa = cfg.coupling * cfg.separation;
        std::vector<std::vector<double>> x(cfg.channels, std::vector<double>(lead + steps, 0.0));
        std::vector<double> w(cfg.channels, 0.0), w_prev(cfg.channels, 0.0);
        for (std::size_t t = 0; t < lead + steps; ++t) {
            for (std::size_t c = 0; c < cfg.channels; ++c) {
                double drive = 0.0;
                if (t > 0) {
                    // within-region chain, both classes
                    if (c > 0 && region_of[c - 1] == region_of[c]) drive += 0.15 * x[c - 1][t - 1];
                    if (label == 1) {
                        for (const auto& [src, dst] : planted)
                            if (dst == c) drive += kappa * x[src][t - 1];
                    }
                }
                w[c] = 0.3 * w_prev[c] + drive + noise_rng.next_gaussian();
                double osc = 0.0;
                for (std::size_t b = 0; b < bands.size(); ++b)
                    osc += amp[c][b] * std::sin(omega[c][b] * static_cast<double>(t) + phase[c][b]);
                x[c][t] = osc + w[c];
            }
            w_prev = w;
        }

        TimeSeriesSet ts;
        ts.rate = cfg.rate;
        ts.labels = labels;
        ts.channels.assign(cfg.channels, {});
        for (std::size_t c = 0; c < cfg.channels; ++c)
            ts.channels[c].assign(x[c].begin() + static_cast<std::ptrdiff_t>(lead), x[c].end());

        std::ostringstream name;
        name << "trial_" << std::setw(3) << std::setfill('0') << trial << ".bin";
        save_trial((std::filesystem::path(dir) / name.str()).string(), ts);
        result.manifest.trials.push_back({name.str(), cfg.trial_seconds, label, label});
    }

    result.manifest_path = (std::filesystem::path(dir) / "manifest.json").string();
    result.manifest.save(result.manifest_path);
    return result;
}

} // namespace lfgnn
