#include "bi3d/io.hpp"

#include "bi3d/label_access.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace bi3d::io {

// --- base64 ----------------------------------------------------------------

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

} // namespace

std::string base64_encode(std::span<const unsigned char> bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        const unsigned v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const unsigned v = bytes[i] << 16;
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += "==";
    } else if (rest == 2) {
        const unsigned v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
    if (text.size() % 4 != 0) throw DataError("base64 payload length is not a multiple of 4");
    std::vector<unsigned char> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int v[4];
        std::size_t pad = 0;
        for (std::size_t k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=' && i + 4 == text.size() && k >= 2) {
                v[k] = 0;
                ++pad;
            } else {
                if (pad > 0) throw DataError("base64 padding in the middle of a quantum");
                v[k] = decode_char(c);
                if (v[k] < 0) throw DataError(std::string("invalid base64 character '") + c + "'");
            }
        }
        const unsigned triple = (static_cast<unsigned>(v[0]) << 18) | (static_cast<unsigned>(v[1]) << 12) |
                                (static_cast<unsigned>(v[2]) << 6) | static_cast<unsigned>(v[3]);
        out.push_back(static_cast<unsigned char>((triple >> 16) & 0xFF));
        if (pad < 2) out.push_back(static_cast<unsigned char>((triple >> 8) & 0xFF));
        if (pad < 1) out.push_back(static_cast<unsigned char>(triple & 0xFF));
    }
    return out;
}

std::vector<unsigned char> pack_floats(std::span<const float> values) {
    std::vector<unsigned char> out;
    out.reserve(values.size() * 4);
    for (float f : values) {
        const auto bits = std::bit_cast<std::uint32_t>(f);
        for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>((bits >> (8 * b)) & 0xFF));
    }
    return out;
}

std::vector<float> unpack_floats(std::span<const unsigned char> bytes) {
    if (bytes.size() % 4 != 0) throw DataError("float payload is not a multiple of 4 bytes");
    std::vector<float> out(bytes.size() / 4);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
        out[i] = std::bit_cast<float>(bits);
    }
    return out;
}

// --- strict object reader ------------------------------------------------------

namespace {

class StrictObject {
public:
    StrictObject(const json& j, std::string context) : j_(j), context_(std::move(context)) {
        if (!j_.is_object()) throw DataError(context_ + ": expected a JSON object");
    }

    bool has(const char* key) {
        known_.insert(key);
        return j_.contains(key);
    }

    template <class T>
    void get(const char* key, T& out) {
        if (!has(key)) return;
        out = convert<T>(j_.at(key), key);
    }

    template <class T>
    T require(const char* key) {
        if (!has(key)) throw DataError(context_ + ": missing required key '" + key + "'");
        return convert<T>(j_.at(key), key);
    }

    const json& at(const char* key) const { return j_.at(key); }
    std::string path(const char* key) const { return context_ + "." + key; }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (!known_.count(item.key())) throw DataError(context_ + ": unknown key '" + item.key() + "'");
        }
    }

private:
    template <class T>
    T convert(const json& v, const char* key) const {
        try {
            if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
                if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
                    throw DataError(context_ + "." + key + ": must be non-negative");
                }
                if (!v.is_number_integer()) throw DataError(context_ + "." + key + ": expected an integer");
            }
            return v.get<T>();
        } catch (const json::exception& e) {
            throw DataError(context_ + "." + key + ": " + e.what());
        }
    }

    const json& j_;
    std::string context_;
    std::set<std::string> known_;
};

json shape_json(std::size_t a, std::size_t b, std::size_t c) {
    return json::array({a, b, c});
}

Tensor3 tensor_from(const json& shape, const json& payload, const char* what) {
    if (!shape.is_array() || shape.size() != 3) throw DataError(std::string(what) + ": shape must be [C,H,W]");
    Tensor3 t;
    t.channels = shape[0].get<std::size_t>();
    t.height = shape[1].get<std::size_t>();
    t.width = shape[2].get<std::size_t>();
    t.data = unpack_floats(base64_decode(payload.get<std::string>()));
    if (t.data.size() != t.channels * t.height * t.width) {
        throw DataError(std::string(what) + ": payload holds " + std::to_string(t.data.size()) +
                        " floats, shape needs " + std::to_string(t.channels * t.height * t.width));
    }
    return t;
}

} // namespace

// --- frames ------------------------------------------------------------------

std::string frame_to_line(const FrameRecord& frame) {
    json j;
    j["id"] = frame.id;
    j["domain"] = to_string(frame.domain);
    const auto& f = frame.feature_map;
    const auto& o = frame.objectness_map;
    j["feature_shape"] = shape_json(f.channels, f.height, f.width);
    j["feature_map"] = base64_encode(pack_floats(f.data));
    j["objectness_shape"] = shape_json(o.channels, o.height, o.width);
    j["objectness"] = base64_encode(pack_floats(o.data));
    const std::size_t k = frame.roi_features.size();
    const std::size_t d = k == 0 ? 0 : frame.roi_features.front().size();
    std::vector<float> flat;
    flat.reserve(k * d);
    for (const auto& roi : frame.roi_features) {
        if (roi.size() != d) throw DataError("frame '" + frame.id + "': ROI vectors differ in dimension");
        flat.insert(flat.end(), roi.begin(), roi.end());
    }
    j["roi_shape"] = json::array({k, d});
    j["rois"] = base64_encode(pack_floats(flat));
    j["confidences"] = base64_encode(pack_floats(frame.roi_confidences));
    if (const auto& label = LabelAccess::reveal(frame)) j["hidden_label"] = *label;
    return j.dump();
}

FrameRecord frame_from_line(const std::string& line, std::size_t line_number) {
    const std::string where = "line " + std::to_string(line_number);
    try {
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError(std::string("malformed JSON: ") + e.what());
        }
        StrictObject obj(j, "frame");
        FrameRecord f;
        f.id = obj.require<std::string>("id");
        f.domain = domain_from_string(obj.require<std::string>("domain"));
        obj.has("feature_shape");
        obj.has("feature_map");
        obj.has("objectness_shape");
        obj.has("objectness");
        obj.has("roi_shape");
        obj.has("rois");
        obj.has("confidences");
        for (const char* key : {"feature_shape", "feature_map", "objectness_shape", "objectness", "roi_shape", "rois",
                                "confidences"}) {
            if (!j.contains(key)) throw DataError(std::string("missing required key '") + key + "'");
        }
        f.feature_map = tensor_from(obj.at("feature_shape"), obj.at("feature_map"), "feature_map");
        f.objectness_map = tensor_from(obj.at("objectness_shape"), obj.at("objectness"), "objectness");

        const auto& roi_shape = obj.at("roi_shape");
        if (!roi_shape.is_array() || roi_shape.size() != 2) throw DataError("roi_shape must be [k,d]");
        const auto k = roi_shape[0].get<std::size_t>();
        const auto d = roi_shape[1].get<std::size_t>();
        const auto flat = unpack_floats(base64_decode(obj.at("rois").get<std::string>()));
        if (flat.size() != k * d) throw DataError("rois payload does not match roi_shape");
        for (std::size_t m = 0; m < k; ++m) {
            f.roi_features.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(m * d),
                                        flat.begin() + static_cast<std::ptrdiff_t>((m + 1) * d));
        }
        f.roi_confidences = unpack_floats(base64_decode(obj.at("confidences").get<std::string>()));
        if (obj.has("hidden_label")) f.hidden_label = HiddenLabel(obj.at("hidden_label").get<std::string>());
        obj.finish();

        const auto problems = validate_frame(f);
        if (!problems.empty()) {
            std::string msg = "frame '" + f.id + "' is invalid:";
            for (const auto& p : problems) msg += " " + p + ";";
            throw DataError(msg);
        }
        return f;
    } catch (const DataError& e) {
        throw DataError(where + ": " + e.what());
    } catch (const json::exception& e) {
        throw DataError(where + ": " + e.what());
    }
}

void save_frames(const std::filesystem::path& path, std::span<const FrameRecord> frames) {
    std::string text;
    for (const auto& f : frames) {
        text += frame_to_line(f);
        text += '\n';
    }
    write_text(path, text);
}

std::vector<FrameRecord> load_frames(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::vector<FrameRecord> frames;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        frames.push_back(frame_from_line(line, line_number));
    }
    return frames;
}

// --- configs -------------------------------------------------------------------

namespace {

std::string entropy_base_name(scoring::EntropyBase b) {
    return b == scoring::EntropyBase::Bits ? "bits" : "nats";
}

scoring::EntropyBase entropy_base_from(const std::string& s) {
    if (s == "bits") return scoring::EntropyBase::Bits;
    if (s == "nats") return scoring::EntropyBase::Nats;
    throw DataError("entropy_base must be 'bits' or 'nats'");
}

std::string criterion_name(target_sampler::MergeCriterion c) {
    return c == target_sampler::MergeCriterion::MinPairwise ? "min-pairwise" : "max-pairwise";
}

target_sampler::MergeCriterion criterion_from(const std::string& s) {
    if (s == "min-pairwise") return target_sampler::MergeCriterion::MinPairwise;
    if (s == "max-pairwise") return target_sampler::MergeCriterion::MaxPairwise;
    throw DataError("merge_criterion must be 'min-pairwise' or 'max-pairwise'");
}

json schedule_json(const BudgetSchedule& s) {
    return json{{"per_round", s.per_round}, {"trigger_epochs", s.trigger_epochs}};
}

TrainConfig train_config_from(const json& j, std::vector<std::size_t>& hidden, double& leak) {
    StrictObject obj(j, "discriminator");
    TrainConfig tc;
    obj.get("learning_rate", tc.learning_rate);
    obj.get("epochs", tc.epochs);
    obj.get("batch_size", tc.batch_size);
    obj.get("l2", tc.l2);
    obj.get("seed", tc.seed);
    obj.get("hidden", hidden);
    obj.get("leak", leak);
    obj.finish();
    tc.validate();
    return tc;
}

std::vector<double> number_array(const json& j, const char* what) {
    if (!j.is_array()) throw DataError(std::string(what) + ": expected an array");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw DataError(std::string(what) + ": expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

} // namespace

json to_json(const TrainConfig& cfg) {
    return json{{"learning_rate", cfg.learning_rate},
                {"epochs", cfg.epochs},
                {"batch_size", cfg.batch_size},
                {"l2", cfg.l2},
                {"seed", cfg.seed}};
}

json to_json(const pipeline::PipelineConfig& cfg) {
    json disc = to_json(cfg.discriminator);
    disc["hidden"] = cfg.discriminator_hidden;
    disc["leak"] = cfg.discriminator_leak;
    return json{{"schedule", schedule_json(cfg.schedule)},
                {"source_mode", cfg.source_mode ? source_sampler::describe(*cfg.source_mode) : std::string("all")},
                {"source_finetune_epochs", cfg.source_finetune_epochs},
                {"total_epochs", cfg.total_epochs},
                {"discriminator", disc},
                {"seed", cfg.seed},
                {"rescore_each_round", cfg.rescore_each_round},
                {"banks",
                 {{"merge_criterion", criterion_name(cfg.banks.criterion)},
                  {"update_prototype_on_join", cfg.banks.update_prototype_on_join}}},
                {"entropy_base", entropy_base_name(cfg.entropy_base)}};
}

BudgetSchedule schedule_from_json(const json& j) {
    if (j.is_string()) return pipeline::preset_schedule(j.get<std::string>());
    StrictObject obj(j, "schedule");
    std::vector<std::size_t> epochs{0, 5};
    obj.get("trigger_epochs", epochs);
    BudgetSchedule s;
    if (obj.has("per_round")) {
        if (obj.has("budget")) throw DataError("schedule: give either 'per_round' or 'budget', not both");
        obj.get("per_round", s.per_round);
        s.trigger_epochs = epochs;
    } else {
        s = BudgetSchedule::equal_split(obj.require<std::size_t>("budget"), epochs);
    }
    obj.finish();
    s.validate();
    return s;
}

namespace {

pipeline::PipelineConfig pipeline_config_from(const json& j, bool schedule_required) {
    StrictObject obj(j, "pipeline");
    pipeline::PipelineConfig cfg;
    if (obj.has("schedule")) {
        cfg.schedule = schedule_from_json(obj.at("schedule"));
    } else if (schedule_required) {
        throw DataError("pipeline: missing required key 'schedule'");
    }
    if (obj.has("source_mode")) {
        const auto mode = obj.require<std::string>("source_mode");
        if (mode == "all") {
            cfg.source_mode.reset();
        } else {
            cfg.source_mode = source_sampler::parse_mode(mode);
        }
    }
    obj.get("source_finetune_epochs", cfg.source_finetune_epochs);
    obj.get("total_epochs", cfg.total_epochs);
    if (obj.has("discriminator")) {
        cfg.discriminator = train_config_from(obj.at("discriminator"), cfg.discriminator_hidden, cfg.discriminator_leak);
    }
    obj.get("seed", cfg.seed);
    obj.get("rescore_each_round", cfg.rescore_each_round);
    if (obj.has("banks")) {
        StrictObject banks(obj.at("banks"), "pipeline.banks");
        if (banks.has("merge_criterion")) cfg.banks.criterion = criterion_from(banks.require<std::string>("merge_criterion"));
        banks.get("update_prototype_on_join", cfg.banks.update_prototype_on_join);
        banks.finish();
    }
    if (obj.has("entropy_base")) cfg.entropy_base = entropy_base_from(obj.require<std::string>("entropy_base"));
    obj.finish();
    cfg.validate();
    return cfg;
}

} // namespace

pipeline::PipelineConfig pipeline_config_from_json(const json& j, bool require_schedule) {
    return pipeline_config_from(j, require_schedule);
}

json to_json(const simulator::SyntheticConfig& cfg) {
    return json{{"n_source", cfg.n_source},
                {"n_target", cfg.n_target},
                {"n_eval", cfg.n_eval},
                {"clusters_per_domain", cfg.clusters_per_domain},
                {"feature_dims",
                 {{"channels", cfg.dims.channels},
                  {"height", cfg.dims.height},
                  {"width", cfg.dims.width},
                  {"anchor_channels", cfg.dims.anchor_channels},
                  {"roi_dim", cfg.dims.roi_dim}}},
                {"domain_shift", cfg.domain_shift},
                {"label_noise", cfg.label_noise},
                {"seed", cfg.seed},
                {"centroid_radius", cfg.centroid_radius},
                {"roi_noise", cfg.roi_noise},
                {"scene_noise", cfg.scene_noise},
                {"feature_noise", cfg.feature_noise},
                {"imbalance", cfg.imbalance},
                {"max_rois", cfg.max_rois},
                {"spread_centroids", cfg.spread_centroids}};
}

simulator::SyntheticConfig synthetic_config_from_json(const json& j) {
    StrictObject obj(j, "synthetic");
    simulator::SyntheticConfig cfg;
    obj.get("n_source", cfg.n_source);
    obj.get("n_target", cfg.n_target);
    obj.get("n_eval", cfg.n_eval);
    obj.get("clusters_per_domain", cfg.clusters_per_domain);
    if (obj.has("feature_dims")) {
        StrictObject dims(obj.at("feature_dims"), "synthetic.feature_dims");
        dims.get("channels", cfg.dims.channels);
        dims.get("height", cfg.dims.height);
        dims.get("width", cfg.dims.width);
        dims.get("anchor_channels", cfg.dims.anchor_channels);
        dims.get("roi_dim", cfg.dims.roi_dim);
        dims.finish();
    }
    obj.get("domain_shift", cfg.domain_shift);
    obj.get("label_noise", cfg.label_noise);
    obj.get("seed", cfg.seed);
    obj.get("centroid_radius", cfg.centroid_radius);
    obj.get("roi_noise", cfg.roi_noise);
    obj.get("scene_noise", cfg.scene_noise);
    obj.get("feature_noise", cfg.feature_noise);
    obj.get("imbalance", cfg.imbalance);
    obj.get("max_rois", cfg.max_rois);
    obj.get("spread_centroids", cfg.spread_centroids);
    obj.finish();
    cfg.validate();
    return cfg;
}

json to_json(const simulator::ProxyConfig& cfg) {
    return json{{"classes", cfg.classes},
                {"learning_rate", cfg.learning_rate},
                {"l2", cfg.l2},
                {"pretrain_epochs", cfg.pretrain_epochs},
                {"steps_per_epoch", cfg.steps_per_epoch},
                {"target_weight", cfg.target_weight},
                {"seed", cfg.seed}};
}

simulator::ProxyConfig proxy_config_from_json(const json& j) {
    StrictObject obj(j, "proxy");
    simulator::ProxyConfig cfg;
    obj.get("classes", cfg.classes);
    obj.get("learning_rate", cfg.learning_rate);
    obj.get("l2", cfg.l2);
    obj.get("pretrain_epochs", cfg.pretrain_epochs);
    obj.get("steps_per_epoch", cfg.steps_per_epoch);
    obj.get("target_weight", cfg.target_weight);
    obj.get("seed", cfg.seed);
    obj.finish();
    cfg.validate();
    return cfg;
}

json to_json(const simulator::BenchmarkConfig& cfg) {
    json budgets = json::array();
    for (const auto& b : cfg.budgets) budgets.push_back({{"fraction", b.fraction}, {"trigger_epochs", b.trigger_epochs}});
    json strategies = json::array();
    for (auto s : cfg.strategies) strategies.push_back(simulator::to_string(s));
    return json{{"data", to_json(cfg.data)},
                {"pipeline", to_json(cfg.pipeline)},
                {"proxy", to_json(cfg.proxy)},
                {"budgets", budgets},
                {"strategies", strategies},
                {"seeds", cfg.seeds},
                {"baselines_select_source", cfg.baselines_select_source},
                {"committee_head_epochs", cfg.committee_head_epochs},
                {"committee_heads", cfg.committee_heads}};
}

simulator::BenchmarkConfig benchmark_config_from_json(const json& j) {
    StrictObject obj(j, "benchmark");
    simulator::BenchmarkConfig cfg;
    if (obj.has("data")) cfg.data = synthetic_config_from_json(obj.at("data"));
    if (obj.has("pipeline")) cfg.pipeline = pipeline_config_from(obj.at("pipeline"), false);
    if (obj.has("proxy")) cfg.proxy = proxy_config_from_json(obj.at("proxy"));
    cfg.proxy.classes = cfg.data.clusters_per_domain;
    if (obj.has("budgets")) {
        cfg.budgets.clear();
        const auto& arr = obj.at("budgets");
        if (!arr.is_array()) throw DataError("benchmark.budgets: expected an array");
        for (const auto& b : arr) {
            StrictObject level(b, "benchmark.budgets[]");
            simulator::BudgetLevel bl;
            bl.fraction = level.require<double>("fraction");
            level.get("trigger_epochs", bl.trigger_epochs);
            if (bl.trigger_epochs.empty()) bl.trigger_epochs = {0, 5};
            level.finish();
            cfg.budgets.push_back(std::move(bl));
        }
    }
    if (obj.has("strategies")) {
        cfg.strategies.clear();
        for (const auto& s : obj.require<std::vector<std::string>>("strategies")) {
            cfg.strategies.push_back(simulator::strategy_from_string(s));
        }
    }
    obj.get("seeds", cfg.seeds);
    if (obj.has("num_seeds")) {
        if (!cfg.seeds.empty()) throw DataError("benchmark: give either 'seeds' or 'num_seeds', not both");
        const auto n = obj.require<std::size_t>("num_seeds");
        for (std::size_t s = 0; s < n; ++s) cfg.seeds.push_back(s);
    }
    obj.get("baselines_select_source", cfg.baselines_select_source);
    obj.get("committee_head_epochs", cfg.committee_head_epochs);
    obj.get("committee_heads", cfg.committee_heads);
    obj.finish();
    cfg.validate();
    return cfg;
}

json read_json(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

pipeline::PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    try {
        return pipeline_config_from_json(read_json(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

simulator::SyntheticConfig load_synthetic_config(const std::filesystem::path& path) {
    try {
        return synthetic_config_from_json(read_json(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

simulator::BenchmarkConfig load_benchmark_config(const std::filesystem::path& path) {
    try {
        return benchmark_config_from_json(read_json(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

// --- checkpoints and state ----------------------------------------------------------

json to_json(const DiscriminatorModel& model) {
    json layers = json::array();
    for (const auto& layer : model.layers()) {
        layers.push_back({{"inputs", layer.inputs},
                          {"outputs", layer.outputs},
                          {"weights", layer.weights},
                          {"biases", layer.biases}});
    }
    return json{{"format", "bi3d-discriminator"},
                {"version", 1},
                {"layer_dims", model.layer_dims()},
                {"leak", model.leak()},
                {"seed", model.seed()},
                {"layers", layers}};
}

DiscriminatorModel model_from_json(const json& j) {
    StrictObject obj(j, "checkpoint");
    if (obj.require<std::string>("format") != "bi3d-discriminator") throw DataError("checkpoint: unknown format");
    if (obj.require<int>("version") != 1) throw DataError("checkpoint: unsupported version");
    const auto dims = obj.require<std::vector<std::size_t>>("layer_dims");
    const auto leak = obj.require<double>("leak");
    const auto seed = obj.require<std::uint64_t>("seed");
    if (!obj.has("layers") || !obj.at("layers").is_array()) throw DataError("checkpoint: missing layers");
    std::vector<DenseLayer> layers;
    for (const auto& lj : obj.at("layers")) {
        StrictObject lo(lj, "checkpoint.layers[]");
        DenseLayer layer;
        layer.inputs = lo.require<std::size_t>("inputs");
        layer.outputs = lo.require<std::size_t>("outputs");
        layer.weights = number_array(lj.at("weights"), "weights");
        lo.has("weights");
        layer.biases = number_array(lj.at("biases"), "biases");
        lo.has("biases");
        lo.finish();
        layers.push_back(std::move(layer));
    }
    obj.finish();
    auto model = DiscriminatorModel::from_layers(std::move(layers), leak, seed);
    if (model.layer_dims() != dims) throw DataError("checkpoint: layer_dims disagree with layer shapes");
    return model;
}

void save_model(const std::filesystem::path& path, const DiscriminatorModel& model) {
    write_text(path, dump(to_json(model)));
}

DiscriminatorModel load_model(const std::filesystem::path& path) {
    try {
        return model_from_json(read_json(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

json to_json(const PipelineState& state) {
    return json{{"selected_source", state.selected_source},
                {"labeled_target", state.labeled_target},
                {"round", state.round},
                {"rng_seed", state.rng_seed}};
}

PipelineState pipeline_state_from_json(const json& j) {
    StrictObject obj(j, "pipeline_state");
    PipelineState s;
    s.selected_source = obj.require<std::vector<std::string>>("selected_source");
    s.labeled_target = obj.require<std::vector<std::string>>("labeled_target");
    s.round = obj.require<std::size_t>("round");
    s.rng_seed = obj.require<std::uint64_t>("rng_seed");
    obj.finish();
    return s;
}

// --- reports -------------------------------------------------------------------

namespace {

json scores_json(std::span<const Score> scores) {
    json arr = json::array();
    for (const auto& s : scores) arr.push_back(json::array({s.frame_id, s.value}));
    return arr;
}

json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

std::string number_text(double v) {
    return json(v).dump();
}

} // namespace

json to_json(const pipeline::RunReport& report, const pipeline::PipelineConfig& cfg) {
    json rounds = json::array();
    for (const auto& r : report.rounds) {
        std::map<std::string, double> by_id;
        for (const auto& s : r.candidate_scores) by_id[s.frame_id] = s.value;
        std::vector<Score> selected_scores;
        for (const auto& id : r.selected) {
            if (const auto it = by_id.find(id); it != by_id.end()) selected_scores.push_back(Score{id, it->second});
        }
        rounds.push_back({{"round", r.round},
                          {"epoch", r.epoch},
                          {"budget", r.budget},
                          {"selected", r.selected},
                          {"selected_scores", scores_json(selected_scores)},
                          {"candidate_scores", scores_json(r.candidate_scores)},
                          {"labeled_total", r.labeled_total}});
    }
    return json{{"strategy", report.strategy},
                {"seed", report.seed},
                {"config", to_json(cfg)},
                {"stages",
                 {{"pretrain", {{"accuracy", optional_number(report.accuracy_pretrained)}}},
                  {"discriminator",
                   {{"detector_before", report.detector_before_discriminator},
                    {"detector_after", report.detector_after_discriminator},
                    {"loss", report.discriminator_loss}}},
                  {"source_selection",
                   {{"scores", scores_json(report.source_scores)},
                    {"selected", report.selected_source},
                    {"accuracy_after", optional_number(report.accuracy_after_source)}}}}},
                {"rounds", rounds},
                {"epoch_accuracy", report.epoch_accuracy},
                {"final_accuracy", optional_number(report.final_accuracy)},
                {"warnings", report.warnings},
                {"halted", report.halted},
                {"manifest", report.manifest}};
}

json to_json(const simulator::BenchmarkReport& report) {
    json rows = json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"strategy", r.strategy},
                        {"seed", r.seed},
                        {"budget_fraction", r.budget_fraction},
                        {"budget_frames", r.budget_frames},
                        {"accuracy", r.accuracy},
                        {"diversity", r.diversity},
                        {"labeled", r.labeled},
                        {"selected_source", r.selected_source}});
    }
    json summary = json::array();
    for (const auto& s : report.summary) {
        summary.push_back({{"strategy", s.strategy},
                           {"budget_fraction", s.budget_fraction},
                           {"budget_frames", s.budget_frames},
                           {"runs", s.runs},
                           {"mean_accuracy", s.mean_accuracy},
                           {"std_accuracy", s.std_accuracy},
                           {"mean_diversity", s.mean_diversity},
                           {"mean_diff_vs_random", optional_number(s.mean_diff_vs_random)},
                           {"p_value_vs_random", optional_number(s.p_value_vs_random)}});
    }
    return json{{"rows", rows}, {"summary", summary}};
}

std::string benchmark_csv(const simulator::BenchmarkReport& report) {
    std::ostringstream os;
    os << "strategy,seed,budget_fraction,budget_frames,accuracy,diversity,labeled,selected_source\n";
    for (const auto& r : report.rows) {
        os << r.strategy << ',' << r.seed << ',' << number_text(r.budget_fraction) << ',' << r.budget_frames << ','
           << number_text(r.accuracy) << ',' << number_text(r.diversity) << ',' << r.labeled << ','
           << r.selected_source << '\n';
    }
    return os.str();
}

std::string benchmark_plot_data(const simulator::BenchmarkReport& report) {
    std::vector<std::string> strategies;
    std::vector<std::size_t> budgets;
    std::map<std::pair<std::size_t, std::string>, double> mean;
    for (const auto& s : report.summary) {
        if (std::find(strategies.begin(), strategies.end(), s.strategy) == strategies.end()) strategies.push_back(s.strategy);
        if (std::find(budgets.begin(), budgets.end(), s.budget_frames) == budgets.end()) budgets.push_back(s.budget_frames);
        mean[{s.budget_frames, s.strategy}] = s.mean_accuracy;
    }
    std::ostringstream os;
    os << "budget_frames";
    for (const auto& s : strategies) os << '\t' << s;
    os << '\n';
    for (auto b : budgets) {
        os << b;
        for (const auto& s : strategies) {
            const auto it = mean.find({b, s});
            os << '\t' << (it == mean.end() ? std::string("nan") : number_text(it->second));
        }
        os << '\n';
    }
    return os.str();
}

std::string dump(const json& j) {
    return j.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw DataError("write to '" + path.string() + "' failed");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_manifest(const std::filesystem::path& path, std::span<const std::string> ids) {
    std::string text;
    for (const auto& id : ids) {
        text += id;
        text += '\n';
    }
    write_text(path, text);
}

std::vector<std::string> read_manifest(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) ids.push_back(line);
    }
    return ids;
}

} // namespace bi3d::io
