#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "atcd/errors.hpp"
#include "atcd/train.hpp"
#include "json.hpp"

// Checkpoint container: 8-byte magic, little-endian uint32 header length, a
// JSON header (version, dims, config, stats, trace, block table) and the raw
// little-endian float64 parameter payload.

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace atcd {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'A', 'T', 'C', 'D', 'C', 'K', 'P', 'T'};

std::string kind_to_string(NormKind k) {
    switch (k) {
        case NormKind::zscore: return "zscore";
        case NormKind::maxabs: return "maxabs";
        case NormKind::integer_class: return "integer_class";
        case NormKind::passthrough: return "passthrough";
    }
    throw std::invalid_argument("unknown normalization kind");
}

NormKind kind_from_string(const std::string& s) {
    if (s == "zscore") return NormKind::zscore;
    if (s == "maxabs") return NormKind::maxabs;
    if (s == "integer_class") return NormKind::integer_class;
    if (s == "passthrough") return NormKind::passthrough;
    throw data_error("unknown normalization kind: " + s);
}

json stat_to_json(const FeatureStat& fs) {
    return json{{"name", fs.name},   {"kind", kind_to_string(fs.kind)},
                {"mean", fs.mean},   {"stdev", fs.stdev},
                {"bound", fs.bound}, {"num_classes", fs.num_classes}};
}

FeatureStat stat_from_json(const json& j) {
    FeatureStat fs;
    fs.name = j.at("name").get<std::string>();
    fs.kind = kind_from_string(j.at("kind").get<std::string>());
    fs.mean = j.at("mean").get<double>();
    fs.stdev = j.at("stdev").get<double>();
    fs.bound = j.at("bound").get<double>();
    fs.num_classes = j.at("num_classes").get<int>();
    return fs;
}

json stats_to_json(const NormalizationStats& st) {
    json nodes = json::array();
    for (const auto& fs : st.node) nodes.push_back(stat_to_json(fs));
    return json{{"node", nodes},
                {"edge_separation", stat_to_json(st.edge_separation)},
                {"edge_closing", stat_to_json(st.edge_closing)}};
}

NormalizationStats stats_from_json(const json& j) {
    NormalizationStats st;
    for (const auto& n : j.at("node")) st.node.push_back(stat_from_json(n));
    st.edge_separation = stat_from_json(j.at("edge_separation"));
    st.edge_closing = stat_from_json(j.at("edge_closing"));
    return st;
}

json config_to_json(const gnn::TrainConfig& c) {
    return json{{"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"learning_rate", c.learning_rate},
                {"weight_decay", c.weight_decay},
                {"quantiles", {c.quantiles[0], c.quantiles[1], c.quantiles[2]}},
                {"bucket_percentiles",
                 {c.bucket_percentiles[0], c.bucket_percentiles[1], c.bucket_percentiles[2]}},
                {"loss_mix", c.loss_mix},
                {"seed", c.seed},
                {"dims",
                 {{"d_in", c.dims.d_in},
                  {"d_edge", c.dims.d_edge},
                  {"hidden", c.dims.hidden},
                  {"head_hidden", c.dims.head_hidden},
                  {"n_quantiles", c.dims.n_quantiles}}}};
}

gnn::TrainConfig config_from_json(const json& j) {
    gnn::TrainConfig c;
    c.epochs = j.at("epochs").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.weight_decay = j.at("weight_decay").get<double>();
    for (int k = 0; k < 3; ++k) {
        c.quantiles[k] = j.at("quantiles").at(k).get<double>();
        c.bucket_percentiles[k] = j.at("bucket_percentiles").at(k).get<double>();
    }
    c.loss_mix = j.at("loss_mix").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    const json& d = j.at("dims");
    c.dims.d_in = d.at("d_in").get<int>();
    c.dims.d_edge = d.at("d_edge").get<int>();
    c.dims.hidden = d.at("hidden").get<int>();
    c.dims.head_hidden = d.at("head_hidden").get<int>();
    c.dims.n_quantiles = d.at("n_quantiles").get<int>();
    return c;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelCheckpoint& ckpt) {
    json header;
    header["version"] = ckpt.version;
    header["fold_id"] = ckpt.fold_id;
    header["config"] = config_to_json(ckpt.config);
    header["stats"] = stats_to_json(ckpt.stats);
    json trace = json::array();
    for (const auto& pt : ckpt.trace)
        trace.push_back({pt.epoch, pt.train_loss, pt.val_loss, pt.val_mae});
    header["trace"] = trace;
    json blocks = json::array();
    for (const auto& b : ckpt.params.blocks)
        blocks.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols},
                          {"offset", b.offset}});
    header["blocks"] = blocks;
    header["payload_doubles"] = ckpt.params.values.size();

    const std::string head = header.dump();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error("cannot open checkpoint for writing: " + path.string());
    out.write(kMagic, sizeof(kMagic));
    const std::uint32_t len = static_cast<std::uint32_t>(head.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    out.write(reinterpret_cast<const char*>(ckpt.params.values.data()),
              static_cast<std::streamsize>(ckpt.params.values.size() * sizeof(double)));
    if (!out) throw data_error("failed writing checkpoint: " + path.string());
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open checkpoint: " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw data_error("not a checkpoint file: " + path.string());
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (!in || len == 0 || len > (64u << 20))
        throw data_error("corrupt checkpoint header length: " + path.string());
    std::string head(len, '\0');
    in.read(head.data(), static_cast<std::streamsize>(len));
    if (!in) throw data_error("corrupt checkpoint (truncated header): " + path.string());

    json header;
    try {
        header = json::parse(head);
    } catch (const json::exception& e) {
        throw data_error("corrupt checkpoint header: " + std::string(e.what()));
    }
    ModelCheckpoint ckpt;
    try {
        ckpt.version = header.at("version").get<std::string>();
        if (ckpt.version != kCheckpointVersion)
            throw data_error("unsupported checkpoint version: " + ckpt.version);
        ckpt.fold_id = header.at("fold_id").get<int>();
        ckpt.config = config_from_json(header.at("config"));
        ckpt.stats = stats_from_json(header.at("stats"));
        for (const auto& row : header.at("trace")) {
            MetricPoint pt;
            pt.epoch = row.at(0).get<int>();
            pt.train_loss = row.at(1).get<double>();
            pt.val_loss = row.at(2).get<double>();
            pt.val_mae = row.at(3).get<double>();
            ckpt.trace.push_back(pt);
        }
        ckpt.params = gnn::ModelParams::zeros(ckpt.config.dims);
        const json& blocks = header.at("blocks");
        if (blocks.size() != ckpt.params.blocks.size())
            throw data_error("checkpoint block table does not match architecture");
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            const auto& b = ckpt.params.blocks[i];
            if (blocks[i].at("name").get<std::string>() != b.name ||
                blocks[i].at("rows").get<int>() != b.rows ||
                blocks[i].at("cols").get<int>() != b.cols ||
                blocks[i].at("offset").get<std::size_t>() != b.offset)
                throw data_error("checkpoint block table does not match architecture");
        }
        if (header.at("payload_doubles").get<std::size_t>() != ckpt.params.values.size())
            throw data_error("checkpoint payload size does not match architecture");
    } catch (const json::exception& e) {
        throw data_error("corrupt checkpoint header: " + std::string(e.what()));
    }
    in.read(reinterpret_cast<char*>(ckpt.params.values.data()),
            static_cast<std::streamsize>(ckpt.params.values.size() * sizeof(double)));
    if (in.gcount() !=
        static_cast<std::streamsize>(ckpt.params.values.size() * sizeof(double)))
        throw data_error("corrupt checkpoint (truncated): " + path.string());
    return ckpt;
}

void save_ensemble(const std::filesystem::path& dir, const Ensemble& e) {
    if (e.members.empty()) throw std::invalid_argument("cannot save an empty ensemble");
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["version"] = kEnsembleVersion;
    json members = json::array();
    for (const auto& m : e.members) {
        const std::string rel = "fold_" + std::to_string(m.fold_id) + "/model.ckpt";
        std::filesystem::create_directories(dir / ("fold_" + std::to_string(m.fold_id)));
        save_checkpoint(dir / rel, m);
        members.push_back({{"fold", m.fold_id}, {"path", rel}});
    }
    manifest["members"] = members;
    std::ofstream out(dir / "ensemble.manifest", std::ios::trunc);
    if (!out) throw data_error("cannot write ensemble manifest in " + dir.string());
    out << manifest.dump(2) << "\n";
}

Ensemble load_ensemble(const std::filesystem::path& dir) {
    std::ifstream in(dir / "ensemble.manifest");
    if (!in) throw data_error("no ensemble.manifest in " + dir.string());
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw data_error("corrupt ensemble manifest: " + std::string(e.what()));
    }
    if (manifest.value("version", "") != kEnsembleVersion)
        throw data_error("unsupported ensemble manifest version");
    Ensemble e;
    for (const auto& m : manifest.at("members"))
        e.members.push_back(load_checkpoint(dir / m.at("path").get<std::string>()));
    if (e.members.empty()) throw data_error("ensemble manifest lists no members");
    return e;
}

}  // namespace atcd
