#include "sentcorr/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

namespace sentcorr {

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'S', 'N', 'T', 'C'};
constexpr std::uint32_t kVersion = 1;

nlohmann::json config_to_json(const ModelConfig& c) {
    return {
        {"embed_dim", c.embed_dim},
        {"conv_out", c.conv_out},
        {"lstm_hidden", c.lstm_hidden},
        {"stack_dim", c.stack_dim},
        {"num_classes", c.num_classes},
        {"window", c.window},
        {"dropout_rate", c.dropout_rate},
        {"seq_len", c.seq_len},
        {"activation", c.activation == Activation::relu ? "relu" : "softplus"},
        {"mean_by", c.mean_by == MeanBy::padded ? "padded" : "valid"},
    };
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.embed_dim = j.at("embed_dim").get<int>();
    c.conv_out = j.at("conv_out").get<int>();
    c.lstm_hidden = j.at("lstm_hidden").get<int>();
    c.stack_dim = j.at("stack_dim").get<int>();
    c.num_classes = j.at("num_classes").get<int>();
    c.window = j.at("window").get<int>();
    c.dropout_rate = j.at("dropout_rate").get<double>();
    c.seq_len = j.at("seq_len").get<int>();
    const std::string act = j.at("activation").get<std::string>();
    c.activation = act == "softplus" ? Activation::softplus : Activation::relu;
    const std::string mb = j.at("mean_by").get<std::string>();
    c.mean_by = mb == "valid" ? MeanBy::valid : MeanBy::padded;
    return c;
}

void append_u32(std::string& out, std::uint32_t v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.append(buf, 4);
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path, bool as_f32) {
    nlohmann::json header = {
        {"kind", std::string(model_kind_name(ckpt.kind))},
        {"config", config_to_json(ckpt.config)},
        {"vocab_digest", ckpt.vocab_digest},
        {"vocab_size", ckpt.vocab_size},
        {"epoch", ckpt.epoch},
        {"seed", ckpt.seed},
        {"dtype", as_f32 ? "f32" : "f64"},
    };
    const std::string header_str = header.dump();

    std::string out;
    out.append(kMagic, 4);
    append_u32(out, kVersion);
    append_u32(out, static_cast<std::uint32_t>(header_str.size()));
    out += header_str;

    for (const auto& nt : ckpt.params.tensors()) {
        const Tensor& t = *nt.tensor;
        if (as_f32) {
            for (std::size_t i = 0; i < t.size(); ++i) {
                const float f = static_cast<float>(t[i]);
                char buf[4];
                std::memcpy(buf, &f, 4);
                out.append(buf, 4);
            }
        } else {
            out.append(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(double));
        }
    }

    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw io_error("cannot open for writing: " + tmp);
        f.write(out.data(), static_cast<std::streamsize>(out.size()));
        if (!f) throw io_error("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw io_error("cannot rename " + tmp + " to " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open checkpoint: " + path);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    std::size_t off = 0;
    auto need = [&](std::size_t n, const char* what) {
        if (off + n > bytes.size()) {
            throw CheckpointError(CheckpointFault::truncated,
                                  path + ": truncated checkpoint while reading " + what);
        }
    };

    need(4, "magic");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw CheckpointError(CheckpointFault::bad_magic, path + ": not a checkpoint file");
    }
    off = 4;

    need(4, "version");
    std::uint32_t version = 0;
    std::memcpy(&version, bytes.data() + off, 4);
    off += 4;
    if (version != kVersion) {
        throw CheckpointError(CheckpointFault::version_mismatch,
                              path + ": unsupported checkpoint version " + std::to_string(version));
    }

    need(4, "header length");
    std::uint32_t header_len = 0;
    std::memcpy(&header_len, bytes.data() + off, 4);
    off += 4;
    need(header_len, "header");
    const nlohmann::json header =
        nlohmann::json::parse(bytes.substr(off, header_len), nullptr, false);
    off += header_len;
    if (header.is_discarded() || !header.is_object()) {
        throw CheckpointError(CheckpointFault::header_invalid, path + ": invalid header JSON");
    }

    Checkpoint ckpt;
    ckpt.version = version;
    std::string dtype;
    try {
        ckpt.kind = model_kind_from_name(header.at("kind").get<std::string>());
        ckpt.config = config_from_json(header.at("config"));
        ckpt.vocab_digest = header.at("vocab_digest").get<std::string>();
        ckpt.vocab_size = header.at("vocab_size").get<std::size_t>();
        ckpt.epoch = header.at("epoch").get<int>();
        ckpt.seed = header.at("seed").get<std::uint64_t>();
        dtype = header.at("dtype").get<std::string>();
    } catch (const std::exception& e) {
        throw CheckpointError(CheckpointFault::header_invalid,
                              path + ": bad header field: " + e.what());
    }
    if (dtype != "f64" && dtype != "f32") {
        throw CheckpointError(CheckpointFault::header_invalid,
                              path + ": unknown dtype '" + dtype + "'");
    }

    ckpt.params = ModelParams::zeros(ckpt.kind, ckpt.config, ckpt.vocab_size);
    const std::size_t word = dtype == "f64" ? 8 : 4;
    for (auto& nt : ckpt.params.tensors()) {
        Tensor& t = *nt.tensor;
        need(t.size() * word, nt.name.c_str());
        if (word == 8) {
            std::memcpy(t.data(), bytes.data() + off, t.size() * 8);
        } else {
            for (std::size_t i = 0; i < t.size(); ++i) {
                float v = 0.0f;
                std::memcpy(&v, bytes.data() + off + i * 4, 4);
                t[i] = static_cast<double>(v);
            }
        }
        off += t.size() * word;
    }
    if (off != bytes.size()) {
        throw CheckpointError(CheckpointFault::truncated,
                              path + ": trailing bytes after parameter data");
    }
    return ckpt;
}

Checkpoint load_checkpoint(const std::string& path, const std::string& expected_digest) {
    Checkpoint ckpt = load_checkpoint(path);
    if (ckpt.vocab_digest != expected_digest) {
        throw CheckpointError(CheckpointFault::digest_mismatch,
                              path + ": vocabulary digest mismatch (checkpoint " +
                                  ckpt.vocab_digest + ", vocabulary " + expected_digest + ")");
    }
    return ckpt;
}

}  // namespace sentcorr
