#ifndef GRIDSEQ_CHECKPOINT_HPP
#define GRIDSEQ_CHECKPOINT_HPP

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridseq/model.hpp"

namespace gridseq {

inline constexpr char kCkptMagic[8] = {'T', 'S', 'A', 'C', 'K', 'P', 'T', '1'};

inline nlohmann::json config_to_json(const ModelConfig& cfg) {
    return nlohmann::json{
        {"layers", cfg.layers},   {"heads", cfg.heads},
        {"dim", cfg.dim},         {"ffn_dim", cfg.ffn_dim},
        {"l_seq", cfg.l_seq},     {"l_pred", cfg.l_pred},
        {"patch_len", cfg.patch_len}, {"stride", cfg.stride},
        {"mode", cfg.mode == AttentionMode::causal ? "causal" : "bidirectional"},
    };
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig cfg;
    cfg.layers = j.at("layers").get<std::size_t>();
    cfg.heads = j.at("heads").get<std::size_t>();
    cfg.dim = j.at("dim").get<std::size_t>();
    cfg.ffn_dim = j.at("ffn_dim").get<std::size_t>();
    cfg.l_seq = j.at("l_seq").get<std::size_t>();
    cfg.l_pred = j.at("l_pred").get<std::size_t>();
    cfg.patch_len = j.at("patch_len").get<std::size_t>();
    cfg.stride = j.at("stride").get<std::size_t>();
    cfg.mode = j.at("mode").get<std::string>() == "causal" ? AttentionMode::causal
                                                           : AttentionMode::bidirectional;
    cfg.validate();
    return cfg;
}

struct Checkpoint {
    ModelParameters params;
    FreezeMask freeze;
    ModelConfig config;
};

inline void save_checkpoint(const ModelParameters& params, const FreezeMask& freeze,
                            const ModelConfig& cfg, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    write_bytes(os, kCkptMagic, sizeof(kCkptMagic));

    std::uint32_t count = 0;
    for_each_array(const_cast<ModelParameters&>(params),
                   [&](const std::string&, Matrix&) { ++count; });
    write_le<std::uint32_t>(os, count);

    for_each_array(const_cast<ModelParameters&>(params), [&](const std::string& name, Matrix& m) {
        write_le<std::uint16_t>(os, static_cast<std::uint16_t>(name.size()));
        write_bytes(os, name.data(), name.size());
        write_le<std::uint8_t>(os, freeze.is_trainable(name) ? 1 : 0);
        write_le<std::uint8_t>(os, 2);  // rank
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.rows));
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.cols));
        write_bytes(os, m.data.data(), m.data.size() * sizeof(double));
    });

    const std::string blob = config_to_json(cfg).dump();
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(blob.size()));
    write_bytes(os, blob.data(), blob.size());
    if (!os) throw IoError("write failed: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[8];
    read_bytes(is, magic, 8, "magic");
    if (std::memcmp(magic, kCkptMagic, 8) != 0)
        throw IoError("corrupt checkpoint (bad magic): " + path);

    struct RawArray {
        bool trainable;
        Matrix values;
    };
    std::map<std::string, RawArray> raw;
    const auto count = read_le<std::uint32_t>(is, "array count");
    for (std::uint32_t k = 0; k < count; ++k) {
        const auto name_len = read_le<std::uint16_t>(is, "name length");
        std::string name(name_len, '\0');
        read_bytes(is, name.data(), name_len, "name");
        const auto trainable = read_le<std::uint8_t>(is, "trainable flag");
        const auto rank = read_le<std::uint8_t>(is, "rank");
        if (rank != 1 && rank != 2)
            throw IoError("corrupt checkpoint: unsupported rank for array " + name);
        std::size_t rows = 1, cols;
        if (rank == 2) rows = read_le<std::uint32_t>(is, "dim 0");
        cols = read_le<std::uint32_t>(is, rank == 2 ? "dim 1" : "dim 0");
        Matrix m(rows, cols);
        read_bytes(is, m.data.data(), m.data.size() * sizeof(double), name.c_str());
        raw[name] = {trainable != 0, std::move(m)};
    }

    const auto blob_len = read_le<std::uint32_t>(is, "config blob length");
    std::string blob(blob_len, '\0');
    read_bytes(is, blob.data(), blob_len, "config blob");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(blob);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("corrupt checkpoint (config blob): " + std::string(e.what()));
    }

    Checkpoint ck;
    ck.config = config_from_json(j);
    ck.params = init_parameters(ck.config, 0);
    for_each_array(ck.params, [&](const std::string& name, Matrix& m) {
        auto it = raw.find(name);
        if (it == raw.end()) throw IoError("corrupt checkpoint: missing array " + name);
        if (!it->second.values.same_shape(m) &&
            !(it->second.values.rows == 1 && m.rows == 1 &&
              it->second.values.cols == m.cols))
            throw IoError("corrupt checkpoint: shape mismatch for array " + name);
        m = std::move(it->second.values);
        ck.freeze.trainable[name] = it->second.trainable;
    });
    return ck;
}

}  // namespace gridseq

#endif  // GRIDSEQ_CHECKPOINT_HPP
