#ifndef GRIDSEQ_TRAJIO_HPP
#define GRIDSEQ_TRAJIO_HPP

#include <fstream>
#include <string>
#include <vector>

#include "gridseq/simulator.hpp"

namespace gridseq {

// TSATRAJ1 trajectory dataset file. Little-endian. Label byte: bit 0 is
// the stability label (1 = unstable), bit 1 the provenance flag
// (1 = model rollout rather than simulation).
inline constexpr char kTrajMagic[8] = {'T', 'S', 'A', 'T', 'R', 'A', 'J', '1'};

inline void save_trajectories(const std::vector<Trajectory>& trajs, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    write_bytes(os, kTrajMagic, sizeof(kTrajMagic));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(trajs.size()));
    for (const Trajectory& t : trajs) {
        const std::size_t n_x = t.n_channels();
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(n_x));
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.steps));
        write_le<double>(os, t.dt);
        std::uint8_t label = (t.stable ? 0 : 1) | (t.predicted ? 2 : 0);
        write_le<std::uint8_t>(os, label);
        for (std::size_t i = 0; i < n_x / 2; ++i)
            write_le<std::uint8_t>(os, i < t.oos.size() ? t.oos[i] : 0);
        for (const auto& ch : t.channels)
            write_bytes(os, ch.data(), ch.size() * sizeof(double));
    }
    if (!os) throw IoError("write failed: " + path);
}

inline std::vector<Trajectory> load_trajectories(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[8];
    read_bytes(is, magic, 8, "magic");
    if (std::memcmp(magic, kTrajMagic, 8) != 0) throw IoError("bad magic in " + path);
    const auto count = read_le<std::uint32_t>(is, "trajectory count");
    std::vector<Trajectory> out;
    out.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        Trajectory t;
        const auto n_x = read_le<std::uint32_t>(is, "n_x");
        const auto steps = read_le<std::uint32_t>(is, "T");
        t.dt = read_le<double>(is, "dt");
        t.steps = steps;
        const auto label = read_le<std::uint8_t>(is, "label");
        t.stable = (label & 1) == 0;
        t.predicted = (label & 2) != 0;
        t.oos.resize(n_x / 2);
        for (auto& f : t.oos) f = read_le<std::uint8_t>(is, "oos flag");
        t.channels.assign(n_x, std::vector<double>(steps));
        for (auto& ch : t.channels)
            read_bytes(is, ch.data(), steps * sizeof(double), "samples");
        out.push_back(std::move(t));
    }
    return out;
}

// Long-format CSV mirror of the binary content, for inspection.
inline void export_trajectories_csv(const std::vector<Trajectory>& trajs, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << "trajectory,label,predicted,channel,index,value\n";
    os.precision(17);
    for (std::size_t k = 0; k < trajs.size(); ++k) {
        const Trajectory& t = trajs[k];
        for (std::size_t c = 0; c < t.n_channels(); ++c)
            for (std::size_t i = 0; i < t.steps; ++i)
                os << k << ',' << (t.stable ? "stable" : "unstable") << ','
                   << (t.predicted ? 1 : 0) << ',' << c << ',' << i << ','
                   << t.channels[c][i] << '\n';
    }
    if (!os) throw IoError("write failed: " + path);
}

}  // namespace gridseq

#endif  // GRIDSEQ_TRAJIO_HPP
