#include "conslab/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace conslab {

namespace {

constexpr char kMagic[4] = {'C', 'L', 'F', '1'};

static_assert(std::endian::native == std::endian::little,
              "snapshot payloads are written in native byte order and tagged little-endian");

int components_for(const Snapshot& s) {
    if (s.rank == 0) return 1;
    if (s.rank == 1) return s.grid.dim;
    if (s.rank == 2) return 9;
    throw std::invalid_argument("snapshot: rank must be 0, 1 or 2");
}

}  // namespace

Snapshot snapshot_of(const ScalarField& f, const std::string& name) {
    Snapshot s;
    s.grid = f.grid;
    s.rank = 0;
    s.name = name;
    s.components.push_back(f.v);
    return s;
}

Snapshot snapshot_of(const VectorField& f, const std::string& name) {
    Snapshot s;
    s.grid = f.grid;
    s.rank = 1;
    s.name = name;
    for (int a = 0; a < f.grid.dim; ++a) s.components.push_back(f[a].v);
    return s;
}

Snapshot snapshot_of(const MatrixField& f, const std::string& name) {
    Snapshot s;
    s.grid = f.grid;
    s.rank = 2;
    s.name = name;
    for (int r = 0; r < 3; ++r)
        for (int a = 0; a < 3; ++a) s.components.push_back(f.row[r][a].v);
    return s;
}

ScalarField scalar_from_snapshot(const Snapshot& s) {
    if (s.rank != 0) throw std::invalid_argument("snapshot holds rank " + std::to_string(s.rank) +
                                                 ", expected a scalar");
    ScalarField f(s.grid);
    f.v = s.components.at(0);
    return f;
}

VectorField vector_from_snapshot(const Snapshot& s) {
    if (s.rank != 1) throw std::invalid_argument("snapshot holds rank " + std::to_string(s.rank) +
                                                 ", expected a vector");
    VectorField f(s.grid);
    for (int a = 0; a < s.grid.dim; ++a) f[a].v = s.components.at(a);
    return f;
}

MatrixField matrix_from_snapshot(const Snapshot& s) {
    if (s.rank != 2) throw std::invalid_argument("snapshot holds rank " + std::to_string(s.rank) +
                                                 ", expected a matrix");
    MatrixField f(s.grid);
    for (int r = 0; r < 3; ++r)
        for (int a = 0; a < 3; ++a) f.row[r][a].v = s.components.at(3 * r + a);
    return f;
}

std::vector<unsigned char> snapshot_bytes(const Snapshot& s) {
    s.grid.validate();
    const int ncomp = components_for(s);
    if (int(s.components.size()) != ncomp)
        throw std::invalid_argument("snapshot: component count does not match rank");
    for (const auto& c : s.components)
        if (c.size() != s.grid.total())
            throw std::invalid_argument("snapshot: component size does not match grid");

    nlohmann::json header;
    header["dim"] = s.grid.dim;
    nlohmann::json npts = nlohmann::json::array();
    nlohmann::json lens = nlohmann::json::array();
    for (int a = 0; a < s.grid.dim; ++a) {
        npts.push_back(s.grid.n[a]);
        lens.push_back(s.grid.len[a]);
    }
    header["points_per_axis"] = npts;
    header["axis_length"] = lens;
    header["rank"] = s.rank;
    header["name"] = s.name;
    header["endian"] = "little";
    const std::string hs = header.dump();

    std::vector<unsigned char> out;
    out.reserve(8 + hs.size() + ncomp * s.grid.total() * sizeof(double));
    out.insert(out.end(), kMagic, kMagic + 4);
    const std::uint32_t hlen = std::uint32_t(hs.size());
    for (int b = 0; b < 4; ++b) out.push_back((hlen >> (8 * b)) & 0xff);
    out.insert(out.end(), hs.begin(), hs.end());
    for (const auto& c : s.components) {
        const auto* p = reinterpret_cast<const unsigned char*>(c.data());
        out.insert(out.end(), p, p + c.size() * sizeof(double));
    }
    return out;
}

Snapshot snapshot_from_bytes(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw std::runtime_error("snapshot: missing CLF1 magic");
    std::uint32_t hlen = 0;
    for (int b = 0; b < 4; ++b) hlen |= std::uint32_t(bytes[4 + b]) << (8 * b);
    if (bytes.size() < 8 + std::size_t(hlen))
        throw std::runtime_error("snapshot: truncated header (need " + std::to_string(8 + hlen) +
                                 " bytes, have " + std::to_string(bytes.size()) + ")");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + hlen);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("snapshot: malformed JSON header: ") + e.what());
    }

    Snapshot s;
    s.grid.dim = header.at("dim").get<int>();
    const auto npts = header.at("points_per_axis");
    const auto lens = header.at("axis_length");
    if (int(npts.size()) != s.grid.dim || int(lens.size()) != s.grid.dim)
        throw std::runtime_error("snapshot: header axis arrays do not match dim");
    for (int a = 0; a < s.grid.dim; ++a) {
        s.grid.n[a] = npts[a].get<int>();
        s.grid.len[a] = lens[a].get<double>();
    }
    s.grid.validate();
    s.rank = header.at("rank").get<int>();
    s.name = header.value("name", "");
    const std::string endian = header.value("endian", "little");
    if (endian != "little")
        throw std::runtime_error("snapshot: payload endianness '" + endian +
                                 "' is not supported (expected little)");

    const int ncomp = components_for(s);
    const std::size_t per = s.grid.total() * sizeof(double);
    const std::size_t need = 8 + hlen + std::size_t(ncomp) * per;
    if (bytes.size() != need)
        throw std::runtime_error("snapshot: payload size mismatch (expected " +
                                 std::to_string(need) + " bytes, have " +
                                 std::to_string(bytes.size()) + ")");
    std::size_t off = 8 + hlen;
    for (int c = 0; c < ncomp; ++c) {
        std::vector<double> comp(s.grid.total());
        std::memcpy(comp.data(), bytes.data() + off, per);
        off += per;
        s.components.push_back(std::move(comp));
    }
    return s;
}

void write_snapshot(const std::string& path, const Snapshot& s) {
    const std::vector<unsigned char> bytes = snapshot_bytes(s);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("snapshot: cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!f) throw std::runtime_error("snapshot: write failed for " + path);
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("snapshot: cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());
    return snapshot_from_bytes(bytes);
}

}  // namespace conslab
