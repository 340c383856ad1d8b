#pragma once

// Field snapshot files: a four-byte magic "CLF1", a little-endian uint32
// JSON-header length, the JSON header (grid geometry, tensor rank, field
// name, endianness tag), then the raw samples as little-endian float64 in
// row-major order with components concatenated. Readers reject foreign
// endianness and truncated payloads with specific messages.

#include <string>
#include <vector>

#include "conslab/grid.hpp"

namespace conslab {

struct Snapshot {
    PeriodicGrid grid;
    int rank = 0;  // 0 scalar, 1 vector, 2 matrix (three stacked vectors)
    std::string name;
    // rank 0: 1 component; rank 1: dim components; rank 2: 3*3 components.
    std::vector<std::vector<double>> components;
};

Snapshot snapshot_of(const ScalarField& f, const std::string& name);
Snapshot snapshot_of(const VectorField& f, const std::string& name);
Snapshot snapshot_of(const MatrixField& f, const std::string& name);

ScalarField scalar_from_snapshot(const Snapshot& s);
VectorField vector_from_snapshot(const Snapshot& s);
MatrixField matrix_from_snapshot(const Snapshot& s);

// Serialized bytes of the snapshot (magic, header, payload).
std::vector<unsigned char> snapshot_bytes(const Snapshot& s);
Snapshot snapshot_from_bytes(const std::vector<unsigned char>& bytes);

void write_snapshot(const std::string& path, const Snapshot& s);
Snapshot read_snapshot(const std::string& path);

}  // namespace conslab
