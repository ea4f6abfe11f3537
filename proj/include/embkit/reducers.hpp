#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "embkit/dataset.hpp"
#include "embkit/matrix.hpp"

namespace embkit {

enum class ReducerKind { kFirst, kRandom, kPca, kIsomap };

const char* reducer_kind_name(ReducerKind k);
ReducerKind reducer_kind_from_name(const std::string& name);

struct Reducer {
    ReducerKind kind = ReducerKind::kFirst;
    std::size_t target_dim = 0;
    // Random only: index set is fixed by (seed, task_id) for a whole task
    // evaluation, and nested across target dims.
    std::uint64_t seed = 0;
    std::string task_id;
    // Isomap only.
    std::size_t n_neighbors = 15;
};

struct FittedReducer {
    ReducerKind kind;
    std::size_t source_dim = 0;
    std::size_t target_dim = 0;

    // first / random
    std::vector<std::size_t> column_indices;

    // pca
    std::vector<double> mean;
    Matrix basis;  // D x d, orthonormal columns

    // isomap: batch-only MDS coordinates of the fit-time points, plus a
    // fingerprint so apply can reject any other matrix.
    Matrix mds_coordinates;
    std::size_t fit_rows = 0;
    std::uint64_t fit_fingerprint = 0;
};

FittedReducer fit(const Reducer& r, const EmbeddingMatrix& x);
EmbeddingMatrix apply(const FittedReducer& f, const EmbeddingMatrix& x);

// All-pairs shortest-path distances over the symmetrized k-NN graph.
// Throws ConnectivityError (with component count) if the graph is
// disconnected. Exposed separately so the geodesic properties can be
// checked without running MDS.
Matrix isomap_geodesics(const Matrix& x, std::size_t n_neighbors);

std::uint64_t matrix_fingerprint(const Matrix& x);

}  // namespace embkit
