#include "embkit/reducers.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <queue>
#include <sstream>

#include "embkit/rng.hpp"

namespace embkit {

const char* reducer_kind_name(ReducerKind k) {
    switch (k) {
        case ReducerKind::kFirst: return "first";
        case ReducerKind::kRandom: return "random";
        case ReducerKind::kPca: return "pca";
        case ReducerKind::kIsomap: return "isomap";
    }
    throw ContractViolationError("unknown reducer kind");
}

ReducerKind reducer_kind_from_name(const std::string& name) {
    if (name == "first") return ReducerKind::kFirst;
    if (name == "random") return ReducerKind::kRandom;
    if (name == "pca") return ReducerKind::kPca;
    if (name == "isomap") return ReducerKind::kIsomap;
    throw InvalidParameterError("unknown reducer kind: " + name);
}

std::uint64_t matrix_fingerprint(const Matrix& x) {
    std::uint64_t h = CounterRng::mix(x.rows() * 0x9e3779b9ULL + x.cols());
    for (double v : x.data()) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        h = CounterRng::mix(h ^ bits);
    }
    return h;
}

namespace {

Matrix select_columns(const Matrix& x, const std::vector<std::size_t>& cols) {
    Matrix out(x.rows(), cols.size());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* src = x.row_ptr(i);
        double* dst = out.row_ptr(i);
        for (std::size_t j = 0; j < cols.size(); ++j) dst[j] = src[cols[j]];
    }
    return out;
}

FittedReducer fit_pca(const Reducer& r, const EmbeddingMatrix& x) {
    const std::size_t d = x.cols();
    const Matrix cov = covariance(x.matrix);
    const EigenResult eig = sym_eigen(cov);

    FittedReducer f;
    f.kind = ReducerKind::kPca;
    f.source_dim = d;
    f.target_dim = r.target_dim;
    f.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* row = x.matrix.row_ptr(i);
        for (std::size_t j = 0; j < d; ++j) f.mean[j] += row[j];
    }
    for (std::size_t j = 0; j < d; ++j) f.mean[j] /= static_cast<double>(x.rows());

    f.basis = Matrix(d, r.target_dim);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < r.target_dim; ++j) {
            f.basis(i, j) = eig.vectors(i, j);
        }
    }
    return f;
}

FittedReducer fit_isomap(const Reducer& r, const EmbeddingMatrix& x) {
    if (r.n_neighbors < 2) {
        throw InvalidParameterError("isomap requires n_neighbors >= 2");
    }
    const Matrix geo = isomap_geodesics(x.matrix, r.n_neighbors);
    const std::size_t n = geo.rows();

    // Classical MDS: B = -1/2 * J * D^2 * J via explicit double centering.
    Matrix sq(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) sq(i, j) = geo(i, j) * geo(i, j);
    }
    std::vector<double> row_mean(n, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) row_mean[i] += sq(i, j);
        row_mean[i] /= static_cast<double>(n);
        grand += row_mean[i];
    }
    grand /= static_cast<double>(n);
    Matrix b(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            b(i, j) = -0.5 * (sq(i, j) - row_mean[i] - row_mean[j] + grand);
        }
    }

    const EigenResult eig = sym_eigen(b, 1e-6);
    FittedReducer f;
    f.kind = ReducerKind::kIsomap;
    f.source_dim = x.cols();
    f.target_dim = r.target_dim;
    f.fit_rows = n;
    f.fit_fingerprint = matrix_fingerprint(x.matrix);
    f.mds_coordinates = Matrix(n, r.target_dim);
    for (std::size_t j = 0; j < r.target_dim; ++j) {
        const double lambda = std::max(eig.values[j], 0.0);
        const double scale = std::sqrt(lambda);
        for (std::size_t i = 0; i < n; ++i) {
            f.mds_coordinates(i, j) = scale * eig.vectors(i, j);
        }
    }
    return f;
}

}  // namespace

Matrix isomap_geodesics(const Matrix& x, std::size_t n_neighbors) {
    const std::size_t n = x.rows();
    const NeighborTable nbrs = knn(x, n_neighbors);

    // Symmetrized union of directed k-NN edges.
    std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n_neighbors; ++j) {
            const std::size_t to = nbrs.neighbor(i, j);
            const double w = nbrs.distance(i, j);
            adj[i].emplace_back(to, w);
            adj[to].emplace_back(i, w);
        }
    }

    constexpr double inf = std::numeric_limits<double>::infinity();
    Matrix geo(n, n);
    std::vector<double> dist(n);
    using Entry = std::pair<double, std::size_t>;
    for (std::size_t src = 0; src < n; ++src) {
        std::fill(dist.begin(), dist.end(), inf);
        dist[src] = 0.0;
        std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
        heap.emplace(0.0, src);
        while (!heap.empty()) {
            const auto [d, u] = heap.top();
            heap.pop();
            if (d > dist[u]) continue;
            for (const auto& [to, w] : adj[u]) {
                const double nd = d + w;
                if (nd < dist[to]) {
                    dist[to] = nd;
                    heap.emplace(nd, to);
                }
            }
        }
        for (std::size_t j = 0; j < n; ++j) geo(src, j) = dist[j];
    }

    // Connectivity check from node 0 suffices for an undirected graph.
    std::size_t unreachable = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (std::isinf(geo(0, j))) ++unreachable;
    }
    if (unreachable > 0) {
        // Count components by repeated sweeps over the row-0 reachability
        // pattern of each unvisited node.
        std::vector<int> component(n, -1);
        int n_components = 0;
        for (std::size_t s = 0; s < n; ++s) {
            if (component[s] >= 0) continue;
            const int id = n_components++;
            std::vector<std::size_t> stack{s};
            component[s] = id;
            while (!stack.empty()) {
                const std::size_t u = stack.back();
                stack.pop_back();
                for (const auto& [to, w] : adj[u]) {
                    if (component[to] < 0) {
                        component[to] = id;
                        stack.push_back(to);
                    }
                }
            }
        }
        std::ostringstream os;
        os << "isomap neighbor graph is disconnected (" << n_components << " components)";
        throw ConnectivityError(os.str(), n_components);
    }
    return geo;
}

FittedReducer fit(const Reducer& r, const EmbeddingMatrix& x) {
    const std::size_t d = x.cols();
    if (r.target_dim < 1 || r.target_dim > d) {
        std::ostringstream os;
        os << "target dim " << r.target_dim << " outside [1, " << d << "]";
        throw InvalidParameterError(os.str());
    }
    switch (r.kind) {
        case ReducerKind::kFirst: {
            FittedReducer f;
            f.kind = r.kind;
            f.source_dim = d;
            f.target_dim = r.target_dim;
            f.column_indices.resize(r.target_dim);
            for (std::size_t j = 0; j < r.target_dim; ++j) f.column_indices[j] = j;
            return f;
        }
        case ReducerKind::kRandom: {
            FittedReducer f;
            f.kind = r.kind;
            f.source_dim = d;
            f.target_dim = r.target_dim;
            // Prefix of a seeded permutation: the same (seed, task_id)
            // yields nested index sets across target dims.
            CounterRng rng(CounterRng::derive(r.seed, fnv1a64(r.task_id.c_str())));
            const auto perm = rng.permutation(d);
            f.column_indices.assign(perm.begin(), perm.begin() + r.target_dim);
            return f;
        }
        case ReducerKind::kPca:
            return fit_pca(r, x);
        case ReducerKind::kIsomap:
            return fit_isomap(r, x);
    }
    throw ContractViolationError("unknown reducer kind");
}

EmbeddingMatrix apply(const FittedReducer& f, const EmbeddingMatrix& x) {
    if (x.cols() != f.source_dim) {
        throw ContractViolationError("apply: dimension mismatch with fit-time matrix");
    }
    EmbeddingMatrix out;
    out.prompt_type = x.prompt_type;
    out.source_tag = x.source_tag;
    switch (f.kind) {
        case ReducerKind::kFirst:
        case ReducerKind::kRandom:
            out.matrix = select_columns(x.matrix, f.column_indices);
            return out;
        case ReducerKind::kPca: {
            Matrix centered = x.matrix;
            for (std::size_t i = 0; i < centered.rows(); ++i) {
                double* row = centered.row_ptr(i);
                for (std::size_t j = 0; j < centered.cols(); ++j) row[j] -= f.mean[j];
            }
            out.matrix = matmul(centered, f.basis);
            return out;
        }
        case ReducerKind::kIsomap:
            if (x.rows() != f.fit_rows || matrix_fingerprint(x.matrix) != f.fit_fingerprint) {
                throw UnsupportedOperationError(
                    "isomap is batch-only; apply accepts only the fit-time matrix");
            }
            out.matrix = f.mds_coordinates;
            return out;
    }
    throw ContractViolationError("unknown reducer kind");
}

}  // namespace embkit
