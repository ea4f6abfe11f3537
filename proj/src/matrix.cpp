#include "embkit/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace embkit {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) {
        throw ContractViolationError("matrix data size does not match rows*cols");
    }
}

void Matrix::check_finite() const {
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!std::isfinite(data_[i])) {
            std::ostringstream os;
            os << "non-finite matrix entry at flat index " << i;
            throw ContractViolationError(os.str());
        }
    }
}

Matrix covariance(const Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n < 2) {
        throw DegenerateInputError("covariance requires at least 2 rows");
    }
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = x.row_ptr(i);
        for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
    }
    for (std::size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(n);

    Matrix cov(d, d);
    // Accumulate upper triangle from centered rows, mirror at the end.
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = x.row_ptr(i);
        for (std::size_t a = 0; a < d; ++a) {
            const double ca = row[a] - mean[a];
            double* out = cov.row_ptr(a);
            for (std::size_t b = a; b < d; ++b) {
                out[b] += ca * (row[b] - mean[b]);
            }
        }
    }
    const double div = static_cast<double>(n - 1);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            const double v = cov(a, b) / div;
            cov(a, b) = v;
            cov(b, a) = v;
        }
    }
    return cov;
}

namespace {

double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return std::sqrt(s);
}

double off_diagonal_norm(const Matrix& m) {
    double s = 0.0;
    const std::size_t n = m.rows();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) s += m(i, j) * m(i, j);
        }
    }
    return std::sqrt(s);
}

}  // namespace

EigenResult sym_eigen(const Matrix& m, double symmetry_tol) {
    const std::size_t n = m.rows();
    if (n == 0 || m.cols() != n) {
        throw ContractViolationError("sym_eigen requires a square matrix");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(m(i, j) - m(j, i)) > symmetry_tol) {
                throw ContractViolationError("sym_eigen input is not symmetric");
            }
        }
    }

    Matrix a = m;
    // Symmetrize exactly so rotations stay consistent.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = v;
            a(j, i) = v;
        }
    }

    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    const double norm = frobenius_norm(a);
    const double target = (norm > 0.0) ? 1e-12 * norm : 0.0;
    const int max_sweeps = 100;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (off_diagonal_norm(a) <= target) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0)
                    ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                    : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a(i, p);
                    const double aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a(p, i);
                    const double aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p);
                    const double viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return a(i, i) > a(j, j);
    });

    EigenResult result;
    result.values.resize(n);
    result.vectors = Matrix(n, n);
    for (std::size_t col = 0; col < n; ++col) {
        const std::size_t src = order[col];
        result.values[col] = a(src, src);
        // Fix sign: largest-magnitude entry positive, lowest index on ties.
        std::size_t best = 0;
        double best_abs = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double mag = std::abs(v(i, src));
            if (mag > best_abs) {
                best_abs = mag;
                best = i;
            }
        }
        const double sign = (v(best, src) < 0.0) ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            result.vectors(i, col) = sign * v(i, src);
        }
    }
    return result;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

NeighborTable knn(const Matrix& x, std::size_t k) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (k < 1) throw InvalidParameterError("knn requires k >= 1");
    if (k >= n) throw InvalidParameterError("knn requires k < number of points");

    NeighborTable table;
    table.k = k;
    table.indices.assign(n * k, 0);
    table.distances.assign(n * k, 0.0);
    table.has_duplicate.assign(n, false);

    // Per-point candidate list kept sorted by (distance, index); small k.
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(k + 1);
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        cand.clear();
        const double* xi = x.row_ptr(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double bound = (cand.size() == k) ? cand.back().first : inf;
            // Same accumulation order as a plain loop; bailing out once the
            // partial sum exceeds the current k-th distance cannot change
            // which neighbors are kept.
            const double* xj = x.row_ptr(j);
            double dist2 = 0.0;
            bool pruned = false;
            std::size_t t = 0;
            for (; t + 8 <= d; t += 8) {
                for (std::size_t u = t; u < t + 8; ++u) {
                    const double diff = xi[u] - xj[u];
                    dist2 += diff * diff;
                }
                if (dist2 > bound) {
                    pruned = true;
                    break;
                }
            }
            if (pruned) continue;
            for (; t < d; ++t) {
                const double diff = xi[t] - xj[t];
                dist2 += diff * diff;
            }
            if (cand.size() == k && dist2 > cand.back().first) continue;
            std::pair<double, std::size_t> entry{dist2, j};
            if (cand.size() == k && entry >= cand.back()) continue;
            auto pos = std::lower_bound(cand.begin(), cand.end(), entry);
            cand.insert(pos, entry);
            if (cand.size() > k) cand.pop_back();
        }
        for (std::size_t j = 0; j < k; ++j) {
            table.indices[i * k + j] = cand[j].second;
            table.distances[i * k + j] = std::sqrt(cand[j].first);
        }
        table.has_duplicate[i] = (table.distances[i * k] == 0.0);
    }
    return table;
}

double cosine_similarity(const double* a, const double* b, std::size_t n) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        dot += a[j] * b[j];
        na += a[j] * a[j];
        nb += b[j] * b[j];
    }
    if (na == 0.0 || nb == 0.0) {
        throw DegenerateInputError("cosine_similarity on zero-norm vector");
    }
    const double value = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(value, -1.0, 1.0);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ContractViolationError("matmul shape mismatch");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row_ptr(i);
        double* orow = out.row_ptr(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row_ptr(k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                orow[j] += aik * brow[j];
            }
        }
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out(j, i) = a(i, j);
        }
    }
    return out;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw ContractViolationError("cosine_similarity length mismatch");
    }
    return cosine_similarity(a.data(), b.data(), a.size());
}

}  // namespace embkit
