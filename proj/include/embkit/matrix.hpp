#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "embkit/error.hpp"

namespace embkit {

// Dense row-major matrix of doubles. All entries must be finite.
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }
    double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    // Throws ContractViolationError if any entry is NaN or Inf.
    void check_finite() const;

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

// Full spectral decomposition of a symmetric matrix.
// values sorted non-increasing; column i of vectors pairs with values[i].
struct EigenResult {
    std::vector<double> values;
    Matrix vectors;
};

// Exact k nearest neighbors per point, self excluded, distances ascending.
struct NeighborTable {
    std::size_t k = 0;
    // indices[i*k + j] / distances[i*k + j]: j-th neighbor of point i.
    std::vector<std::size_t> indices;
    std::vector<double> distances;
    // true for points whose nearest neighbor sits at distance 0.
    std::vector<bool> has_duplicate;

    std::size_t neighbor(std::size_t point, std::size_t j) const { return indices[point * k + j]; }
    double distance(std::size_t point, std::size_t j) const { return distances[point * k + j]; }
};

// Sample covariance of column-mean-centered X, divisor N-1.
Matrix covariance(const Matrix& x);

// Cyclic Jacobi eigensolver for symmetric matrices. Sign convention:
// the largest-magnitude entry of each eigenvector is positive.
EigenResult sym_eigen(const Matrix& m, double symmetry_tol = 1e-9);

// Exact Euclidean k-NN, ties broken by lower row index.
NeighborTable knn(const Matrix& x, std::size_t k);

double cosine_similarity(const double* a, const double* b, std::size_t n);
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

double squared_distance(const double* a, const double* b, std::size_t n);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

}  // namespace embkit
