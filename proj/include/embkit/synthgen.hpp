#pragma once

#include <cstdint>
#include <vector>

#include "embkit/dataset.hpp"

namespace embkit {

// Deterministic generators with analytic ground truth. Identical
// arguments produce bitwise-identical output.

// N points uniform on [0,1]^d mapped isometrically into R^D; the true
// intrinsic dimension is exactly d.
EmbeddingMatrix gen_uniform_manifold(std::size_t d, std::size_t big_d, std::size_t n,
                                     std::uint64_t seed);

// Zero-mean Gaussian with the given diagonal covariance, rotated by a
// seeded orthogonal map.
EmbeddingMatrix gen_gaussian_spectrum(const std::vector<double>& spectrum, std::size_t n,
                                      std::uint64_t seed);

struct BlobBundles {
    ClassificationBundle classification;
    ClusteringBundle clustering;
};

// C unit-variance Gaussian blobs with means at separation * (random unit
// directions); 80/20 stratified train/test split.
BlobBundles gen_labeled_blobs(std::size_t n_classes, std::size_t dim, std::size_t per_class,
                              double separation, std::uint64_t seed);

// Each query's relevant passage is the query plus noise * Gaussian;
// remaining passages are isotropic distractors.
RetrievalBundle gen_retrieval_planted(std::size_t n_queries, std::size_t n_passages,
                                      std::size_t dim, double noise, std::uint64_t seed);

// Pairs with graded planted alignment; gold score is the cosine of the
// pair before noise injection.
StsBundle gen_sts_planted(std::size_t n_pairs, std::size_t dim, double noise,
                          std::uint64_t seed);

// Seeded matrix with orthonormal columns (QR of a Gaussian matrix with a
// sign-fixed diagonal). Exposed for isometry checks.
Matrix random_orthonormal(std::size_t rows, std::size_t cols, std::uint64_t seed);

}  // namespace embkit
