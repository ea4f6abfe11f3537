#pragma once

#include <vector>

#include "embkit/dataset.hpp"

namespace embkit {

struct IsotropyReport {
    double isoscore = 0.0;      // clamped to [0, 1]
    double defect = 0.0;        // clamped to [0, 1]
    double raw_isoscore = 0.0;  // pre-clamp value, kept for report metadata
    std::size_t n_dims = 0;
    std::size_t n_points = 0;
};

// Deviation of the normalized variance spectrum from the all-ones vector:
// sigma_hat = sqrt(n) * sigma / |sigma|, delta = |sigma_hat - 1| / sqrt(2(n - sqrt(n))).
double isotropy_defect(const std::vector<double>& variances, std::size_t n);

IsotropyReport isoscore(const EmbeddingMatrix& x);

// Score from an already-computed variance spectrum (PCA-basis variances).
IsotropyReport isoscore_from_spectrum(const std::vector<double>& variances, std::size_t n_points);

}  // namespace embkit
