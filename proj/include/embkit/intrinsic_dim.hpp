#pragma once

#include <vector>

#include "embkit/dataset.hpp"

namespace embkit {

// Second-to-first neighbor distance ratios, one per usable point.
struct RatioSample {
    std::vector<double> mu;          // every entry >= 1
    double kept_fraction = 1.0;      // usable points / total points
    std::size_t n_duplicates = 0;    // points dropped because r1 == 0
};

struct IdEstimate {
    double id = 0.0;        // least-squares fit through the origin
    double id_mle = 0.0;    // closed-form cross-check on the full sample
    std::size_t n_used = 0; // ratios entering the linear fit
    double discard_fraction = 0.0;
};

RatioSample twonn_ratios(const EmbeddingMatrix& x);

IdEstimate twonn_fit(const RatioSample& s, double discard_fraction = 0.10);

// Convenience: ratios + fit in one call.
IdEstimate twonn(const EmbeddingMatrix& x, double discard_fraction = 0.10);

}  // namespace embkit
