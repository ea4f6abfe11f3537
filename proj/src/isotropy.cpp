#include "embkit/isotropy.hpp"

#include <algorithm>
#include <cmath>

#include "embkit/matrix.hpp"

namespace embkit {

double isotropy_defect(const std::vector<double>& variances, std::size_t n) {
    if (n < 2) throw InvalidParameterError("isotropy_defect needs n >= 2");
    if (variances.size() != n) {
        throw ContractViolationError("variance vector length does not match n");
    }
    double norm_sq = 0.0;
    for (double v : variances) {
        if (v < 0.0) throw ContractViolationError("negative variance");
        norm_sq += v * v;
    }
    if (norm_sq == 0.0) throw DegenerateInputError("all-zero variance spectrum");

    const double nn = static_cast<double>(n);
    const double scale = std::sqrt(nn) / std::sqrt(norm_sq);
    double dev_sq = 0.0;
    for (double v : variances) {
        const double diff = scale * v - 1.0;
        dev_sq += diff * diff;
    }
    return std::sqrt(dev_sq) / std::sqrt(2.0 * (nn - std::sqrt(nn)));
}

IsotropyReport isoscore_from_spectrum(const std::vector<double>& variances, std::size_t n_points) {
    const std::size_t n = variances.size();
    const double delta = isotropy_defect(variances, n);
    const double nn = static_cast<double>(n);
    const double phi = std::pow(nn - delta * delta * (nn - std::sqrt(nn)), 2.0) / (nn * nn);
    const double iota = (nn * phi - 1.0) / (nn - 1.0);

    IsotropyReport r;
    r.raw_isoscore = iota;
    r.isoscore = std::clamp(iota, 0.0, 1.0);
    r.defect = std::clamp(delta, 0.0, 1.0);
    r.n_dims = n;
    r.n_points = n_points;
    return r;
}

IsotropyReport isoscore(const EmbeddingMatrix& x) {
    if (x.rows() <= x.cols()) {
        throw DegenerateInputError(
            "isoscore needs more points than dimensions; subsample dims or add points");
    }
    const Matrix cov = covariance(x.matrix);
    const EigenResult eig = sym_eigen(cov);
    // Covariance is PSD; clamp the eigensolver's rounding noise.
    std::vector<double> variances(eig.values.size());
    for (std::size_t i = 0; i < variances.size(); ++i) {
        variances[i] = std::max(eig.values[i], 0.0);
    }
    return isoscore_from_spectrum(variances, x.rows());
}

}  // namespace embkit
