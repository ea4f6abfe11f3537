#include "embkit/intrinsic_dim.hpp"

#include <algorithm>
#include <cmath>

namespace embkit {

RatioSample twonn_ratios(const EmbeddingMatrix& x) {
    const std::size_t n = x.rows();
    if (n < 3) throw InsufficientDataError("twonn needs at least 3 points");
    const NeighborTable nbrs = knn(x.matrix, 2);

    RatioSample s;
    s.mu.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r1 = nbrs.distance(i, 0);
        const double r2 = nbrs.distance(i, 1);
        if (r1 == 0.0) {
            ++s.n_duplicates;
            continue;
        }
        s.mu.push_back(r2 / r1);
    }
    s.kept_fraction = static_cast<double>(s.mu.size()) / static_cast<double>(n);
    if (s.mu.size() < 12) {
        throw InsufficientDataError("fewer than 12 usable points after duplicate removal");
    }
    return s;
}

IdEstimate twonn_fit(const RatioSample& s, double discard_fraction) {
    if (discard_fraction < 0.0 || discard_fraction >= 0.5) {
        throw InvalidParameterError("discard_fraction must be in [0, 0.5)");
    }
    std::vector<double> mu = s.mu;
    std::sort(mu.begin(), mu.end());
    const std::size_t n = mu.size();

    double sum_log = 0.0;
    for (double m : mu) sum_log += std::log(m);
    if (sum_log <= 0.0) {
        throw NonIdentifiableError("all distance ratios equal 1; dimension not identifiable");
    }

    // Empirical CDF F_i = i/n; the final point (F = 1) is excluded, then
    // the top discard_fraction of ratios is dropped.
    std::size_t n_keep = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * (1.0 - discard_fraction)));
    n_keep = std::min(n_keep, n - 1);

    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 1; i <= n_keep; ++i) {
        const double xi = std::log(mu[i - 1]);
        const double fi = static_cast<double>(i) / static_cast<double>(n);
        const double yi = -std::log(1.0 - fi);
        sxy += xi * yi;
        sxx += xi * xi;
    }
    if (sxx == 0.0) {
        throw NonIdentifiableError("kept ratios are all 1; dimension not identifiable");
    }

    IdEstimate e;
    e.id = sxy / sxx;
    e.id_mle = static_cast<double>(n) / sum_log;
    e.n_used = n_keep;
    e.discard_fraction = discard_fraction;
    return e;
}

IdEstimate twonn(const EmbeddingMatrix& x, double discard_fraction) {
    return twonn_fit(twonn_ratios(x), discard_fraction);
}

}  // namespace embkit
