#include "embkit/synthgen.hpp"

#include <cmath>

#include "embkit/matrix.hpp"
#include "embkit/rng.hpp"

namespace embkit {

Matrix random_orthonormal(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    if (cols > rows) throw InvalidParameterError("random_orthonormal requires cols <= rows");
    CounterRng rng(seed);
    Matrix g(rows, cols);
    for (double& v : g.data()) v = rng.next_gaussian();

    // Modified Gram-Schmidt; positive pivot fixes each column's sign.
    for (std::size_t j = 0; j < cols; ++j) {
        for (std::size_t p = 0; p < j; ++p) {
            double dot = 0.0;
            for (std::size_t i = 0; i < rows; ++i) dot += g(i, p) * g(i, j);
            for (std::size_t i = 0; i < rows; ++i) g(i, j) -= dot * g(i, p);
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < rows; ++i) norm += g(i, j) * g(i, j);
        norm = std::sqrt(norm);
        if (norm < 1e-12) throw DegenerateInputError("rank-deficient Gaussian draw in QR");
        const double sign = (g(j, j) < 0.0) ? -1.0 : 1.0;
        for (std::size_t i = 0; i < rows; ++i) g(i, j) *= sign / norm;
    }
    return g;
}

EmbeddingMatrix gen_uniform_manifold(std::size_t d, std::size_t big_d, std::size_t n,
                                     std::uint64_t seed) {
    if (d < 1 || d > big_d) throw InvalidParameterError("need 1 <= d <= D");
    if (n < 1) throw InvalidParameterError("need n >= 1");
    const Matrix q = random_orthonormal(big_d, d, CounterRng::derive(seed, 0));
    CounterRng rng(CounterRng::derive(seed, 1));
    Matrix u(n, d);
    for (double& v : u.data()) v = rng.next_double();

    EmbeddingMatrix out;
    out.matrix = matmul(u, transpose(q));
    out.prompt_type = PromptType::kNone;
    out.source_tag = "synth:uniform_manifold";
    return out;
}

EmbeddingMatrix gen_gaussian_spectrum(const std::vector<double>& spectrum, std::size_t n,
                                      std::uint64_t seed) {
    const std::size_t dim = spectrum.size();
    if (dim < 2) throw InvalidParameterError("spectrum needs length >= 2");
    for (double s : spectrum) {
        if (s < 0.0) throw InvalidParameterError("negative spectrum entry");
    }
    const Matrix q = random_orthonormal(dim, dim, CounterRng::derive(seed, 0));
    CounterRng rng(CounterRng::derive(seed, 1));
    Matrix z(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = z.row_ptr(i);
        for (std::size_t j = 0; j < dim; ++j) {
            row[j] = std::sqrt(spectrum[j]) * rng.next_gaussian();
        }
    }
    EmbeddingMatrix out;
    out.matrix = matmul(z, transpose(q));
    out.prompt_type = PromptType::kNone;
    out.source_tag = "synth:gaussian_spectrum";
    return out;
}

BlobBundles gen_labeled_blobs(std::size_t n_classes, std::size_t dim, std::size_t per_class,
                              double separation, std::uint64_t seed) {
    if (n_classes < 2) throw InvalidParameterError("need at least 2 classes");
    if (per_class < 2) throw InvalidParameterError("need at least 2 points per class");
    if (separation < 0.0) throw InvalidParameterError("negative separation");

    CounterRng mean_rng(CounterRng::derive(seed, 0));
    Matrix means(n_classes, dim);
    for (std::size_t c = 0; c < n_classes; ++c) {
        double* row = means.row_ptr(c);
        double norm = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            row[j] = mean_rng.next_gaussian();
            norm += row[j] * row[j];
        }
        norm = std::sqrt(norm);
        for (std::size_t j = 0; j < dim; ++j) row[j] *= separation / norm;
    }

    const std::size_t n_test = std::max<std::size_t>(1, per_class / 5);
    const std::size_t n_train = per_class - n_test;

    BlobBundles b;
    b.classification.train.matrix = Matrix(n_classes * n_train, dim);
    b.classification.test.matrix = Matrix(n_classes * n_test, dim);
    b.clustering.points.matrix = Matrix(n_classes * per_class, dim);
    b.classification.train.prompt_type = PromptType::kClassification;
    b.classification.test.prompt_type = PromptType::kClassification;
    b.clustering.points.prompt_type = PromptType::kClustering;
    b.classification.train.source_tag = "synth:blobs_train";
    b.classification.test.source_tag = "synth:blobs_test";
    b.clustering.points.source_tag = "synth:blobs";

    CounterRng rng(CounterRng::derive(seed, 1));
    std::size_t train_row = 0, test_row = 0, all_row = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        const std::string label = "class" + std::to_string(c);
        for (std::size_t i = 0; i < per_class; ++i) {
            std::vector<double> point(dim);
            for (std::size_t j = 0; j < dim; ++j) {
                point[j] = means(c, j) + rng.next_gaussian();
            }
            double* all = b.clustering.points.matrix.row_ptr(all_row++);
            std::copy(point.begin(), point.end(), all);
            b.clustering.gold_labels.push_back(label);
            if (i < n_train) {
                std::copy(point.begin(), point.end(),
                          b.classification.train.matrix.row_ptr(train_row++));
                b.classification.train_labels.push_back(label);
            } else {
                std::copy(point.begin(), point.end(),
                          b.classification.test.matrix.row_ptr(test_row++));
                b.classification.test_labels.push_back(label);
            }
        }
    }
    validate_classification(b.classification);
    validate_clustering(b.clustering);
    return b;
}

RetrievalBundle gen_retrieval_planted(std::size_t n_queries, std::size_t n_passages,
                                      std::size_t dim, double noise, std::uint64_t seed) {
    if (n_queries < 1 || n_passages < 2) {
        throw InvalidParameterError("need n_queries >= 1 and n_passages >= 2");
    }
    if (n_passages < n_queries) {
        throw InvalidParameterError("need n_passages >= n_queries (one relevant each)");
    }
    CounterRng rng(CounterRng::derive(seed, 0));

    RetrievalBundle b;
    b.queries.matrix = Matrix(n_queries, dim);
    b.passages.matrix = Matrix(n_passages, dim);
    b.queries.prompt_type = PromptType::kRetrievalQuery;
    b.passages.prompt_type = PromptType::kRetrievalPassage;
    b.queries.source_tag = "synth:retrieval_queries";
    b.passages.source_tag = "synth:retrieval_passages";

    for (double& v : b.queries.matrix.data()) v = rng.next_gaussian();
    for (std::size_t p = 0; p < n_passages; ++p) {
        double* row = b.passages.matrix.row_ptr(p);
        if (p < n_queries) {
            const double* q = b.queries.matrix.row_ptr(p);
            for (std::size_t j = 0; j < dim; ++j) row[j] = q[j] + noise * rng.next_gaussian();
        } else {
            for (std::size_t j = 0; j < dim; ++j) row[j] = rng.next_gaussian();
        }
    }
    for (std::size_t q = 0; q < n_queries; ++q) b.qrels.push_back(Qrel{q, q, 1});
    validate_retrieval(b);
    return b;
}

StsBundle gen_sts_planted(std::size_t n_pairs, std::size_t dim, double noise,
                          std::uint64_t seed) {
    if (n_pairs < 3) throw InvalidParameterError("need at least 3 pairs");
    CounterRng rng(CounterRng::derive(seed, 0));

    StsBundle b;
    b.points.matrix = Matrix(2 * n_pairs, dim);
    b.points.prompt_type = PromptType::kSts;
    b.points.source_tag = "synth:sts";

    for (std::size_t i = 0; i < n_pairs; ++i) {
        double* a = b.points.matrix.row_ptr(i);
        double* second = b.points.matrix.row_ptr(n_pairs + i);
        std::vector<double> independent(dim), clean(dim);
        for (std::size_t j = 0; j < dim; ++j) a[j] = rng.next_gaussian();
        for (std::size_t j = 0; j < dim; ++j) independent[j] = rng.next_gaussian();
        // Graded alignment from near-independent to near-identical.
        const double t = static_cast<double>(i) / static_cast<double>(n_pairs - 1);
        for (std::size_t j = 0; j < dim; ++j) {
            clean[j] = t * a[j] + (1.0 - t) * independent[j];
        }
        const double gold = cosine_similarity(a, clean.data(), dim);
        for (std::size_t j = 0; j < dim; ++j) {
            second[j] = clean[j] + noise * rng.next_gaussian();
        }
        b.pairs.push_back(StsPair{i, n_pairs + i, gold});
    }
    validate_sts(b);
    return b;
}

}  // namespace embkit
