#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "embkit/dataset.hpp"
#include "embkit/matrix.hpp"

namespace embkit {

struct LogRegModel {
    Matrix weights;  // C x D
    std::vector<double> bias;
    std::vector<std::string> classes;  // sorted; row c of weights scores classes[c]
    bool converged = false;
    std::size_t epochs_run = 0;
    double final_objective = 0.0;
};

struct TaskScore {
    std::string task;    // classification | clustering | retrieval | sts
    std::string metric;  // accuracy | v_measure | ndcg_at_10 | spearman
    double value = 0.0;
    std::size_t n_items = 0;
};

struct LogRegOptions {
    double l2 = 1.0;
    double tol = 1e-6;
    std::size_t max_epochs = 1000;
};

LogRegModel train_logreg(const Matrix& x, const std::vector<std::string>& y,
                         const LogRegOptions& opts = {});
std::vector<std::string> predict_logreg(const LogRegModel& m, const Matrix& x);

// Regularized multinomial cross-entropy, exposed for optimizer checks.
double logreg_objective(const Matrix& x, const std::vector<std::size_t>& y_idx,
                        std::size_t n_classes, const Matrix& w,
                        const std::vector<double>& b, double l2);

struct KMeansResult {
    std::vector<std::size_t> assignments;
    Matrix centers;
    double inertia = 0.0;
};

KMeansResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed,
                    std::size_t restarts = 10);

double v_measure(const std::vector<std::string>& gold, const std::vector<std::string>& pred,
                 double beta = 1.0);

// nullopt when the judged relevances carry no relevant mass (query skipped).
std::optional<double> ndcg_at_k(const std::vector<int>& ranked_relevances, std::size_t k,
                                const std::vector<int>& all_judged_relevances);

double spearman(const std::vector<double>& a, const std::vector<double>& b);

TaskScore eval_classification(const ClassificationBundle& b);
TaskScore eval_clustering(const ClusteringBundle& b, std::uint64_t seed);
TaskScore eval_retrieval(const RetrievalBundle& b);
TaskScore eval_sts(const StsBundle& b);

}  // namespace embkit
