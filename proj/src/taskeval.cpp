#include "embkit/taskeval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "embkit/rng.hpp"

namespace embkit {

namespace {

std::vector<std::string> sorted_unique(const std::vector<std::string>& labels) {
    std::vector<std::string> classes(labels);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    return classes;
}

std::vector<std::size_t> to_class_indices(const std::vector<std::string>& labels,
                                          const std::vector<std::string>& classes) {
    std::vector<std::size_t> idx(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto it = std::lower_bound(classes.begin(), classes.end(), labels[i]);
        if (it == classes.end() || *it != labels[i]) {
            throw ContractViolationError("label not in class set: " + labels[i]);
        }
        idx[i] = static_cast<std::size_t>(it - classes.begin());
    }
    return idx;
}

// Softmax probabilities per row, numerically shifted.
void softmax_rows(Matrix& logits) {
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        double* row = logits.row_ptr(i);
        double mx = row[0];
        for (std::size_t c = 1; c < logits.cols(); ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < logits.cols(); ++c) {
            row[c] = std::exp(row[c] - mx);
            sum += row[c];
        }
        for (std::size_t c = 0; c < logits.cols(); ++c) row[c] /= sum;
    }
}

Matrix compute_logits(const Matrix& x, const Matrix& w, const std::vector<double>& b) {
    Matrix logits = matmul(x, transpose(w));
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        double* row = logits.row_ptr(i);
        for (std::size_t c = 0; c < logits.cols(); ++c) row[c] += b[c];
    }
    return logits;
}

}  // namespace

double logreg_objective(const Matrix& x, const std::vector<std::size_t>& y_idx,
                        std::size_t n_classes, const Matrix& w,
                        const std::vector<double>& b, double l2) {
    Matrix logits = compute_logits(x, w, b);
    double loss = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* row = logits.row_ptr(i);
        double mx = row[0];
        for (std::size_t c = 1; c < n_classes; ++c) mx = std::max(mx, row[c]);
        double lse = 0.0;
        for (std::size_t c = 0; c < n_classes; ++c) lse += std::exp(row[c] - mx);
        loss += std::log(lse) + mx - row[y_idx[i]];
    }
    double reg = 0.0;
    for (double v : w.data()) reg += v * v;
    return loss + 0.5 * l2 * reg;
}

LogRegModel train_logreg(const Matrix& x, const std::vector<std::string>& y,
                         const LogRegOptions& opts) {
    if (y.size() != x.rows()) throw ContractViolationError("label/row count mismatch");
    const auto classes = sorted_unique(y);
    if (classes.size() < 2) {
        throw DegenerateInputError("logistic regression needs at least 2 classes");
    }
    const auto y_idx = to_class_indices(y, classes);
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    const std::size_t c_count = classes.size();

    Matrix w(c_count, d);
    std::vector<double> b(c_count, 0.0);
    double objective = logreg_objective(x, y_idx, c_count, w, b, opts.l2);

    Matrix grad_w(c_count, d);
    std::vector<double> grad_b(c_count, 0.0);
    double step = 1.0;
    bool converged = false;
    std::size_t epoch = 0;

    for (; epoch < opts.max_epochs; ++epoch) {
        Matrix probs = compute_logits(x, w, b);
        softmax_rows(probs);

        std::fill(grad_w.data().begin(), grad_w.data().end(), 0.0);
        std::fill(grad_b.begin(), grad_b.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* p = probs.row_ptr(i);
            const double* xi = x.row_ptr(i);
            for (std::size_t c = 0; c < c_count; ++c) {
                const double coeff = p[c] - (y_idx[i] == c ? 1.0 : 0.0);
                grad_b[c] += coeff;
                double* gw = grad_w.row_ptr(c);
                for (std::size_t j = 0; j < d; ++j) gw[j] += coeff * xi[j];
            }
        }
        for (std::size_t i = 0; i < grad_w.data().size(); ++i) {
            grad_w.data()[i] += opts.l2 * w.data()[i];
        }

        double grad_inf = 0.0;
        double grad_sq = 0.0;
        for (double g : grad_w.data()) {
            grad_inf = std::max(grad_inf, std::abs(g));
            grad_sq += g * g;
        }
        for (double g : grad_b) {
            grad_inf = std::max(grad_inf, std::abs(g));
            grad_sq += g * g;
        }
        if (grad_inf < opts.tol) {
            converged = true;
            break;
        }

        // Backtracking line search with an Armijo sufficient-decrease test.
        constexpr double armijo = 1e-4;
        constexpr double shrink = 0.5;
        Matrix w_try = w;
        std::vector<double> b_try = b;
        double trial = step;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t i = 0; i < w.data().size(); ++i) {
                w_try.data()[i] = w.data()[i] - trial * grad_w.data()[i];
            }
            for (std::size_t c = 0; c < c_count; ++c) {
                b_try[c] = b[c] - trial * grad_b[c];
            }
            const double obj_try = logreg_objective(x, y_idx, c_count, w_try, b_try, opts.l2);
            if (obj_try <= objective - armijo * trial * grad_sq) {
                w = w_try;
                b = b_try;
                objective = obj_try;
                accepted = true;
                break;
            }
            trial *= shrink;
        }
        if (!accepted) break;  // step underflow; gradient noise floor reached
        step = std::min(trial * 2.0, 1e6);
    }

    LogRegModel model;
    model.weights = std::move(w);
    model.bias = std::move(b);
    model.classes = classes;
    model.converged = converged;
    model.epochs_run = epoch;
    model.final_objective = objective;
    return model;
}

std::vector<std::string> predict_logreg(const LogRegModel& m, const Matrix& x) {
    Matrix logits = compute_logits(x, m.weights, m.bias);
    std::vector<std::string> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* row = logits.row_ptr(i);
        std::size_t best = 0;
        for (std::size_t c = 1; c < m.classes.size(); ++c) {
            if (row[c] > row[best]) best = c;
        }
        out[i] = m.classes[best];
    }
    return out;
}

namespace {

double assignment_pass(const Matrix& x, const Matrix& centers,
                       std::vector<std::size_t>& assign) {
    const std::size_t n = x.rows();
    const std::size_t k = centers.rows();
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_c = 0;
        for (std::size_t c = 0; c < k; ++c) {
            const double dist = squared_distance(x.row_ptr(i), centers.row_ptr(c), x.cols());
            if (dist < best) {
                best = dist;
                best_c = c;
            }
        }
        assign[i] = best_c;
        inertia += best;
    }
    return inertia;
}

KMeansResult kmeans_single(const Matrix& x, std::size_t k, CounterRng& rng) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();

    // k-means++ seeding.
    Matrix centers(k, d);
    std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
    std::size_t first = static_cast<std::size_t>(rng.next_below(n));
    std::copy_n(x.row_ptr(first), d, centers.row_ptr(0));
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dist = squared_distance(x.row_ptr(i), centers.row_ptr(c - 1), d);
            min_dist[i] = std::min(min_dist[i], dist);
            total += min_dist[i];
        }
        std::size_t chosen;
        if (total == 0.0) {
            chosen = static_cast<std::size_t>(rng.next_below(n));
        } else {
            const double target = rng.next_double() * total;
            double acc = 0.0;
            chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += min_dist[i];
                if (acc >= target) {
                    chosen = i;
                    break;
                }
            }
        }
        std::copy_n(x.row_ptr(chosen), d, centers.row_ptr(c));
    }

    std::vector<std::size_t> assign(n, 0);
    double inertia = assignment_pass(x, centers, assign);
    std::vector<std::size_t> counts(k, 0);

    for (int iter = 0; iter < 300; ++iter) {
        std::fill(centers.data().begin(), centers.data().end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            double* ctr = centers.row_ptr(assign[i]);
            const double* xi = x.row_ptr(i);
            for (std::size_t j = 0; j < d; ++j) ctr[j] += xi[j];
            ++counts[assign[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // Re-seed an empty cluster from the worst-fit point.
                std::size_t worst = 0;
                double worst_dist = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double dist =
                        squared_distance(x.row_ptr(i), centers.row_ptr(assign[i]), d);
                    if (dist > worst_dist) {
                        worst_dist = dist;
                        worst = i;
                    }
                }
                std::copy_n(x.row_ptr(worst), d, centers.row_ptr(c));
            } else {
                double* ctr = centers.row_ptr(c);
                for (std::size_t j = 0; j < d; ++j) ctr[j] /= static_cast<double>(counts[c]);
            }
        }
        const std::vector<std::size_t> prev = assign;
        inertia = assignment_pass(x, centers, assign);
        if (assign == prev) break;
    }

    KMeansResult r;
    r.assignments = std::move(assign);
    r.centers = std::move(centers);
    r.inertia = inertia;
    return r;
}

}  // namespace

KMeansResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, std::size_t restarts) {
    if (k < 2) throw InvalidParameterError("kmeans requires k >= 2");
    if (k > x.rows()) throw InvalidParameterError("kmeans requires k <= number of points");
    if (restarts < 1) throw InvalidParameterError("kmeans requires restarts >= 1");

    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < restarts; ++r) {
        CounterRng rng(CounterRng::derive(seed, r));
        KMeansResult candidate = kmeans_single(x, k, rng);
        if (candidate.inertia < best.inertia) best = std::move(candidate);
    }
    return best;
}

namespace {

double entropy_from_counts(const std::vector<std::size_t>& counts, std::size_t total) {
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log(p);
    }
    return h;
}

}  // namespace

double v_measure(const std::vector<std::string>& gold, const std::vector<std::string>& pred,
                 double beta) {
    if (gold.size() != pred.size()) throw ContractViolationError("v_measure length mismatch");
    if (gold.empty()) throw ContractViolationError("v_measure on empty labeling");
    const std::size_t n = gold.size();

    std::map<std::string, std::size_t> gold_ids, pred_ids;
    for (const auto& g : gold) gold_ids.emplace(g, gold_ids.size());
    for (const auto& p : pred) pred_ids.emplace(p, pred_ids.size());
    const std::size_t ng = gold_ids.size();
    const std::size_t np = pred_ids.size();

    std::vector<std::size_t> contingency(ng * np, 0), gold_counts(ng, 0), pred_counts(np, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t g = gold_ids[gold[i]];
        const std::size_t p = pred_ids[pred[i]];
        ++contingency[g * np + p];
        ++gold_counts[g];
        ++pred_counts[p];
    }

    const double h_gold = entropy_from_counts(gold_counts, n);
    const double h_pred = entropy_from_counts(pred_counts, n);

    // H(C|K) and H(K|C) from the joint counts, natural log.
    double h_gold_given_pred = 0.0;
    double h_pred_given_gold = 0.0;
    for (std::size_t g = 0; g < ng; ++g) {
        for (std::size_t p = 0; p < np; ++p) {
            const std::size_t c = contingency[g * np + p];
            if (c == 0) continue;
            const double joint = static_cast<double>(c) / static_cast<double>(n);
            h_gold_given_pred -= joint * std::log(static_cast<double>(c) /
                                                  static_cast<double>(pred_counts[p]));
            h_pred_given_gold -= joint * std::log(static_cast<double>(c) /
                                                  static_cast<double>(gold_counts[g]));
        }
    }

    const double homogeneity = (h_gold == 0.0) ? 1.0 : 1.0 - h_gold_given_pred / h_gold;
    const double completeness = (h_pred == 0.0) ? 1.0 : 1.0 - h_pred_given_gold / h_pred;
    const double denom = beta * homogeneity + completeness;
    if (denom == 0.0) return 0.0;
    return (1.0 + beta) * homogeneity * completeness / denom;
}

std::optional<double> ndcg_at_k(const std::vector<int>& ranked_relevances, std::size_t k,
                                const std::vector<int>& all_judged_relevances) {
    if (k < 1) throw InvalidParameterError("ndcg requires k >= 1");
    for (int r : ranked_relevances) {
        if (r < 0) throw ContractViolationError("negative relevance in ranking");
    }
    std::vector<int> ideal(all_judged_relevances);
    for (int r : ideal) {
        if (r < 0) throw ContractViolationError("negative relevance in judgments");
    }
    std::sort(ideal.begin(), ideal.end(), std::greater<int>());

    double idcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, ideal.size()); ++i) {
        idcg += static_cast<double>(ideal[i]) / std::log2(static_cast<double>(i) + 2.0);
    }
    if (idcg == 0.0) return std::nullopt;

    double dcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, ranked_relevances.size()); ++i) {
        dcg += static_cast<double>(ranked_relevances[i]) / std::log2(static_cast<double>(i) + 2.0);
    }
    return dcg / idcg;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ContractViolationError("spearman length mismatch");
    if (a.size() < 3) throw ContractViolationError("spearman needs at least 3 observations");

    auto ranks = [](const std::vector<double>& v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // average 1-based rank
            for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
            i = j + 1;
        }
        return r;
    };

    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = ra[i] - ma;
        const double db = rb[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0) {
        throw NonIdentifiableError("spearman on a constant input");
    }
    return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

TaskScore eval_classification(const ClassificationBundle& b) {
    validate_classification(b);
    const LogRegModel model = train_logreg(b.train.matrix, b.train_labels);
    const auto pred = predict_logreg(model, b.test.matrix);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == b.test_labels[i]) ++correct;
    }
    TaskScore s;
    s.task = "classification";
    s.metric = "accuracy";
    s.value = static_cast<double>(correct) / static_cast<double>(pred.size());
    s.n_items = pred.size();
    return s;
}

TaskScore eval_clustering(const ClusteringBundle& b, std::uint64_t seed) {
    validate_clustering(b);
    const auto classes = sorted_unique(b.gold_labels);
    const KMeansResult km = kmeans(b.points.matrix, classes.size(), seed);
    std::vector<std::string> pred(km.assignments.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        pred[i] = "c" + std::to_string(km.assignments[i]);
    }
    TaskScore s;
    s.task = "clustering";
    s.metric = "v_measure";
    s.value = v_measure(b.gold_labels, pred);
    s.n_items = pred.size();
    return s;
}

TaskScore eval_retrieval(const RetrievalBundle& b) {
    validate_retrieval(b);
    const std::size_t nq = b.queries.rows();
    const std::size_t np = b.passages.rows();
    const std::size_t d = b.queries.cols();

    // relevance[q] maps passage -> grade.
    std::vector<std::map<std::size_t, int>> relevance(nq);
    for (const auto& q : b.qrels) relevance[q.query].emplace(q.passage, q.relevance);

    double total = 0.0;
    std::size_t scored = 0;
    std::vector<std::pair<double, std::size_t>> scores(np);
    for (std::size_t q = 0; q < nq; ++q) {
        const double* qv = b.queries.matrix.row_ptr(q);
        for (std::size_t p = 0; p < np; ++p) {
            double sim;
            try {
                sim = cosine_similarity(qv, b.passages.matrix.row_ptr(p), d);
            } catch (const DegenerateInputError&) {
                std::ostringstream os;
                os << "zero-norm embedding at query " << q << " or passage " << p;
                throw DegenerateInputError(os.str());
            }
            scores[p] = {-sim, p};  // descending similarity, ties by index
        }
        std::sort(scores.begin(), scores.end());

        std::vector<int> ranked(np, 0);
        for (std::size_t i = 0; i < np; ++i) {
            const auto it = relevance[q].find(scores[i].second);
            ranked[i] = (it != relevance[q].end()) ? it->second : 0;
        }
        std::vector<int> judged;
        judged.reserve(relevance[q].size());
        for (const auto& [p, rel] : relevance[q]) judged.push_back(rel);

        const auto score = ndcg_at_k(ranked, 10, judged);
        if (score) {
            total += *score;
            ++scored;
        }
    }
    TaskScore s;
    s.task = "retrieval";
    s.metric = "ndcg_at_10";
    s.value = (scored > 0) ? total / static_cast<double>(scored) : 0.0;
    s.n_items = scored;
    return s;
}

TaskScore eval_sts(const StsBundle& b) {
    validate_sts(b);
    std::vector<double> sims(b.pairs.size()), gold(b.pairs.size());
    for (std::size_t i = 0; i < b.pairs.size(); ++i) {
        const auto& p = b.pairs[i];
        sims[i] = cosine_similarity(b.points.matrix.row_ptr(p.a), b.points.matrix.row_ptr(p.b),
                                    b.points.cols());
        gold[i] = p.gold_score;
    }
    TaskScore s;
    s.task = "sts";
    s.metric = "spearman";
    s.value = spearman(sims, gold);
    s.n_items = b.pairs.size();
    return s;
}

}  // namespace embkit
