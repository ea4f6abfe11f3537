#include "embkit/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "embkit/intrinsic_dim.hpp"
#include "embkit/isotropy.hpp"
#include "embkit/rng.hpp"
#include "embkit/taskeval.hpp"

namespace embkit {

using nlohmann::json;

SweepConfig parse_sweep_config(const json& j) {
    SweepConfig c;
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j.at("threads").get<std::size_t>();
    if (j.contains("dims")) c.dims = j.at("dims").get<std::vector<std::size_t>>();
    if (j.contains("methods")) {
        for (const auto& m : j.at("methods")) {
            MethodSpec spec;
            spec.kind = reducer_kind_from_name(m.at("kind").get<std::string>());
            if (m.contains("n_neighbors")) {
                spec.n_neighbors = m.at("n_neighbors").get<std::size_t>();
            }
            c.methods.push_back(spec);
        }
    }
    if (j.contains("estimators")) {
        const auto& e = j.at("estimators");
        if (e.contains("twonn")) c.run_twonn = e.at("twonn").get<bool>();
        if (e.contains("isoscore")) c.run_isoscore = e.at("isoscore").get<bool>();
        if (e.contains("twonn_discard")) c.twonn_discard = e.at("twonn_discard").get<double>();
    }
    if (j.contains("embeddings")) c.embeddings = j.at("embeddings").get<std::string>();
    if (j.contains("tasks")) {
        const auto& t = j.at("tasks");
        if (t.contains("classification")) {
            for (const auto& e : t.at("classification")) {
                c.classification.push_back({e.at("name"), e.at("train"), e.at("train_labels"),
                                            e.at("test"), e.at("test_labels")});
            }
        }
        if (t.contains("clustering")) {
            for (const auto& e : t.at("clustering")) {
                c.clustering.push_back({e.at("name"), e.at("points"), e.at("labels")});
            }
        }
        if (t.contains("retrieval")) {
            for (const auto& e : t.at("retrieval")) {
                c.retrieval.push_back(
                    {e.at("name"), e.at("queries"), e.at("passages"), e.at("qrels")});
            }
        }
        if (t.contains("sts")) {
            for (const auto& e : t.at("sts")) {
                c.sts.push_back({e.at("name"), e.at("points"), e.at("pairs")});
            }
        }
    }
    return c;
}

json sweep_config_to_json(const SweepConfig& c) {
    json methods = json::array();
    for (const auto& m : c.methods) {
        json obj{{"kind", reducer_kind_name(m.kind)}};
        if (m.kind == ReducerKind::kIsomap) obj["n_neighbors"] = m.n_neighbors;
        methods.push_back(obj);
    }
    json tasks = json::object();
    if (!c.classification.empty()) {
        json arr = json::array();
        for (const auto& e : c.classification) {
            arr.push_back({{"name", e.name},
                           {"train", e.train},
                           {"train_labels", e.train_labels},
                           {"test", e.test},
                           {"test_labels", e.test_labels}});
        }
        tasks["classification"] = arr;
    }
    if (!c.clustering.empty()) {
        json arr = json::array();
        for (const auto& e : c.clustering) {
            arr.push_back({{"name", e.name}, {"points", e.points}, {"labels", e.labels}});
        }
        tasks["clustering"] = arr;
    }
    if (!c.retrieval.empty()) {
        json arr = json::array();
        for (const auto& e : c.retrieval) {
            arr.push_back({{"name", e.name},
                           {"queries", e.queries},
                           {"passages", e.passages},
                           {"qrels", e.qrels}});
        }
        tasks["retrieval"] = arr;
    }
    if (!c.sts.empty()) {
        json arr = json::array();
        for (const auto& e : c.sts) {
            arr.push_back({{"name", e.name}, {"points", e.points}, {"pairs", e.pairs}});
        }
        tasks["sts"] = arr;
    }
    json out{{"seed", c.seed},
             {"dims", c.dims},
             {"methods", methods},
             {"estimators",
              {{"twonn", c.run_twonn},
               {"isoscore", c.run_isoscore},
               {"twonn_discard", c.twonn_discard}}},
             {"tasks", tasks}};
    if (!c.embeddings.empty()) out["embeddings"] = c.embeddings;
    return out;
}

namespace {

Matrix vconcat(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw ContractViolationError("vconcat width mismatch");
    Matrix out(a.rows() + b.rows(), a.cols());
    std::copy(a.data().begin(), a.data().end(), out.data().begin());
    std::copy(b.data().begin(), b.data().end(), out.data().begin() + a.data().size());
    return out;
}

Matrix take_rows(const Matrix& x, std::size_t begin, std::size_t count) {
    Matrix out(count, x.cols());
    std::copy(x.data().begin() + begin * x.cols(),
              x.data().begin() + (begin + count) * x.cols(), out.data().begin());
    return out;
}

enum class TargetKind { kClassification, kClustering, kRetrieval, kSts, kTwoNn, kIsoScore };

struct Target {
    TargetKind kind;
    std::string name;  // record target field, e.g. "classification/blobs"
    std::size_t index = 0;
};

struct LoadedInputs {
    std::vector<ClassificationBundle> classification;
    std::vector<ClusteringBundle> clustering;
    std::vector<RetrievalBundle> retrieval;
    std::vector<StsBundle> sts;
    EmbeddingMatrix estimator_input;
    bool has_estimator_input = false;
    std::size_t source_dim = 0;
};

void note_dim(std::size_t& dim, std::size_t cols) {
    if (dim == 0) {
        dim = cols;
    } else if (dim != cols) {
        throw ValidationError("all sweep inputs must share one source dimensionality");
    }
}

LoadedInputs load_inputs(const SweepConfig& c) {
    LoadedInputs in;
    for (const auto& e : c.classification) {
        in.classification.push_back(
            load_classification_bundle(e.train, e.train_labels, e.test, e.test_labels));
        note_dim(in.source_dim, in.classification.back().train.cols());
    }
    for (const auto& e : c.clustering) {
        in.clustering.push_back(load_clustering_bundle(e.points, e.labels));
        note_dim(in.source_dim, in.clustering.back().points.cols());
    }
    for (const auto& e : c.retrieval) {
        in.retrieval.push_back(load_retrieval_bundle(e.queries, e.passages, e.qrels));
        note_dim(in.source_dim, in.retrieval.back().queries.cols());
    }
    for (const auto& e : c.sts) {
        in.sts.push_back(load_sts_bundle(e.points, e.pairs));
        note_dim(in.source_dim, in.sts.back().points.cols());
    }
    if (!c.embeddings.empty()) {
        in.estimator_input = load_embeddings(c.embeddings);
        in.has_estimator_input = true;
        note_dim(in.source_dim, in.estimator_input.cols());
    }
    return in;
}

// Reduced view of one target's matrices; unreduced when no reducer given.
struct ReducedTarget {
    ClassificationBundle classification;
    ClusteringBundle clustering;
    RetrievalBundle retrieval;
    StsBundle sts;
    EmbeddingMatrix estimator_input;
};

EmbeddingMatrix wrap(Matrix m) {
    EmbeddingMatrix e;
    e.matrix = std::move(m);
    return e;
}

ReducedTarget reduce_target(const LoadedInputs& in, const Target& t,
                            const MethodSpec* method, std::size_t dim, std::uint64_t seed) {
    ReducedTarget out;
    auto make_reducer = [&](std::size_t target_dim) {
        Reducer r;
        r.kind = method->kind;
        r.target_dim = target_dim;
        r.seed = seed;
        r.task_id = t.name;
        r.n_neighbors = method->n_neighbors;
        return r;
    };
    switch (t.kind) {
        case TargetKind::kClassification: {
            const auto& b = in.classification[t.index];
            if (!method) {
                out.classification = b;
                break;
            }
            // One transform fit on train+test, sliced back apart; keeps
            // isomap batch-only and gives both splits a shared basis.
            EmbeddingMatrix joint = wrap(vconcat(b.train.matrix, b.test.matrix));
            const FittedReducer f = fit(make_reducer(dim), joint);
            const Matrix reduced = apply(f, joint).matrix;
            out.classification.train = wrap(take_rows(reduced, 0, b.train.rows()));
            out.classification.test = wrap(take_rows(reduced, b.train.rows(), b.test.rows()));
            out.classification.train_labels = b.train_labels;
            out.classification.test_labels = b.test_labels;
            break;
        }
        case TargetKind::kClustering: {
            const auto& b = in.clustering[t.index];
            out.clustering.gold_labels = b.gold_labels;
            if (!method) {
                out.clustering.points = b.points;
            } else {
                const FittedReducer f = fit(make_reducer(dim), b.points);
                out.clustering.points = apply(f, b.points);
            }
            break;
        }
        case TargetKind::kRetrieval: {
            const auto& b = in.retrieval[t.index];
            out.retrieval.qrels = b.qrels;
            if (!method) {
                out.retrieval.queries = b.queries;
                out.retrieval.passages = b.passages;
            } else {
                EmbeddingMatrix joint = wrap(vconcat(b.queries.matrix, b.passages.matrix));
                const FittedReducer f = fit(make_reducer(dim), joint);
                const Matrix reduced = apply(f, joint).matrix;
                out.retrieval.queries = wrap(take_rows(reduced, 0, b.queries.rows()));
                out.retrieval.passages =
                    wrap(take_rows(reduced, b.queries.rows(), b.passages.rows()));
            }
            break;
        }
        case TargetKind::kSts: {
            const auto& b = in.sts[t.index];
            out.sts.pairs = b.pairs;
            if (!method) {
                out.sts.points = b.points;
            } else {
                const FittedReducer f = fit(make_reducer(dim), b.points);
                out.sts.points = apply(f, b.points);
            }
            break;
        }
        case TargetKind::kTwoNn:
        case TargetKind::kIsoScore: {
            if (!method) {
                out.estimator_input = in.estimator_input;
            } else {
                const FittedReducer f = fit(make_reducer(dim), in.estimator_input);
                out.estimator_input = apply(f, in.estimator_input);
            }
            break;
        }
    }
    return out;
}

SweepRecord evaluate_cell(const SweepConfig& c, const LoadedInputs& in, const Target& t,
                          const MethodSpec* method, std::size_t dim) {
    SweepRecord rec;
    rec.method = method ? reducer_kind_name(method->kind) : "none";
    rec.dim = dim;
    rec.target = t.name;
    try {
        const ReducedTarget reduced = reduce_target(in, t, method, dim, c.seed);
        switch (t.kind) {
            case TargetKind::kClassification: {
                const TaskScore s = eval_classification(reduced.classification);
                rec.metric = s.metric;
                rec.value = s.value;
                rec.meta["n_items"] = s.n_items;
                break;
            }
            case TargetKind::kClustering: {
                const std::uint64_t seed = CounterRng::derive(c.seed, fnv1a64(t.name.c_str()));
                const TaskScore s = eval_clustering(reduced.clustering, seed);
                rec.metric = s.metric;
                rec.value = s.value;
                rec.meta["n_items"] = s.n_items;
                rec.meta["kmeans_seed"] = seed;
                rec.meta["kmeans_restarts"] = 10;
                break;
            }
            case TargetKind::kRetrieval: {
                const TaskScore s = eval_retrieval(reduced.retrieval);
                rec.metric = s.metric;
                rec.value = s.value;
                rec.meta["n_items"] = s.n_items;
                break;
            }
            case TargetKind::kSts: {
                const TaskScore s = eval_sts(reduced.sts);
                rec.metric = s.metric;
                rec.value = s.value;
                rec.meta["n_items"] = s.n_items;
                break;
            }
            case TargetKind::kTwoNn: {
                const IdEstimate e = twonn(reduced.estimator_input, c.twonn_discard);
                rec.metric = "twonn_id";
                rec.value = e.id;
                rec.meta["id_mle"] = e.id_mle;
                rec.meta["n_used"] = e.n_used;
                rec.meta["discard_fraction"] = e.discard_fraction;
                break;
            }
            case TargetKind::kIsoScore: {
                const IsotropyReport r = isoscore(reduced.estimator_input);
                rec.metric = "isoscore";
                rec.value = r.isoscore;
                rec.meta["defect"] = r.defect;
                rec.meta["raw_isoscore"] = r.raw_isoscore;
                break;
            }
        }
    } catch (const Error& e) {
        rec.is_error = true;
        rec.metric = "error";
        rec.value = std::numeric_limits<double>::quiet_NaN();
        rec.message = e.what();
    }
    return rec;
}

std::vector<std::size_t> default_dims(std::size_t d) {
    std::vector<std::size_t> dims;
    for (std::size_t p = 2; p < d; p *= 2) dims.push_back(p);
    dims.push_back(d);
    return dims;
}

}  // namespace

SweepReport run_sweep(const SweepConfig& c) {
    const LoadedInputs in = load_inputs(c);
    if (in.source_dim == 0) throw ValidationError("sweep config names no inputs");
    if ((c.run_twonn || c.run_isoscore) && !in.has_estimator_input) {
        throw ValidationError("estimators requested but no \"embeddings\" input given");
    }

    std::vector<Target> targets;
    for (std::size_t i = 0; i < in.classification.size(); ++i) {
        targets.push_back({TargetKind::kClassification,
                           "classification/" + c.classification[i].name, i});
    }
    for (std::size_t i = 0; i < in.clustering.size(); ++i) {
        targets.push_back({TargetKind::kClustering, "clustering/" + c.clustering[i].name, i});
    }
    for (std::size_t i = 0; i < in.retrieval.size(); ++i) {
        targets.push_back({TargetKind::kRetrieval, "retrieval/" + c.retrieval[i].name, i});
    }
    for (std::size_t i = 0; i < in.sts.size(); ++i) {
        targets.push_back({TargetKind::kSts, "sts/" + c.sts[i].name, i});
    }
    if (c.run_twonn) targets.push_back({TargetKind::kTwoNn, "twonn", 0});
    if (c.run_isoscore) targets.push_back({TargetKind::kIsoScore, "isoscore", 0});
    if (targets.empty()) throw ValidationError("sweep has no evaluation targets");

    SweepConfig cfg = c;
    if (cfg.dims.empty()) cfg.dims = default_dims(in.source_dim);
    if (!std::is_sorted(cfg.dims.begin(), cfg.dims.end()) ||
        std::adjacent_find(cfg.dims.begin(), cfg.dims.end()) != cfg.dims.end()) {
        throw ValidationError("dims must be strictly ascending");
    }
    if (cfg.dims.front() < 1 || cfg.dims.back() > in.source_dim) {
        throw ValidationError("dims must lie in [1, source dimension]");
    }
    if (cfg.methods.empty()) throw ValidationError("sweep config names no methods");

    // Cell jobs in final record order: baseline row per target first, then
    // (method, dim, target).
    struct Job {
        const MethodSpec* method;
        std::size_t dim;
        std::size_t target;
    };
    std::vector<Job> jobs;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        jobs.push_back({nullptr, in.source_dim, t});
    }
    for (const auto& m : cfg.methods) {
        for (std::size_t dim : cfg.dims) {
            for (std::size_t t = 0; t < targets.size(); ++t) {
                jobs.push_back({&m, dim, t});
            }
        }
    }

    std::vector<SweepRecord> records(jobs.size());
    const std::size_t n_workers = std::max<std::size_t>(1, cfg.threads);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const Job& job = jobs[i];
            records[i] = evaluate_cell(cfg, in, targets[job.target], job.method, job.dim);
        }
    };
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Macro-average rows per task family with more than one bundle; the
    // per-bundle rows stay since averaging weights are a free choice.
    auto append_macro = [&](TargetKind kind, const std::string& family) {
        std::size_t count = 0;
        for (const auto& t : targets) {
            if (t.kind == kind) ++count;
        }
        if (count < 2) return;
        std::vector<SweepRecord> extra;
        auto macro_of = [&](const std::string& method, std::size_t dim) {
            SweepRecord rec;
            rec.method = method;
            rec.dim = dim;
            rec.target = family + "/macro_avg";
            double total = 0.0;
            std::size_t used = 0;
            for (std::size_t i = 0; i < jobs.size(); ++i) {
                if (targets[jobs[i].target].kind != kind) continue;
                if (records[i].method != method || records[i].dim != dim) continue;
                if (records[i].is_error) continue;
                total += records[i].value;
                rec.metric = records[i].metric;
                ++used;
            }
            if (used == 0) {
                rec.is_error = true;
                rec.metric = "error";
                rec.value = std::numeric_limits<double>::quiet_NaN();
                rec.message = "all cells failed";
            } else {
                rec.value = total / static_cast<double>(used);
                rec.meta["n_bundles"] = used;
            }
            return rec;
        };
        extra.push_back(macro_of("none", in.source_dim));
        for (const auto& m : cfg.methods) {
            for (std::size_t dim : cfg.dims) {
                extra.push_back(macro_of(reducer_kind_name(m.kind), dim));
            }
        }
        records.insert(records.end(), extra.begin(), extra.end());
    };
    append_macro(TargetKind::kClassification, "classification");
    append_macro(TargetKind::kClustering, "clustering");
    append_macro(TargetKind::kRetrieval, "retrieval");
    append_macro(TargetKind::kSts, "sts");

    SweepReport report;
    report.config = sweep_config_to_json(cfg);
    report.records = std::move(records);
    return report;
}

std::string report_to_json(const SweepReport& r) {
    json records = json::array();
    for (const auto& rec : r.records) {
        json obj{{"method", rec.method},
                 {"dim", rec.dim},
                 {"target", rec.target},
                 {"metric", rec.metric},
                 {"meta", rec.meta}};
        if (rec.is_error) {
            obj["value"] = nullptr;
            obj["message"] = rec.message;
        } else {
            obj["value"] = rec.value;
        }
        records.push_back(obj);
    }
    json out{{"version", r.version}, {"config", r.config}, {"records", records}};
    return out.dump(2) + "\n";
}

std::string report_to_csv(const SweepReport& r) {
    std::ostringstream os;
    os << "method,dim,target,metric,value\n";
    char buf[64];
    for (const auto& rec : r.records) {
        if (rec.is_error) {
            std::snprintf(buf, sizeof(buf), "nan");
        } else {
            std::snprintf(buf, sizeof(buf), "%.17g", rec.value);
        }
        os << rec.method << "," << rec.dim << "," << rec.target << "," << rec.metric << ","
           << buf << "\n";
    }
    return os.str();
}

void emit_report(const SweepReport& r, ReportFormat format, const std::string& path) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << (format == ReportFormat::kJson ? report_to_json(r) : report_to_csv(r));
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace embkit
