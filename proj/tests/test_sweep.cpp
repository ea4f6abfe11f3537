#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "embkit/sweep.hpp"
#include "embkit/synthgen.hpp"
#include "embkit/taskeval.hpp"

using namespace embkit;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

// Writes a self-consistent corpus (one bundle per family, D=8) under a
// fresh temp directory and returns a config pointing at it.
struct Fixture {
    fs::path dir;
    SweepConfig config;

    explicit Fixture(const std::string& tag) {
        dir = fs::temp_directory_path() / ("embkit_sweep_" + tag);
        fs::remove_all(dir);
        fs::create_directories(dir);

        const BlobBundles blobs = gen_labeled_blobs(3, 8, 30, 9.0, 5);
        save_embeddings(blobs.classification.train, (dir / "cls_train.emb").string());
        save_labels(blobs.classification.train_labels, (dir / "cls_train.jsonl").string());
        save_embeddings(blobs.classification.test, (dir / "cls_test.emb").string());
        save_labels(blobs.classification.test_labels, (dir / "cls_test.jsonl").string());
        save_embeddings(blobs.clustering.points, (dir / "clu.emb").string());
        save_labels(blobs.clustering.gold_labels, (dir / "clu.jsonl").string());

        const RetrievalBundle ret = gen_retrieval_planted(10, 60, 8, 0.2, 7);
        save_embeddings(ret.queries, (dir / "ret_q.emb").string());
        save_embeddings(ret.passages, (dir / "ret_p.emb").string());
        save_qrels(ret.qrels, (dir / "ret_qrels.jsonl").string());

        const StsBundle sts = gen_sts_planted(30, 8, 0.3, 9);
        save_embeddings(sts.points, (dir / "sts.emb").string());
        save_sts_pairs(sts.pairs, (dir / "sts.jsonl").string());

        const EmbeddingMatrix est = gen_uniform_manifold(3, 8, 400, 11);
        save_embeddings(est, (dir / "est.emb").string());

        config.seed = 42;
        config.dims = {2, 4, 8};
        config.methods = {MethodSpec{ReducerKind::kFirst},
                          MethodSpec{ReducerKind::kRandom},
                          MethodSpec{ReducerKind::kPca}};
        config.run_twonn = true;
        config.run_isoscore = true;
        config.embeddings = (dir / "est.emb").string();
        config.classification = {{"blobs", (dir / "cls_train.emb").string(),
                                  (dir / "cls_train.jsonl").string(),
                                  (dir / "cls_test.emb").string(),
                                  (dir / "cls_test.jsonl").string()}};
        config.clustering = {{"blobs", (dir / "clu.emb").string(),
                              (dir / "clu.jsonl").string()}};
        config.retrieval = {{"planted", (dir / "ret_q.emb").string(),
                             (dir / "ret_p.emb").string(),
                             (dir / "ret_qrels.jsonl").string()}};
        config.sts = {{"planted", (dir / "sts.emb").string(), (dir / "sts.jsonl").string()}};
    }

    ~Fixture() { fs::remove_all(dir); }
};

const SweepRecord* find_record(const SweepReport& r, const std::string& method,
                               std::size_t dim, const std::string& target) {
    for (const auto& rec : r.records) {
        if (rec.method == method && rec.dim == dim && rec.target == target) return &rec;
    }
    return nullptr;
}

}  // namespace

TEST_CASE("full-width reduction rows match the unreduced baseline exactly") {
    Fixture fx("fullwidth");
    SweepConfig c = fx.config;
    c.dims = {8};
    c.methods = {MethodSpec{ReducerKind::kFirst}};
    const SweepReport r = run_sweep(c);
    for (const std::string target : {"classification/blobs", "clustering/blobs",
                                     "retrieval/planted", "sts/planted", "twonn", "isoscore"}) {
        const SweepRecord* base = find_record(r, "none", 8, target);
        const SweepRecord* reduced = find_record(r, "first", 8, target);
        REQUIRE(base != nullptr);
        REQUIRE(reduced != nullptr);
        CHECK_FALSE(base->is_error);
        CHECK(reduced->value == base->value);
        CHECK(reduced->metric == base->metric);
    }
}

TEST_CASE("reports are byte-identical across thread counts and reruns") {
    Fixture fx("threads");
    SweepConfig one = fx.config;
    one.threads = 1;
    SweepConfig four = fx.config;
    four.threads = 4;

    const std::string a = report_to_json(run_sweep(one));
    const std::string b = report_to_json(run_sweep(four));
    const std::string c = report_to_json(run_sweep(four));
    // The config echo records the thread count nowhere, so the whole
    // serialized report must agree byte for byte.
    CHECK(a == b);
    CHECK(b == c);
    CHECK(report_to_csv(run_sweep(one)) == report_to_csv(run_sweep(four)));
}

TEST_CASE("record set is complete") {
    Fixture fx("complete");
    const SweepReport r = run_sweep(fx.config);
    // 6 targets x (1 baseline + 3 methods x 3 dims) = 60 rows; one bundle
    // per family means no macro-average rows.
    CHECK(r.records.size() == 60);
    for (const auto& rec : r.records) {
        CHECK_FALSE(rec.is_error);
        CHECK(rec.message.empty());
    }
    CHECK(find_record(r, "pca", 4, "twonn") != nullptr);
    CHECK(find_record(r, "random", 2, "retrieval/planted") != nullptr);
}

TEST_CASE("macro-average rows appear once a family has two bundles") {
    Fixture fx("macro");
    SweepConfig c = fx.config;
    c.sts.push_back({"planted_again", c.sts[0].points, c.sts[0].pairs});
    c.methods = {MethodSpec{ReducerKind::kFirst}};
    c.dims = {2, 8};
    const SweepReport r = run_sweep(c);
    const SweepRecord* macro = find_record(r, "first", 2, "sts/macro_avg");
    REQUIRE(macro != nullptr);
    const SweepRecord* a = find_record(r, "first", 2, "sts/planted");
    const SweepRecord* b = find_record(r, "first", 2, "sts/planted_again");
    CHECK(macro->value == doctest::Approx((a->value + b->value) / 2.0).epsilon(1e-15));
    CHECK(macro->meta.at("n_bundles") == 2);
    CHECK(find_record(r, "none", 8, "sts/macro_avg") != nullptr);
    CHECK(find_record(r, "first", 2, "classification/macro_avg") == nullptr);
}

TEST_CASE("sweep cells reproduce a direct single-cell computation") {
    Fixture fx("cellcheck");
    const SweepReport r = run_sweep(fx.config);

    // Recompute the first-4 sts cell by hand from the files on disk.
    StsBundle b = load_sts_bundle(fx.config.sts[0].points, fx.config.sts[0].pairs);
    Reducer red;
    red.kind = ReducerKind::kFirst;
    red.target_dim = 4;
    red.seed = fx.config.seed;
    red.task_id = "sts/planted";
    b.points = apply(fit(red, b.points), b.points);
    const double direct = eval_sts(b).value;
    const SweepRecord* cell = find_record(r, "first", 4, "sts/planted");
    REQUIRE(cell != nullptr);
    CHECK(cell->value == direct);
}

TEST_CASE("json and csv carry the same record tuples") {
    Fixture fx("formats");
    SweepConfig c = fx.config;
    c.methods = {MethodSpec{ReducerKind::kFirst}, MethodSpec{ReducerKind::kPca}};
    const SweepReport r = run_sweep(c);

    const json parsed = json::parse(report_to_json(r));
    CHECK(parsed.at("version") == kToolkitVersion);
    CHECK(parsed.at("config").at("seed") == 42);
    const auto& records = parsed.at("records");
    REQUIRE(records.size() == r.records.size());

    std::istringstream csv(report_to_csv(r));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "method,dim,target,metric,value");
    for (std::size_t i = 0; i < r.records.size(); ++i) {
        REQUIRE(std::getline(csv, line));
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", records[i].at("value").get<double>());
        const std::string expected = records[i].at("method").get<std::string>() + "," +
                                     std::to_string(records[i].at("dim").get<std::size_t>()) +
                                     "," + records[i].at("target").get<std::string>() + "," +
                                     records[i].at("metric").get<std::string>() + "," + buf;
        CHECK(line == expected);
    }
    CHECK_FALSE(std::getline(csv, line));
}

TEST_CASE("a failing cell is isolated as an error record") {
    Fixture fx("errors");
    SweepConfig c = fx.config;
    // Two far-apart clumps: the isomap neighbor graph disconnects, so every
    // isomap estimator cell fails while all other cells stay healthy.
    EmbeddingMatrix split;
    split.matrix = Matrix(60, 8);
    for (std::size_t i = 0; i < 60; ++i) {
        const double base = (i < 30) ? 0.0 : 1e6;
        for (std::size_t j = 0; j < 8; ++j) {
            split.matrix(i, j) = base + 0.001 * static_cast<double>(i * 8 + j);
        }
    }
    save_embeddings(split, (fx.dir / "split.emb").string());
    c.embeddings = (fx.dir / "split.emb").string();
    c.classification.clear();
    c.clustering.clear();
    c.retrieval.clear();
    c.sts.clear();
    c.run_isoscore = false;  // split input is rank-deficient on purpose
    c.methods = {MethodSpec{ReducerKind::kFirst}, MethodSpec{ReducerKind::kIsomap, 5}};
    c.dims = {2};

    const SweepReport r = run_sweep(c);
    const SweepRecord* bad = find_record(r, "isomap", 2, "twonn");
    REQUIRE(bad != nullptr);
    CHECK(bad->is_error);
    CHECK_FALSE(bad->message.empty());
    const SweepRecord* good = find_record(r, "first", 2, "twonn");
    REQUIRE(good != nullptr);
    CHECK_FALSE(good->is_error);

    // Error rows serialize as null values in JSON and nan in CSV.
    const json parsed = json::parse(report_to_json(r));
    bool saw_null = false;
    for (const auto& rec : parsed.at("records")) {
        if (rec.at("method") == "isomap") {
            CHECK(rec.at("value").is_null());
            CHECK(rec.contains("message"));
            saw_null = true;
        }
    }
    CHECK(saw_null);
    CHECK(report_to_csv(r).find(",nan") != std::string::npos);
}

TEST_CASE("config validation") {
    Fixture fx("validation");
    SweepConfig c = fx.config;
    c.dims = {4, 2};
    CHECK_THROWS_AS(run_sweep(c), ValidationError);
    c.dims = {2, 2};
    CHECK_THROWS_AS(run_sweep(c), ValidationError);
    c.dims = {2, 16};
    CHECK_THROWS_AS(run_sweep(c), ValidationError);
    c = fx.config;
    c.methods.clear();
    CHECK_THROWS_AS(run_sweep(c), ValidationError);
    c = fx.config;
    c.embeddings.clear();
    CHECK_THROWS_AS(run_sweep(c), ValidationError);
}

TEST_CASE("config round-trips through json") {
    Fixture fx("roundtrip");
    const json j = sweep_config_to_json(fx.config);
    const SweepConfig back = parse_sweep_config(j);
    CHECK(back.seed == fx.config.seed);
    CHECK(back.dims == fx.config.dims);
    CHECK(back.methods.size() == fx.config.methods.size());
    CHECK(back.run_twonn == fx.config.run_twonn);
    CHECK(back.run_isoscore == fx.config.run_isoscore);
    CHECK(back.embeddings == fx.config.embeddings);
    CHECK(back.classification[0].train == fx.config.classification[0].train);
    CHECK(back.sts[0].pairs == fx.config.sts[0].pairs);
    CHECK(sweep_config_to_json(back) == j);
}
