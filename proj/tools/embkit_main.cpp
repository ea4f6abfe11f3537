#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "embkit/dataset.hpp"
#include "embkit/intrinsic_dim.hpp"
#include "embkit/isotropy.hpp"
#include "embkit/reducers.hpp"
#include "embkit/sweep.hpp"
#include "embkit/synthgen.hpp"
#include "embkit/taskeval.hpp"

namespace {

using nlohmann::json;

std::size_t default_threads() {
    if (const char* env = std::getenv("EMBKIT_THREADS")) {
        const long v = std::atol(env);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

void print_score(const embkit::TaskScore& s) {
    json out{{"task", s.task}, {"metric", s.metric}, {"value", s.value}, {"n_items", s.n_items}};
    std::cout << out.dump() << "\n";
}

int run(int argc, char** argv) {
    CLI::App app{"embkit: dimensionality-redundancy analysis of embedding matrices"};
    app.require_subcommand(1);
    std::size_t threads = default_threads();
    app.add_option("--threads", threads, "worker threads (results are independent of this)");

    // reduce
    auto* reduce_cmd = app.add_subcommand("reduce", "apply a dimensionality reduction");
    std::string r_method = "first", r_input, r_output, r_task_id;
    std::size_t r_dim = 0, r_neighbors = 15;
    std::uint64_t r_seed = 0;
    reduce_cmd->add_option("--method", r_method, "first|random|pca|isomap");
    reduce_cmd->add_option("--dim", r_dim, "target dimension")->required();
    reduce_cmd->add_option("--seed", r_seed, "seed (random method)");
    reduce_cmd->add_option("--task-id", r_task_id, "task identifier (random method)");
    reduce_cmd->add_option("--neighbors", r_neighbors, "neighbor count (isomap)");
    reduce_cmd->add_option("--input", r_input)->required();
    reduce_cmd->add_option("--output", r_output)->required();

    // id
    auto* id_cmd = app.add_subcommand("id", "TwoNN intrinsic dimension estimate");
    std::string id_input;
    double id_discard = 0.10;
    id_cmd->add_option("--input", id_input)->required();
    id_cmd->add_option("--discard-fraction", id_discard, "top ratio fraction dropped from the fit");

    // isoscore
    auto* iso_cmd = app.add_subcommand("isoscore", "isotropy score of an embedding matrix");
    std::string iso_input;
    iso_cmd->add_option("--input", iso_input)->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "run one task evaluation");
    eval_cmd->require_subcommand(1);
    std::string e_train, e_train_labels, e_test, e_test_labels;
    auto* eval_cls = eval_cmd->add_subcommand("classification");
    eval_cls->add_option("--train", e_train)->required();
    eval_cls->add_option("--train-labels", e_train_labels)->required();
    eval_cls->add_option("--test", e_test)->required();
    eval_cls->add_option("--test-labels", e_test_labels)->required();
    std::string e_points, e_labels;
    std::uint64_t e_seed = 0;
    auto* eval_clu = eval_cmd->add_subcommand("clustering");
    eval_clu->add_option("--points", e_points)->required();
    eval_clu->add_option("--labels", e_labels)->required();
    eval_clu->add_option("--seed", e_seed);
    std::string e_queries, e_passages, e_qrels;
    auto* eval_ret = eval_cmd->add_subcommand("retrieval");
    eval_ret->add_option("--queries", e_queries)->required();
    eval_ret->add_option("--passages", e_passages)->required();
    eval_ret->add_option("--qrels", e_qrels)->required();
    std::string e_sts_points, e_pairs;
    auto* eval_sts_cmd = eval_cmd->add_subcommand("sts");
    eval_sts_cmd->add_option("--points", e_sts_points)->required();
    eval_sts_cmd->add_option("--pairs", e_pairs)->required();

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic fixture");
    std::string s_kind, s_out;
    std::size_t s_d = 2, s_D = 8, s_N = 1000, s_classes = 3, s_per_class = 100;
    std::size_t s_nq = 50, s_npass = 200, s_npairs = 100;
    double s_separation = 10.0, s_noise = 0.0;
    std::vector<double> s_spectrum;
    std::uint64_t s_seed = 0;
    synth_cmd->add_option("--kind", s_kind, "uniform_manifold|gaussian_spectrum|blobs|retrieval|sts")
        ->required();
    synth_cmd->add_option("--out", s_out, "output file (matrix kinds) or directory (bundles)")
        ->required();
    synth_cmd->add_option("--intrinsic-dim", s_d);
    synth_cmd->add_option("--ambient-dim", s_D);
    synth_cmd->add_option("--n", s_N);
    synth_cmd->add_option("--classes", s_classes);
    synth_cmd->add_option("--per-class", s_per_class);
    synth_cmd->add_option("--separation", s_separation);
    synth_cmd->add_option("--noise", s_noise);
    synth_cmd->add_option("--queries", s_nq);
    synth_cmd->add_option("--passages", s_npass);
    synth_cmd->add_option("--pairs", s_npairs);
    synth_cmd->add_option("--spectrum", s_spectrum, "diagonal covariance entries");
    synth_cmd->add_option("--seed", s_seed);

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "run a reduction/evaluation grid");
    std::string sw_config, sw_output, sw_format = "json";
    bool sw_seed_set = false;
    std::uint64_t sw_seed = 0;
    sweep_cmd->add_option("--config", sw_config, "JSON sweep config")->required();
    sweep_cmd->add_option("--output", sw_output, "report path (overrides config)");
    sweep_cmd->add_option("--format", sw_format, "json|csv");
    sweep_cmd->add_option("--seed", sw_seed)->each([&](const std::string&) { sw_seed_set = true; });

    // validate
    auto* val_cmd = app.add_subcommand("validate", "check an input file");
    std::string v_input;
    val_cmd->add_option("--input", v_input)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help
        }
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    if (*reduce_cmd) {
        embkit::Reducer r;
        r.kind = embkit::reducer_kind_from_name(r_method);
        r.target_dim = r_dim;
        r.seed = r_seed;
        r.task_id = r_task_id;
        r.n_neighbors = r_neighbors;
        const auto x = embkit::load_embeddings(r_input);
        const auto fitted = embkit::fit(r, x);
        embkit::save_embeddings(embkit::apply(fitted, x), r_output);
        return 0;
    }
    if (*id_cmd) {
        const auto x = embkit::load_embeddings(id_input);
        const auto e = embkit::twonn(x, id_discard);
        json out{{"id", e.id},
                 {"id_mle", e.id_mle},
                 {"n_used", e.n_used},
                 {"discard_fraction", e.discard_fraction}};
        std::cout << out.dump() << "\n";
        return 0;
    }
    if (*iso_cmd) {
        const auto x = embkit::load_embeddings(iso_input);
        const auto r = embkit::isoscore(x);
        json out{{"isoscore", r.isoscore},
                 {"defect", r.defect},
                 {"raw_isoscore", r.raw_isoscore},
                 {"n_dims", r.n_dims},
                 {"n_points", r.n_points}};
        std::cout << out.dump() << "\n";
        return 0;
    }
    if (*eval_cmd) {
        if (*eval_cls) {
            print_score(embkit::eval_classification(
                embkit::load_classification_bundle(e_train, e_train_labels, e_test, e_test_labels)));
        } else if (*eval_clu) {
            print_score(embkit::eval_clustering(
                embkit::load_clustering_bundle(e_points, e_labels), e_seed));
        } else if (*eval_ret) {
            print_score(embkit::eval_retrieval(
                embkit::load_retrieval_bundle(e_queries, e_passages, e_qrels)));
        } else {
            print_score(embkit::eval_sts(embkit::load_sts_bundle(e_sts_points, e_pairs)));
        }
        return 0;
    }
    if (*synth_cmd) {
        if (s_kind == "uniform_manifold") {
            embkit::save_embeddings(embkit::gen_uniform_manifold(s_d, s_D, s_N, s_seed), s_out);
        } else if (s_kind == "gaussian_spectrum") {
            if (s_spectrum.empty()) {
                throw embkit::InvalidParameterError("gaussian_spectrum needs --spectrum");
            }
            embkit::save_embeddings(embkit::gen_gaussian_spectrum(s_spectrum, s_N, s_seed), s_out);
        } else if (s_kind == "blobs") {
            const auto b = embkit::gen_labeled_blobs(s_classes, s_D, s_per_class, s_separation, s_seed);
            embkit::save_embeddings(b.classification.train, s_out + "/train.emb");
            embkit::save_labels(b.classification.train_labels, s_out + "/train_labels.jsonl");
            embkit::save_embeddings(b.classification.test, s_out + "/test.emb");
            embkit::save_labels(b.classification.test_labels, s_out + "/test_labels.jsonl");
            embkit::save_embeddings(b.clustering.points, s_out + "/points.emb");
            embkit::save_labels(b.clustering.gold_labels, s_out + "/labels.jsonl");
        } else if (s_kind == "retrieval") {
            const auto b = embkit::gen_retrieval_planted(s_nq, s_npass, s_D, s_noise, s_seed);
            embkit::save_embeddings(b.queries, s_out + "/queries.emb");
            embkit::save_embeddings(b.passages, s_out + "/passages.emb");
            embkit::save_qrels(b.qrels, s_out + "/qrels.jsonl");
        } else if (s_kind == "sts") {
            const auto b = embkit::gen_sts_planted(s_npairs, s_D, s_noise, s_seed);
            embkit::save_embeddings(b.points, s_out + "/points.emb");
            embkit::save_sts_pairs(b.pairs, s_out + "/pairs.jsonl");
        } else {
            throw embkit::InvalidParameterError("unknown synth kind: " + s_kind);
        }
        return 0;
    }
    if (*sweep_cmd) {
        std::ifstream in(sw_config);
        if (!in) throw embkit::IoError("cannot open " + sw_config);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw embkit::FormatError(sw_config + ": " + e.what());
        }
        embkit::SweepConfig cfg = embkit::parse_sweep_config(j);
        if (sw_seed_set) cfg.seed = sw_seed;
        cfg.threads = threads;
        std::string output = sw_output;
        if (output.empty() && j.contains("output")) output = j.at("output").get<std::string>();
        if (output.empty()) throw embkit::InvalidParameterError("no report output path given");
        embkit::ReportFormat format;
        if (sw_format == "json") {
            format = embkit::ReportFormat::kJson;
        } else if (sw_format == "csv") {
            format = embkit::ReportFormat::kCsv;
        } else {
            throw embkit::InvalidParameterError("unknown format: " + sw_format);
        }
        const embkit::SweepReport report = embkit::run_sweep(cfg);
        embkit::emit_report(report, format, output);
        std::size_t errors = 0;
        for (const auto& r : report.records) errors += r.is_error ? 1 : 0;
        std::cerr << "sweep: " << report.records.size() << " records (" << errors
                  << " errors) -> " << output << "\n";
        return 0;
    }
    if (*val_cmd) {
        if (v_input.size() >= 4 && v_input.substr(v_input.size() - 4) == ".emb") {
            const auto x = embkit::load_embeddings(v_input);
            std::cout << "ok: " << x.rows() << "x" << x.cols() << " matrix, prompt_type "
                      << embkit::prompt_type_name(x.prompt_type) << "\n";
        } else {
            std::ifstream in(v_input);
            if (!in) throw embkit::IoError("cannot open " + v_input);
            std::string line;
            std::size_t lineno = 0;
            while (std::getline(in, line)) {
                ++lineno;
                if (line.empty()) continue;
                json obj;
                try {
                    obj = json::parse(line);
                } catch (const json::exception& e) {
                    throw embkit::FormatError(v_input + ":" + std::to_string(lineno) + ": " +
                                              e.what());
                }
                const bool label = obj.contains("row") && obj.contains("label");
                const bool qrel =
                    obj.contains("query") && obj.contains("passage") && obj.contains("rel");
                const bool pair = obj.contains("a") && obj.contains("b") && obj.contains("score");
                if (!label && !qrel && !pair) {
                    throw embkit::ValidationError(v_input + ":" + std::to_string(lineno) +
                                                  ": unrecognized sidecar object");
                }
            }
            std::cout << "ok: " << lineno << " lines\n";
        }
        return 0;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const embkit::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
