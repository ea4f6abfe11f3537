#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "embkit/dataset.hpp"
#include "embkit/reducers.hpp"

namespace embkit {

inline constexpr const char* kToolkitVersion = "0.1.0";

struct MethodSpec {
    ReducerKind kind = ReducerKind::kFirst;
    std::size_t n_neighbors = 15;
};

struct ClassificationPaths {
    std::string name, train, train_labels, test, test_labels;
};
struct ClusteringPaths {
    std::string name, points, labels;
};
struct RetrievalPaths {
    std::string name, queries, passages, qrels;
};
struct StsPaths {
    std::string name, points, pairs;
};

struct SweepConfig {
    std::uint64_t seed = 0;
    std::vector<std::size_t> dims;  // empty = default grid (powers of two up to D, plus D)
    std::vector<MethodSpec> methods;
    bool run_twonn = false;
    bool run_isoscore = false;
    double twonn_discard = 0.10;
    std::string embeddings;  // estimator input, EMB1
    std::vector<ClassificationPaths> classification;
    std::vector<ClusteringPaths> clustering;
    std::vector<RetrievalPaths> retrieval;
    std::vector<StsPaths> sts;
    std::size_t threads = 1;
};

SweepConfig parse_sweep_config(const nlohmann::json& j);
nlohmann::json sweep_config_to_json(const SweepConfig& c);

struct SweepRecord {
    std::string method;  // "none" for the unreduced baseline
    std::size_t dim = 0;
    std::string target;
    std::string metric;
    double value = 0.0;
    bool is_error = false;
    std::string message;
    nlohmann::json meta = nlohmann::json::object();
};

struct SweepReport {
    std::string version = kToolkitVersion;
    nlohmann::json config;
    std::vector<SweepRecord> records;
};

SweepReport run_sweep(const SweepConfig& c);

enum class ReportFormat { kJson, kCsv };
void emit_report(const SweepReport& r, ReportFormat format, const std::string& path);
std::string report_to_json(const SweepReport& r);
std::string report_to_csv(const SweepReport& r);

}  // namespace embkit
