#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "embkit/matrix.hpp"

namespace embkit {

enum class PromptType : std::uint8_t {
    kClassification = 0,
    kClustering = 1,
    kRetrievalQuery = 2,
    kRetrievalPassage = 3,
    kSts = 4,
    kNone = 5,
};

const char* prompt_type_name(PromptType t);
PromptType prompt_type_from_name(const std::string& name);

struct EmbeddingMatrix {
    Matrix matrix;
    PromptType prompt_type = PromptType::kNone;
    std::string source_tag;

    std::size_t rows() const { return matrix.rows(); }
    std::size_t cols() const { return matrix.cols(); }
};

struct ClassificationBundle {
    EmbeddingMatrix train;
    std::vector<std::string> train_labels;
    EmbeddingMatrix test;
    std::vector<std::string> test_labels;
};

struct ClusteringBundle {
    EmbeddingMatrix points;
    std::vector<std::string> gold_labels;
};

struct Qrel {
    std::size_t query;
    std::size_t passage;
    int relevance;
};

struct RetrievalBundle {
    EmbeddingMatrix queries;
    EmbeddingMatrix passages;
    std::vector<Qrel> qrels;
};

struct StsPair {
    std::size_t a;
    std::size_t b;
    double gold_score;
};

struct StsBundle {
    EmbeddingMatrix points;
    std::vector<StsPair> pairs;
};

// EMB1 binary container: "EMB1", version u8=1, prompt_type u8, reserved
// u16=0, n_rows u32 LE, n_cols u32 LE, then float32 LE row-major.
EmbeddingMatrix load_embeddings(const std::string& path);
void save_embeddings(const EmbeddingMatrix& x, const std::string& path);

// JSONL sidecars: {"row":i,"label":s} / {"query":q,"passage":p,"rel":r} /
// {"a":i,"b":j,"score":x}. Validation failures name the offending line.
std::vector<std::string> load_labels(const std::string& path, std::size_t expected_rows);
std::vector<Qrel> load_qrels(const std::string& path, std::size_t n_queries, std::size_t n_passages);
std::vector<StsPair> load_sts_pairs(const std::string& path, std::size_t n_rows);

ClassificationBundle load_classification_bundle(const std::string& train_emb,
                                                const std::string& train_labels,
                                                const std::string& test_emb,
                                                const std::string& test_labels);
ClusteringBundle load_clustering_bundle(const std::string& emb, const std::string& labels);
RetrievalBundle load_retrieval_bundle(const std::string& queries_emb,
                                      const std::string& passages_emb,
                                      const std::string& qrels);
StsBundle load_sts_bundle(const std::string& emb, const std::string& pairs);

void save_labels(const std::vector<std::string>& labels, const std::string& path);
void save_qrels(const std::vector<Qrel>& qrels, const std::string& path);
void save_sts_pairs(const std::vector<StsPair>& pairs, const std::string& path);

// Invariant checks shared by loaders and generators.
void validate_classification(const ClassificationBundle& b);
void validate_clustering(const ClusteringBundle& b);
void validate_retrieval(const RetrievalBundle& b);
void validate_sts(const StsBundle& b);

}  // namespace embkit
