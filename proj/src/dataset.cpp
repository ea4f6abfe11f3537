#include "embkit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace embkit {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};
constexpr std::size_t kHeaderSize = 4 + 1 + 1 + 2 + 4 + 4;

std::uint32_t read_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32_le(std::ostream& os, std::uint32_t v) {
    unsigned char buf[4] = {
        static_cast<unsigned char>(v & 0xff),
        static_cast<unsigned char>((v >> 8) & 0xff),
        static_cast<unsigned char>((v >> 16) & 0xff),
        static_cast<unsigned char>((v >> 24) & 0xff),
    };
    os.write(reinterpret_cast<const char*>(buf), 4);
}

[[noreturn]] void format_error(const std::string& path, std::size_t offset, const std::string& what) {
    std::ostringstream os;
    os << path << ": " << what << " at byte offset " << offset;
    throw FormatError(os.str());
}

}  // namespace

const char* prompt_type_name(PromptType t) {
    switch (t) {
        case PromptType::kClassification: return "classification";
        case PromptType::kClustering: return "clustering";
        case PromptType::kRetrievalQuery: return "retrieval_query";
        case PromptType::kRetrievalPassage: return "retrieval_passage";
        case PromptType::kSts: return "sts";
        case PromptType::kNone: return "none";
    }
    throw ContractViolationError("unknown prompt type");
}

PromptType prompt_type_from_name(const std::string& name) {
    for (int i = 0; i <= 5; ++i) {
        const PromptType t = static_cast<PromptType>(i);
        if (name == prompt_type_name(t)) return t;
    }
    throw InvalidParameterError("unknown prompt type: " + name);
}

EmbeddingMatrix load_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < kHeaderSize) format_error(path, bytes.size(), "truncated header");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) format_error(path, 0, "bad magic");
    if (bytes[4] != 1) format_error(path, 4, "unsupported format version");
    if (bytes[5] > 5) format_error(path, 5, "invalid prompt_type");
    if (bytes[6] != 0 || bytes[7] != 0) format_error(path, 6, "nonzero reserved field");

    const std::uint32_t n_rows = read_u32_le(bytes.data() + 8);
    const std::uint32_t n_cols = read_u32_le(bytes.data() + 12);
    if (n_rows == 0 || n_cols == 0) format_error(path, 8, "zero rows or cols");

    const std::size_t expected = kHeaderSize + 4ull * n_rows * n_cols;
    if (bytes.size() < expected) {
        format_error(path, bytes.size(), "truncated payload");
    }
    if (bytes.size() > expected) {
        format_error(path, expected, "trailing bytes after payload");
    }

    EmbeddingMatrix result;
    result.prompt_type = static_cast<PromptType>(bytes[5]);
    result.source_tag = path;
    result.matrix = Matrix(n_rows, n_cols);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n_rows) * n_cols; ++i) {
        const std::size_t offset = kHeaderSize + 4 * i;
        std::uint32_t raw = read_u32_le(bytes.data() + offset);
        float f;
        std::memcpy(&f, &raw, 4);
        if (!std::isfinite(f)) format_error(path, offset, "non-finite value");
        result.matrix.data()[i] = static_cast<double>(f);
    }
    return result;
}

void save_embeddings(const EmbeddingMatrix& x, const std::string& path) {
    if (x.rows() == 0 || x.cols() == 0) {
        throw DegenerateInputError("refusing to write empty embedding matrix");
    }
    x.matrix.check_finite();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(kMagic, 4);
    const unsigned char version = 1;
    const unsigned char prompt = static_cast<unsigned char>(x.prompt_type);
    const unsigned char reserved[2] = {0, 0};
    out.write(reinterpret_cast<const char*>(&version), 1);
    out.write(reinterpret_cast<const char*>(&prompt), 1);
    out.write(reinterpret_cast<const char*>(reserved), 2);
    write_u32_le(out, static_cast<std::uint32_t>(x.rows()));
    write_u32_le(out, static_cast<std::uint32_t>(x.cols()));
    for (double v : x.matrix.data()) {
        const float f = static_cast<float>(v);
        std::uint32_t raw;
        std::memcpy(&raw, &f, 4);
        write_u32_le(out, raw);
    }
    if (!out) throw IoError("write failed: " + path);
}

namespace {

using nlohmann::json;

// Parses each non-empty line as a JSON object, passing it to `handler`
// with its 1-based line number.
template <typename Handler>
void for_each_jsonl(const std::string& path, Handler&& handler) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            std::ostringstream os;
            os << path << ":" << lineno << ": invalid JSON (" << e.what() << ")";
            throw FormatError(os.str());
        }
        handler(obj, lineno);
    }
}

[[noreturn]] void line_error(const std::string& path, std::size_t lineno, const std::string& what) {
    std::ostringstream os;
    os << path << ":" << lineno << ": " << what;
    throw ValidationError(os.str());
}

}  // namespace

std::vector<std::string> load_labels(const std::string& path, std::size_t expected_rows) {
    std::vector<std::string> labels(expected_rows);
    std::vector<bool> seen(expected_rows, false);
    for_each_jsonl(path, [&](const json& obj, std::size_t lineno) {
        if (!obj.contains("row") || !obj.contains("label")) {
            line_error(path, lineno, "label object needs \"row\" and \"label\"");
        }
        const auto row = obj.at("row").get<std::int64_t>();
        if (row < 0 || static_cast<std::size_t>(row) >= expected_rows) {
            line_error(path, lineno, "row index out of range");
        }
        if (seen[row]) line_error(path, lineno, "duplicate label for row");
        seen[row] = true;
        labels[row] = obj.at("label").get<std::string>();
    });
    for (std::size_t i = 0; i < expected_rows; ++i) {
        if (!seen[i]) {
            std::ostringstream os;
            os << path << ": missing label for row " << i;
            throw ValidationError(os.str());
        }
    }
    return labels;
}

std::vector<Qrel> load_qrels(const std::string& path, std::size_t n_queries, std::size_t n_passages) {
    std::vector<Qrel> qrels;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for_each_jsonl(path, [&](const json& obj, std::size_t lineno) {
        if (!obj.contains("query") || !obj.contains("passage") || !obj.contains("rel")) {
            line_error(path, lineno, "qrel object needs \"query\", \"passage\", \"rel\"");
        }
        const auto q = obj.at("query").get<std::int64_t>();
        const auto p = obj.at("passage").get<std::int64_t>();
        const auto rel = obj.at("rel").get<int>();
        if (q < 0 || static_cast<std::size_t>(q) >= n_queries) {
            line_error(path, lineno, "query id out of range");
        }
        if (p < 0 || static_cast<std::size_t>(p) >= n_passages) {
            line_error(path, lineno, "passage id out of range");
        }
        if (rel < 0) line_error(path, lineno, "negative relevance");
        if (!seen.emplace(q, p).second) {
            line_error(path, lineno, "duplicate (query, passage) judgment");
        }
        qrels.push_back(Qrel{static_cast<std::size_t>(q), static_cast<std::size_t>(p), rel});
    });
    return qrels;
}

std::vector<StsPair> load_sts_pairs(const std::string& path, std::size_t n_rows) {
    std::vector<StsPair> pairs;
    for_each_jsonl(path, [&](const json& obj, std::size_t lineno) {
        if (!obj.contains("a") || !obj.contains("b") || !obj.contains("score")) {
            line_error(path, lineno, "pair object needs \"a\", \"b\", \"score\"");
        }
        const auto a = obj.at("a").get<std::int64_t>();
        const auto b = obj.at("b").get<std::int64_t>();
        const double score = obj.at("score").get<double>();
        if (a < 0 || static_cast<std::size_t>(a) >= n_rows) line_error(path, lineno, "index a out of range");
        if (b < 0 || static_cast<std::size_t>(b) >= n_rows) line_error(path, lineno, "index b out of range");
        if (!std::isfinite(score)) line_error(path, lineno, "non-finite score");
        pairs.push_back(StsPair{static_cast<std::size_t>(a), static_cast<std::size_t>(b), score});
    });
    return pairs;
}

void validate_classification(const ClassificationBundle& b) {
    if (b.train_labels.size() != b.train.rows()) {
        throw ValidationError("train label count does not match train rows");
    }
    if (b.test_labels.size() != b.test.rows()) {
        throw ValidationError("test label count does not match test rows");
    }
    if (b.train.cols() != b.test.cols()) {
        throw ValidationError("train/test dimension mismatch");
    }
    std::unordered_set<std::string> train_set(b.train_labels.begin(), b.train_labels.end());
    for (const auto& label : b.test_labels) {
        if (!train_set.contains(label)) {
            throw ValidationError("test label \"" + label + "\" absent from train set");
        }
    }
}

void validate_clustering(const ClusteringBundle& b) {
    if (b.gold_labels.size() != b.points.rows()) {
        throw ValidationError("label count does not match point rows");
    }
    std::unordered_set<std::string> distinct(b.gold_labels.begin(), b.gold_labels.end());
    if (distinct.size() < 2) {
        throw ValidationError("clustering bundle needs at least 2 distinct labels");
    }
}

void validate_retrieval(const RetrievalBundle& b) {
    if (b.queries.cols() != b.passages.cols()) {
        throw ValidationError("query/passage dimension mismatch");
    }
    std::vector<bool> judged(b.queries.rows(), false);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& q : b.qrels) {
        if (q.query >= b.queries.rows()) throw ValidationError("qrel query id out of range");
        if (q.passage >= b.passages.rows()) throw ValidationError("qrel passage id out of range");
        if (q.relevance < 0) throw ValidationError("negative relevance grade");
        if (!seen.emplace(q.query, q.passage).second) {
            throw ValidationError("duplicate (query, passage) judgment");
        }
        judged[q.query] = true;
    }
    for (std::size_t i = 0; i < judged.size(); ++i) {
        if (!judged[i]) {
            std::ostringstream os;
            os << "query " << i << " has no judged passage";
            throw ValidationError(os.str());
        }
    }
}

void validate_sts(const StsBundle& b) {
    if (b.pairs.size() < 3) {
        throw ValidationError("STS bundle needs at least 3 pairs");
    }
    for (const auto& p : b.pairs) {
        if (p.a >= b.points.rows() || p.b >= b.points.rows()) {
            throw ValidationError("STS pair index out of range");
        }
    }
}

ClassificationBundle load_classification_bundle(const std::string& train_emb,
                                                const std::string& train_labels,
                                                const std::string& test_emb,
                                                const std::string& test_labels) {
    ClassificationBundle b;
    b.train = load_embeddings(train_emb);
    b.test = load_embeddings(test_emb);
    b.train_labels = load_labels(train_labels, b.train.rows());
    b.test_labels = load_labels(test_labels, b.test.rows());
    validate_classification(b);
    return b;
}

ClusteringBundle load_clustering_bundle(const std::string& emb, const std::string& labels) {
    ClusteringBundle b;
    b.points = load_embeddings(emb);
    b.gold_labels = load_labels(labels, b.points.rows());
    validate_clustering(b);
    return b;
}

RetrievalBundle load_retrieval_bundle(const std::string& queries_emb,
                                      const std::string& passages_emb,
                                      const std::string& qrels) {
    RetrievalBundle b;
    b.queries = load_embeddings(queries_emb);
    b.passages = load_embeddings(passages_emb);
    b.qrels = load_qrels(qrels, b.queries.rows(), b.passages.rows());
    validate_retrieval(b);
    return b;
}

StsBundle load_sts_bundle(const std::string& emb, const std::string& pairs) {
    StsBundle b;
    b.points = load_embeddings(emb);
    b.pairs = load_sts_pairs(pairs, b.points.rows());
    validate_sts(b);
    return b;
}

namespace {

std::ofstream open_text(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    return out;
}

}  // namespace

void save_labels(const std::vector<std::string>& labels, const std::string& path) {
    auto out = open_text(path);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        json obj{{"row", i}, {"label", labels[i]}};
        out << obj.dump() << "\n";
    }
}

void save_qrels(const std::vector<Qrel>& qrels, const std::string& path) {
    auto out = open_text(path);
    for (const auto& q : qrels) {
        json obj{{"query", q.query}, {"passage", q.passage}, {"rel", q.relevance}};
        out << obj.dump() << "\n";
    }
}

void save_sts_pairs(const std::vector<StsPair>& pairs, const std::string& path) {
    auto out = open_text(path);
    for (const auto& p : pairs) {
        json obj{{"a", p.a}, {"b", p.b}, {"score", p.gold_score}};
        out << obj.dump() << "\n";
    }
}

}  // namespace embkit
