#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trilayer/corpus.hpp"
#include "trilayer/lda.hpp"
#include "trilayer/lexicon.hpp"
#include "trilayer/sgns.hpp"
#include "trilayer/weat.hpp"

namespace trilayer::pipeline {

// Full-run configuration, read from a flat key = value file. Relative
// paths resolve against the config file's directory.
struct RunConfig {
    std::string corpus_path;
    std::string lexicon_path;
    std::string stoplist_path;
    std::string lemma_path;
    std::string base_embedding_path;  // empty: train a pooled base model
    std::string weat_spec_path;       // empty: use the built-in specs
    lda::LdaConfig lda;
    sgns::SgnsConfig sgns;
    std::size_t fine_tune_epochs = 5;
    weat::OovPolicy weat_policy = weat::OovPolicy::balance;
    weat::TailMode weat_mode = weat::TailMode::gt;
    double language_threshold = 0.8;
    double significance_level = 0.05;
    std::size_t correlation_permutations = 10000;
    std::uint64_t seed = 0;
    std::string output_dir;

    // Input paths exist, numeric ranges are sane. ConfigError otherwise.
    void validate() const;
};

// Parses the key = value format ('#' comments, blank lines ignored).
// Unknown keys are ConfigErrors naming the key and line.
RunConfig load_run_config(const std::string& path);

// Five-number summary with 1.5-IQR whiskers; the labels are filled by the
// caller.
struct DistributionSummary {
    std::string group;
    std::string source;
    std::string metric;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double whisker_low = 0.0;
    double whisker_high = 0.0;
    std::vector<double> outliers;
    std::size_t n = 0;
};

// Quartiles by linear interpolation over the sorted values; whiskers at
// the most extreme points within 1.5 IQR of the quartiles; points beyond
// the fences are outliers. Empty input is a DataError.
DistributionSummary summarize_distribution(const std::vector<double>& values);

// ---------------------------------------------------------------------
// Report rows.

struct ExclusionRecord {
    std::string video_id;
    std::string source;
    std::string stage;   // preprocess | lexical | embedding
    std::string reason;  // language filter | empty after preprocessing |
                         // zero-category | all-OOV
};

struct ChannelVectorRow {
    std::string channel_id;
    std::string group;
    std::string source;
    std::size_t videos = 0;
    std::vector<double> means;  // lexicon category order
};

struct SimilarityRow {
    std::string video_id;
    std::string channel_id;
    std::string group;
    double value = 0.0;
};

struct ChannelSimilarityRow {
    std::string channel_id;
    std::string group;
    double mean_similarity = 0.0;
    std::size_t videos = 0;  // videos with both sides included
};

struct TopicEntry {
    std::size_t topic = 0;
    std::size_t dominant_documents = 0;
    std::vector<std::string> words;  // top 20
};

struct TopicClassSummary {
    std::string group;
    std::string source;
    std::size_t documents = 0;
    std::vector<TopicEntry> top_topics;  // best 2 by dominant-document count
};

struct WeatRow {
    std::string channel_id;
    std::string group;
    std::string source;
    std::string spec;
    std::size_t class_size = 0;
    double statistic = 0.0;
    double effect_size = 0.0;
    double p_value = 1.0;
    std::uint64_t partitions = 0;
    bool exact = true;
    std::string mode;  // gt | gte
    bool degenerate = false;
    bool significant = false;  // p < significance level
    std::vector<std::string> dropped_class1;
    std::vector<std::string> dropped_class2;
    std::vector<std::string> dropped_attrs;
};

struct WeatDifferenceRow {
    std::string channel_id;
    std::string group;
    std::string spec;
    // comments-side d minus caption-side d; set only when both sides are
    // significant.
    std::optional<double> difference;
    std::string note;  // why the difference is null
};

struct CoverageCounts {
    std::size_t channels = 0;
    std::size_t videos = 0;
    std::size_t documents = 0;
    std::size_t documents_preprocessed = 0;  // survived language + tokenize
    std::size_t documents_lexical = 0;       // contributed category vectors
    std::size_t documents_embedding = 0;     // contributed training tokens
};

struct Report {
    // meta
    std::uint64_t seed = 0;
    lda::LdaConfig lda;
    sgns::SgnsConfig sgns;
    std::size_t fine_tune_epochs = 0;
    std::string weat_policy;
    std::string weat_mode;
    double language_threshold = 0.8;
    double significance_level = 0.05;
    bool base_model_substituted = false;  // pooled base trained in-run
    std::string base_embedding_path;      // empty when substituted
    CoverageCounts coverage;
    std::vector<ExclusionRecord> exclusions;

    // lexical layer
    std::vector<std::string> categories;
    std::vector<ChannelVectorRow> channel_vectors;
    std::vector<DistributionSummary> category_summaries;
    std::vector<SimilarityRow> similarities;
    std::vector<DistributionSummary> similarity_summaries;
    std::vector<ChannelSimilarityRow> channel_similarities;
    std::vector<lexicon::CorrelationRow> correlations;

    // topic layer
    std::vector<TopicClassSummary> topics;

    // embedding layer
    std::vector<WeatRow> weat_rows;
    std::vector<WeatDifferenceRow> weat_differences;
    std::vector<DistributionSummary> weat_group_summaries;
};

// How far to run the pipeline.
enum class Stage {
    ingest,
    preprocess,
    lexical,
    topics,
    embeddings,
    report,  // everything
};

// Intermediate products kept alongside the report so CLI stages can
// persist them.
struct AnalysisArtifacts {
    Report report;
    std::vector<corpus::TokenDocument> tokens;  // included documents
    sgns::EmbeddingModel base;
    bool has_base = false;
    // name -> model; names are "<channel>_<source>" / "<group>_<source>"
    std::vector<std::pair<std::string, sgns::EmbeddingModel>> channel_models;
    std::vector<std::pair<std::string, lda::TopicModel>> topic_models;
};

// Runs the layers up to and including `through`, in memory; writes
// nothing. Module errors are rethrown with the pipeline stage prepended.
AnalysisArtifacts run_analysis(const RunConfig& config, Stage through);

enum class ReportFormat { json, csv_bundle };

// Writes report.json or the CSV tables under `dir`; returns the files
// written. Reals are printed with round-trip precision in both formats.
std::vector<std::string> emit_report(const Report& report, ReportFormat format,
                                     const std::string& dir);

// Full pipeline: runs every layer and writes the report (JSON + CSV),
// token stream and model artifacts under config.output_dir. On failure
// every file this run wrote is removed before the error propagates.
Report run_full_analysis(const RunConfig& config);

// Minimal JSON-Schema checker covering the subset used by the report
// schema (type, properties, required, additionalProperties, items, enum,
// minimum/maximum, minItems). Returns human-readable violations; empty
// means valid. `schema_json` and `instance_json` are JSON texts.
std::vector<std::string> validate_against_schema(const std::string& instance_json,
                                                 const std::string& schema_json);

}  // namespace trilayer::pipeline
