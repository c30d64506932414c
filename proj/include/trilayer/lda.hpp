#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "trilayer/corpus.hpp"

namespace trilayer::lda {

struct LdaConfig {
    std::size_t k = 300;       // topic count
    double alpha = 0.0;        // document-topic prior; <= 0 means 1/k
    double beta = 0.0;         // topic-word prior; <= 0 means 1/k
    std::size_t iterations = 500;  // full Gibbs sweeps
    std::size_t token_cap = 2000;  // per-document token budget
    std::uint64_t seed = 0;
    // Re-checks the count tables after every sweep (testing aid).
    bool validate_counts = false;

    // Fills the defaulted priors; validates ranges.
    LdaConfig resolved() const;
};

struct TopicModel {
    LdaConfig config;
    std::vector<std::string> vocabulary;     // first-occurrence order
    std::vector<double> topic_word;          // k x |V|, row-major, rows sum to 1
    std::vector<std::vector<double>> doc_topic;  // one k-vector per input doc

    std::size_t vocab_index(const std::string& word) const;  // npos on miss
    const double* topic_row(std::size_t topic) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    mutable std::unordered_map<std::string, std::size_t> index_;  // lazy
};

// Uniform random sub-multiset of exactly `cap` tokens (relative order
// preserved); documents at or under the cap pass through unchanged.
corpus::TokenDocument subsample_tokens(const corpus::TokenDocument& doc,
                                       std::size_t cap, std::uint64_t seed);

// Collapsed Gibbs sampling from a seeded random assignment. Documents over
// the token cap are subsampled first, each with a seed derived from
// (config.seed, video_id, source) so corpus order cannot change results.
// Final-state counts are read once:
//   topic_word[t][w] = (count(t,w) + beta) / (count(t) + |V| beta)
//   doc_topic[d][t]  = (count(d,t) + alpha) / (len(d) + k alpha)
TopicModel train_lda(const std::vector<corpus::TokenDocument>& docs,
                     const LdaConfig& config);

// Gibbs inference with the topic-word matrix held fixed. Out-of-vocabulary
// tokens are skipped; a document with no in-vocabulary tokens is a
// DataError.
std::vector<double> infer_topics(const TopicModel& model,
                                 const corpus::TokenDocument& doc,
                                 std::uint64_t seed,
                                 std::size_t sweeps = 100);

// Index of the largest entry; ties break to the lowest index.
std::size_t dominant_topic(const std::vector<double>& dist);

// The n highest-probability words of one topic, descending; probability
// ties break lexicographically. n larger than |V| returns the full
// ranked vocabulary.
std::vector<std::string> top_words(const TopicModel& model, std::size_t topic,
                                   std::size_t n = 20);

// Text model file: header `lda k |V| alpha beta seed`, the vocabulary,
// then the topic_word rows. Reals survive a round-trip to 1e-12.
// Per-run fields (doc_topic, iteration/cap settings) are not persisted.
void save_topic_model(const TopicModel& model, const std::string& path);
TopicModel load_topic_model(const std::string& path);

}  // namespace trilayer::lda
