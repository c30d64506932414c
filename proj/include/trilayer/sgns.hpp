#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "trilayer/corpus.hpp"
#include "trilayer/rng.hpp"

namespace trilayer::sgns {

struct SgnsConfig {
    std::size_t dim = 50;          // desk-scale default; 600 reproduces the
                                   // large-corpus setting as configuration
    std::size_t window = 5;        // context radius ceiling
    std::size_t negatives = 5;     // negative samples per positive pair
    std::size_t epochs = 5;
    double learning_rate = 0.025;  // initial; decays linearly to 1e-4 of it
    std::size_t min_count = 2;     // vocabulary floor
    std::uint64_t seed = 0;
    std::size_t workers = 1;       // >1 trades determinism for throughput
};

// Word vectors are stored as 32-bit reals: that is what the binary model
// format declares, so training and file IO agree bit-for-bit.
struct EmbeddingModel {
    SgnsConfig config;
    std::vector<std::string> vocabulary;  // count-descending, then word
    std::vector<std::uint64_t> counts;    // training exposures per word
    std::vector<float> input_vectors;     // |V| x dim, row-major
    std::vector<float> output_vectors;    // |V| x dim, row-major

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    std::size_t word_index(const std::string& word) const;  // npos on miss

    // Input vector row; DataError naming the word when absent.
    const float* vector_of(const std::string& word) const;

private:
    mutable std::unordered_map<std::string, std::size_t> index_;  // lazy
};

// Skip-gram with negative sampling, trained from scratch.
//   - vocabulary: words with count >= min_count, count-descending
//   - inputs start uniform in [-0.5/dim, 0.5/dim], outputs start at zero
//   - dynamic window: per center position the radius is uniform in
//     1..window
//   - negatives drawn from the unigram^0.75 distribution; a draw that hits
//     the positive context word is skipped without redraw
//   - single-worker runs are a pure function of (corpus, config)
EmbeddingModel train_sgns(const std::vector<corpus::TokenDocument>& docs,
                          const SgnsConfig& config);

// Continues training from a base model on new text. The vocabulary is the
// union of the base vocabulary (order preserved) and new-corpus words
// meeting the base min_count (appended count-descending); inherited words
// start from their base vectors, new words from seeded initialization.
// Negative sampling uses new-corpus counts only, so words absent from the
// new corpus are never touched and keep their base vectors bit-exactly.
// An empty corpus returns a copy of the base. Stored counts accumulate
// (base exposures plus new-corpus occurrences).
EmbeddingModel fine_tune(const EmbeddingModel& base,
                         const std::vector<corpus::TokenDocument>& docs,
                         std::size_t epochs, std::uint64_t seed);

// Cosine of the input vectors; DataError naming any missing word.
double cosine(const EmbeddingModel& model, const std::string& w1,
              const std::string& w2);

// Binary model file (bit-exact round-trip): magic "EMB1", then dim and
// vocabulary size, then per word a length-prefixed UTF-8 string, its
// count, and the input and output rows as little-endian 32-bit reals.
void save_embedding(const EmbeddingModel& model, const std::string& path);
EmbeddingModel load_embedding(const std::string& path);

// Text interchange format: first line "|V| dim", then one word and its
// input vector per line. Values survive to 1e-6 (they are printed with
// enough digits to round-trip exactly); output vectors and counts are not
// part of this format.
void save_embedding_text(const EmbeddingModel& model, const std::string& path);
EmbeddingModel load_embedding_text(const std::string& path);

// Draws word indices proportional to count^0.75. Exposed for tests; the
// trainer uses it internally.
class NegativeSampler {
public:
    explicit NegativeSampler(const std::vector<std::uint64_t>& counts);
    std::size_t draw(Rng& rng) const;
    bool empty() const { return cumulative_.empty(); }

private:
    std::vector<double> cumulative_;       // running sums of count^0.75
    std::vector<std::size_t> candidates_;  // indices with positive count
};

}  // namespace trilayer::sgns
