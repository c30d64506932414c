#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "trilayer/corpus.hpp"

namespace trilayer::lexicon {

enum class Polarity { negative, positive };

std::string to_string(Polarity polarity);
Polarity polarity_from_string(const std::string& text);

struct Category {
    std::string name;
    Polarity polarity = Polarity::negative;
    std::vector<std::string> words;  // lemmas
};

// Ordered set of named semantic categories with an inverted word index.
class CategoryLexicon {
public:
    static CategoryLexicon from_categories(std::vector<Category> categories);

    // File format: category<TAB>polarity<TAB>word1,word2,... per line.
    static CategoryLexicon from_file(const std::string& path);

    // Converter for the published category-list format (one category per
    // line: name followed by tab-separated member words). Keeps only the
    // requested categories; polarity comes from the name sets below.
    static CategoryLexicon import_category_lists(
        const std::string& path, const std::vector<std::string>& negative,
        const std::vector<std::string>& positive);

    void save(const std::string& path) const;

    std::size_t size() const { return categories_.size(); }
    const std::vector<Category>& categories() const { return categories_; }
    std::vector<std::string> category_names() const;

    // Indices of every category containing the word; empty if none.
    const std::vector<std::size_t>* categories_of(const std::string& word) const;

private:
    std::vector<Category> categories_;
    std::unordered_map<std::string, std::vector<std::size_t>> word_index_;
};

// Default category selection: 15 negative, 5 positive.
const std::vector<std::string>& default_negative_categories();
const std::vector<std::string>& default_positive_categories();

struct CategoryVector {
    std::string video_id;
    corpus::Source source = corpus::Source::caption;
    std::vector<std::int64_t> counts;
};

struct NormalizedCategoryVector {
    std::string video_id;
    corpus::Source source = corpus::Source::caption;
    std::vector<double> fractions;  // sums to 1
};

struct ChannelCategoryVector {
    std::string channel_id;
    corpus::Source source = corpus::Source::caption;
    std::vector<double> means;
    std::size_t videos = 0;  // contributing videos
};

struct SimilarityScore {
    std::string video_id;
    double value = 0.0;  // in [0, 1]
};

// Entry i = occurrences (with multiplicity) of tokens belonging to
// category i. A token in several categories increments each of them.
CategoryVector count_categories(const corpus::TokenDocument& doc,
                                const CategoryLexicon& lexicon);

// Divides by the sum over categories. Zero-sum vectors are a DataError;
// the caller excludes those videos and ledgers the exclusion.
NormalizedCategoryVector normalize_vector(const CategoryVector& cv);

// Componentwise mean over one channel's videos for one source.
ChannelCategoryVector aggregate_channel(
    const std::string& channel_id, corpus::Source source,
    const std::vector<NormalizedCategoryVector>& vectors);

// Cosine between a video's caption and comments fractions; in [0, 1]
// because the entries are nonnegative.
SimilarityScore caption_comment_similarity(const NormalizedCategoryVector& cap,
                                           const NormalizedCategoryVector& com);

struct PearsonResult {
    double r = 0.0;
    double p = 1.0;
};

// Sample Pearson coefficient plus a two-sided permutation p-value:
// ys is reshuffled `permutations` times with the seeded generator and
// |r_perm| >= |r_observed| is counted, with plus-one smoothing
// p = (1 + count) / (1 + permutations).
PearsonResult pearson_correlation(const std::vector<double>& xs,
                                  const std::vector<double>& ys,
                                  std::size_t permutations,
                                  std::uint64_t seed);

struct MedianDifferenceResult {
    double difference = 0.0;  // median(xs) - median(ys)
    double p = 1.0;
};

// Two-sided permutation test on the difference of group medians: the
// pooled values are reassigned to the two groups `resamples` times.
MedianDifferenceResult median_difference_test(const std::vector<double>& xs,
                                              const std::vector<double>& ys,
                                              std::size_t resamples,
                                              std::uint64_t seed);

// One channel's aggregate profile for the correlation table.
struct ChannelProfile {
    std::string channel_id;
    std::string group;
    corpus::Source source = corpus::Source::caption;
    std::vector<double> means;      // ChannelCategoryVector entries
    double mean_similarity = 0.0;   // over the channel's included videos
};

struct CorrelationRow {
    std::string category;
    std::string group;
    corpus::Source source = corpus::Source::caption;
    std::optional<double> r;
    std::optional<double> p;
    bool significant = false;  // p < 0.05
    std::string diagnostic;    // non-empty when r is null
};

// One row per (category, group, source): correlation between per-channel
// mean similarity and the per-channel category fraction. Groups with
// fewer than three channels yield null rows with a diagnostic, as do
// constant series.
std::vector<CorrelationRow> correlation_table(
    const std::vector<ChannelProfile>& profiles,
    const std::vector<std::string>& category_names, std::size_t permutations,
    std::uint64_t seed);

}  // namespace trilayer::lexicon
