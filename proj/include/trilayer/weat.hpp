#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "trilayer/sgns.hpp"

namespace trilayer::weat {

// One bias test: two equal-sized word classes measured against two
// attribute sets (which may differ in size).
struct WeatSpec {
    std::string name;
    std::vector<std::string> class1;  // discriminated class
    std::vector<std::string> class2;  // dominant class
    std::vector<std::string> attrs1;  // negative attributes
    std::vector<std::string> attrs2;  // positive attributes

    // Enforces equal non-empty classes, non-empty attribute sets and
    // duplicate-free word lists; throws DataError.
    void validate() const;
};

// How missing vocabulary is handled.
//   strict  — any out-of-vocabulary word aborts the test (default)
//   balance — missing words are dropped; when a class loses a word, the
//             other class drops its lowest-|association| word to stay
//             the same size
enum class OovPolicy { strict, balance };

// Tail convention for the permutation test: the written definition counts
// partitions with a statistic strictly greater than observed; gte is the
// conventional conservative variant.
enum class TailMode { gt, gte };

std::string to_string(OovPolicy policy);
OovPolicy oov_policy_from_string(const std::string& text);
std::string to_string(TailMode mode);
TailMode tail_mode_from_string(const std::string& text);

struct WeatOptions {
    OovPolicy policy = OovPolicy::strict;
    TailMode mode = TailMode::gt;
    // Largest number of partitions enumerated exactly: binomial(20, 10).
    std::uint64_t enumeration_ceiling = 184756;
    // Opt-in sampled p-value for classes too large to enumerate.
    bool monte_carlo = false;
    std::size_t samples = 100000;
    std::uint64_t seed = 0;
};

struct WeatResult {
    std::string spec_name;
    // Surviving class words in order (class1 then class2) with their
    // association values.
    std::vector<std::pair<std::string, double>> per_word_associations;
    std::size_t class_size = 0;  // per class, after any balancing
    double statistic = 0.0;
    double effect_size = 0.0;
    double p_value = 0.0;
    std::uint64_t partitions_evaluated = 0;
    bool exact = true;  // false when the sampled mode produced p_value
    TailMode mode = TailMode::gt;
    // All pooled associations equal: the strict test is vacuous (p = 0).
    bool degenerate = false;
    std::vector<std::string> dropped_class1;
    std::vector<std::string> dropped_class2;
    std::vector<std::string> dropped_attrs;
};

// Mean cosine of w against attrs1 minus mean cosine against attrs2;
// range [-2, 2]. DataError lists every word absent from the vocabulary.
double word_association(const sgns::EmbeddingModel& model,
                        const std::string& word,
                        const std::vector<std::string>& attrs1,
                        const std::vector<std::string>& attrs2);

// Sum of class1 associations minus sum of class2 associations.
double test_statistic(const sgns::EmbeddingModel& model, const WeatSpec& spec);

// Cohen's d: difference of class association means over the sample
// standard deviation (n-1 denominator) of the pooled associations.
// DataError when the pooled associations have zero variance.
double effect_size(const sgns::EmbeddingModel& model, const WeatSpec& spec);

// Exact one-sided permutation test: enumerates every equal-size
// bipartition of class1 ∪ class2 (binomial(2n, n) of them) and returns
// the fraction whose statistic beats the observed one under `mode`,
// plus the partition count. DataError when the count exceeds the ceiling
// (the message points at the sampled mode).
std::pair<double, std::uint64_t> permutation_pvalue(
    const sgns::EmbeddingModel& model, const WeatSpec& spec,
    const WeatOptions& options = {});

// Full test under an OOV policy; records dropped words and the tail mode
// that produced the p-value.
WeatResult run_weat(const sgns::EmbeddingModel& model, const WeatSpec& spec,
                    const WeatOptions& options = {});

// The three built-in bias specifications (immigrants, muslims, lgbt).
const std::vector<WeatSpec>& builtin_specs();

// JSON spec file: an array of objects with keys name, class1, class2,
// attrs1, attrs2. Every spec is validated.
std::vector<WeatSpec> load_specs(const std::string& path);

}  // namespace trilayer::weat
