#include "trilayer/weat.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "trilayer/errors.hpp"
#include "trilayer/rng.hpp"

namespace trilayer::weat {

namespace {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i;  // exact at every step
    }
    return result;
}

// Advances an ascending index combination over {0..m-1}; false at the end.
bool next_combination(std::vector<std::size_t>& c, std::size_t m) {
    const std::size_t k = c.size();
    for (std::size_t i = k; i-- > 0;) {
        if (c[i] < m - k + i) {
            ++c[i];
            for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

// Partition statistic over pooled associations: members of the selection
// minus the rest, both summed in ascending index order so that the
// observed statistic and every enumerated one use identical arithmetic.
double partition_statistic(const std::vector<double>& pooled,
                           const std::vector<bool>& in_first) {
    double first = 0.0, second = 0.0;
    for (std::size_t i = 0; i < pooled.size(); ++i) {
        if (in_first[i]) {
            first += pooled[i];
        } else {
            second += pooled[i];
        }
    }
    return first - second;
}

void require_no_duplicates(const std::vector<std::string>& words,
                           const std::string& set_name,
                           const std::string& spec_name) {
    std::set<std::string> seen;
    for (const std::string& word : words) {
        if (!seen.insert(word).second) {
            throw DataError("duplicate word \"" + word + "\" in " + set_name +
                            " of spec \"" + spec_name + "\"");
        }
    }
}

std::vector<std::string> missing_words(const sgns::EmbeddingModel& model,
                                       const std::vector<std::string>& words) {
    std::vector<std::string> missing;
    for (const std::string& word : words) {
        if (model.word_index(word) == sgns::EmbeddingModel::npos) {
            missing.push_back(word);
        }
    }
    return missing;
}

std::string join(const std::vector<std::string>& words) {
    std::string out;
    for (const std::string& word : words) {
        if (!out.empty()) out += ", ";
        out += word;
    }
    return out;
}

std::vector<double> associations_of(const sgns::EmbeddingModel& model,
                                    const std::vector<std::string>& words,
                                    const std::vector<std::string>& attrs1,
                                    const std::vector<std::string>& attrs2) {
    std::vector<double> values;
    values.reserve(words.size());
    for (const std::string& word : words) {
        values.push_back(word_association(model, word, attrs1, attrs2));
    }
    return values;
}

struct PValue {
    double p = 0.0;
    std::uint64_t partitions = 0;
    bool exact = true;
};

// Core p-value computation over precomputed pooled associations; the
// observed statistic is the identity partition (first n indices).
PValue pvalue_from_associations(const std::vector<double>& pooled,
                                const WeatOptions& options,
                                const std::string& spec_name) {
    const std::size_t n = pooled.size() / 2;
    std::vector<bool> mask(pooled.size(), false);
    for (std::size_t i = 0; i < n; ++i) mask[i] = true;
    const double observed = partition_statistic(pooled, mask);

    const auto beats = [&](double statistic) {
        return options.mode == TailMode::gt ? statistic > observed
                                            : statistic >= observed;
    };

    const std::uint64_t partitions =
        binomial(static_cast<std::uint64_t>(pooled.size()),
                 static_cast<std::uint64_t>(n));
    if (partitions <= options.enumeration_ceiling) {
        std::vector<std::size_t> combo(n);
        for (std::size_t i = 0; i < n; ++i) combo[i] = i;
        std::uint64_t count = 0;
        std::uint64_t evaluated = 0;
        do {
            std::fill(mask.begin(), mask.end(), false);
            for (std::size_t index : combo) mask[index] = true;
            if (beats(partition_statistic(pooled, mask))) ++count;
            ++evaluated;
        } while (next_combination(combo, pooled.size()));
        if (evaluated != partitions) {
            throw std::logic_error("partition enumeration miscounted");
        }
        return {static_cast<double>(count) / static_cast<double>(partitions),
                partitions, true};
    }

    if (!options.monte_carlo) {
        throw DataError(
            "spec \"" + spec_name + "\": " + std::to_string(partitions) +
            " partitions exceed the enumeration ceiling of " +
            std::to_string(options.enumeration_ceiling) +
            "; enable the sampled (monte_carlo) mode for classes this large");
    }

    Rng rng(derive_seed(options.seed, "weat:mc:" + spec_name));
    std::vector<std::size_t> indices(pooled.size());
    std::uint64_t count = 0;
    for (std::size_t s = 0; s < options.samples; ++s) {
        for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
        // partial Fisher-Yates: the first n entries are a uniform subset
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = i + static_cast<std::size_t>(
                                    rng.uniform_int(indices.size() - i));
            std::swap(indices[i], indices[j]);
        }
        std::fill(mask.begin(), mask.end(), false);
        for (std::size_t i = 0; i < n; ++i) mask[indices[i]] = true;
        if (beats(partition_statistic(pooled, mask))) ++count;
    }
    return {static_cast<double>(count) / static_cast<double>(options.samples),
            static_cast<std::uint64_t>(options.samples), false};
}

WeatSpec spec_from_json(const nlohmann::json& record,
                        const std::string& path) {
    WeatSpec spec;
    try {
        spec.name = record.at("name").get<std::string>();
        spec.class1 = record.at("class1").get<std::vector<std::string>>();
        spec.class2 = record.at("class2").get<std::vector<std::string>>();
        spec.attrs1 = record.at("attrs1").get<std::vector<std::string>>();
        spec.attrs2 = record.at("attrs2").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& error) {
        throw DataError("malformed spec in " + path + ": " + error.what());
    }
    spec.validate();
    return spec;
}

}  // namespace

std::string to_string(OovPolicy policy) {
    return policy == OovPolicy::strict ? "strict" : "balance";
}

OovPolicy oov_policy_from_string(const std::string& text) {
    if (text == "strict") return OovPolicy::strict;
    if (text == "balance") return OovPolicy::balance;
    throw ConfigError("unknown OOV policy: \"" + text + "\"");
}

std::string to_string(TailMode mode) {
    return mode == TailMode::gt ? "gt" : "gte";
}

TailMode tail_mode_from_string(const std::string& text) {
    if (text == "gt") return TailMode::gt;
    if (text == "gte") return TailMode::gte;
    throw ConfigError("unknown tail mode: \"" + text + "\"");
}

void WeatSpec::validate() const {
    if (name.empty()) throw DataError("bias spec with empty name");
    if (class1.empty() || class1.size() != class2.size()) {
        throw DataError("spec \"" + name +
                        "\": classes must be non-empty and equal-sized (" +
                        std::to_string(class1.size()) + " vs " +
                        std::to_string(class2.size()) + ")");
    }
    if (attrs1.empty() || attrs2.empty()) {
        throw DataError("spec \"" + name + "\": attribute sets must be non-empty");
    }
    require_no_duplicates(class1, "class1", name);
    require_no_duplicates(class2, "class2", name);
    require_no_duplicates(attrs1, "attrs1", name);
    require_no_duplicates(attrs2, "attrs2", name);
}

double word_association(const sgns::EmbeddingModel& model,
                        const std::string& word,
                        const std::vector<std::string>& attrs1,
                        const std::vector<std::string>& attrs2) {
    std::vector<std::string> missing = missing_words(model, {word});
    for (const auto& attrs : {attrs1, attrs2}) {
        for (const std::string& missed : missing_words(model, attrs)) {
            missing.push_back(missed);
        }
    }
    if (!missing.empty()) {
        throw DataError("words not in vocabulary: " + join(missing));
    }
    double mean1 = 0.0;
    for (const std::string& attr : attrs1) {
        mean1 += sgns::cosine(model, word, attr);
    }
    mean1 /= static_cast<double>(attrs1.size());
    double mean2 = 0.0;
    for (const std::string& attr : attrs2) {
        mean2 += sgns::cosine(model, word, attr);
    }
    mean2 /= static_cast<double>(attrs2.size());
    return mean1 - mean2;
}

double test_statistic(const sgns::EmbeddingModel& model,
                      const WeatSpec& spec) {
    double first = 0.0;
    for (double a : associations_of(model, spec.class1, spec.attrs1,
                                    spec.attrs2)) {
        first += a;
    }
    double second = 0.0;
    for (double a : associations_of(model, spec.class2, spec.attrs1,
                                    spec.attrs2)) {
        second += a;
    }
    return first - second;
}

double effect_size(const sgns::EmbeddingModel& model, const WeatSpec& spec) {
    std::vector<double> first =
        associations_of(model, spec.class1, spec.attrs1, spec.attrs2);
    std::vector<double> second =
        associations_of(model, spec.class2, spec.attrs1, spec.attrs2);

    std::vector<double> pooled = first;
    pooled.insert(pooled.end(), second.begin(), second.end());
    double mean = 0.0;
    for (double a : pooled) mean += a;
    mean /= static_cast<double>(pooled.size());
    double variance = 0.0;
    for (double a : pooled) variance += (a - mean) * (a - mean);
    if (pooled.size() < 2 || variance == 0.0) {
        throw DataError("spec \"" + spec.name +
                        "\": pooled associations have zero variance");
    }
    variance /= static_cast<double>(pooled.size() - 1);

    double mean1 = 0.0;
    for (double a : first) mean1 += a;
    mean1 /= static_cast<double>(first.size());
    double mean2 = 0.0;
    for (double a : second) mean2 += a;
    mean2 /= static_cast<double>(second.size());

    return (mean1 - mean2) / std::sqrt(variance);
}

std::pair<double, std::uint64_t> permutation_pvalue(
    const sgns::EmbeddingModel& model, const WeatSpec& spec,
    const WeatOptions& options) {
    std::vector<double> pooled =
        associations_of(model, spec.class1, spec.attrs1, spec.attrs2);
    for (double a : associations_of(model, spec.class2, spec.attrs1,
                                    spec.attrs2)) {
        pooled.push_back(a);
    }
    const PValue result = pvalue_from_associations(pooled, options, spec.name);
    return {result.p, result.partitions};
}

WeatResult run_weat(const sgns::EmbeddingModel& model, const WeatSpec& spec,
                    const WeatOptions& options) {
    spec.validate();
    WeatResult result;
    result.spec_name = spec.name;
    result.mode = options.mode;

    WeatSpec live = spec;
    if (options.policy == OovPolicy::strict) {
        std::vector<std::string> missing;
        for (const auto* words :
             {&live.class1, &live.class2, &live.attrs1, &live.attrs2}) {
            for (const std::string& missed : missing_words(model, *words)) {
                missing.push_back(missed);
            }
        }
        if (!missing.empty()) {
            throw DataError("spec \"" + spec.name +
                            "\": words not in vocabulary: " + join(missing));
        }
    } else {
        // Drop missing attribute words first; associations below use the
        // surviving attribute sets.
        for (auto [attrs, dropped] :
             {std::pair{&live.attrs1, &result.dropped_attrs},
              std::pair{&live.attrs2, &result.dropped_attrs}}) {
            std::vector<std::string> kept;
            for (const std::string& word : *attrs) {
                if (model.word_index(word) == sgns::EmbeddingModel::npos) {
                    dropped->push_back(word);
                } else {
                    kept.push_back(word);
                }
            }
            *attrs = std::move(kept);
        }
        if (live.attrs1.empty() || live.attrs2.empty()) {
            throw DataError("spec \"" + spec.name +
                            "\": an attribute set lost every word to the "
                            "vocabulary");
        }

        // Drop missing class words, then rebalance the larger class by
        // discarding its weakest (lowest-|association|) words.
        const auto strip = [&](std::vector<std::string>& words,
                               std::vector<std::string>& dropped) {
            std::vector<std::string> kept;
            for (const std::string& word : words) {
                if (model.word_index(word) == sgns::EmbeddingModel::npos) {
                    dropped.push_back(word);
                } else {
                    kept.push_back(word);
                }
            }
            words = std::move(kept);
        };
        strip(live.class1, result.dropped_class1);
        strip(live.class2, result.dropped_class2);

        const auto rebalance = [&](std::vector<std::string>& larger,
                                   std::vector<std::string>& dropped,
                                   std::size_t target) {
            while (larger.size() > target) {
                std::size_t weakest = 0;
                double weakest_magnitude = 0.0;
                for (std::size_t i = 0; i < larger.size(); ++i) {
                    const double magnitude = std::abs(word_association(
                        model, larger[i], live.attrs1, live.attrs2));
                    if (i == 0 || magnitude < weakest_magnitude) {
                        weakest = i;
                        weakest_magnitude = magnitude;
                    }
                }
                dropped.push_back(larger[weakest]);
                larger.erase(larger.begin() +
                             static_cast<std::ptrdiff_t>(weakest));
            }
        };
        const std::size_t target =
            std::min(live.class1.size(), live.class2.size());
        if (target == 0) {
            throw DataError("spec \"" + spec.name +
                            "\": a class lost every word to the vocabulary");
        }
        rebalance(live.class1, result.dropped_class1, target);
        rebalance(live.class2, result.dropped_class2, target);
    }

    result.class_size = live.class1.size();

    const std::vector<double> first =
        associations_of(model, live.class1, live.attrs1, live.attrs2);
    const std::vector<double> second =
        associations_of(model, live.class2, live.attrs1, live.attrs2);
    for (std::size_t i = 0; i < live.class1.size(); ++i) {
        result.per_word_associations.emplace_back(live.class1[i], first[i]);
    }
    for (std::size_t i = 0; i < live.class2.size(); ++i) {
        result.per_word_associations.emplace_back(live.class2[i], second[i]);
    }

    std::vector<double> pooled = first;
    pooled.insert(pooled.end(), second.begin(), second.end());
    result.degenerate =
        std::all_of(pooled.begin(), pooled.end(),
                    [&](double a) { return a == pooled.front(); });

    result.statistic = test_statistic(model, live);
    result.effect_size = result.degenerate ? 0.0 : effect_size(model, live);
    const PValue pvalue = pvalue_from_associations(pooled, options, live.name);
    result.p_value = pvalue.p;
    result.partitions_evaluated = pvalue.partitions;
    result.exact = pvalue.exact;
    return result;
}

const std::vector<WeatSpec>& builtin_specs() {
    static const std::vector<WeatSpec> specs = {
        {"immigrants",
         {"immigrant", "migrant"},
         {"citizen", "native"},
         {"bad", "burden", "pirate", "plague", "taker", "thief"},
         {"good", "honest", "maker", "rightful"}},
        {"muslims",
         {"islamism", "muhammed", "muslim", "quran"},
         {"bible", "christian", "christianity", "jesus"},
         {"assassin", "attack", "bomb", "death", "murder", "radical",
          "terrorist"},
         {"compassionate", "gentle", "humane", "kind", "tolerant"}},
        {"lgbt",
         {"bisexual", "gay", "homosexual", "lesbian"},
         {"het", "hetero", "heterosexual", "straight"},
         {"immoral", "outrageous", "promiscuous", "revolting", "sinner"},
         {"moral", "natural", "normal"}},
    };
    return specs;
}

std::vector<WeatSpec> load_specs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open bias spec file: " + path);
    nlohmann::json parsed;
    try {
        in >> parsed;
    } catch (const nlohmann::json::exception& error) {
        throw DataError("malformed spec file " + path + ": " + error.what());
    }
    if (!parsed.is_array()) {
        throw DataError("spec file must hold an array of tests: " + path);
    }
    std::vector<WeatSpec> specs;
    std::set<std::string> names;
    for (const nlohmann::json& record : parsed) {
        WeatSpec spec = spec_from_json(record, path);
        if (!names.insert(spec.name).second) {
            throw DataError("duplicate spec name \"" + spec.name + "\" in " +
                            path);
        }
        specs.push_back(std::move(spec));
    }
    return specs;
}

}  // namespace trilayer::weat
