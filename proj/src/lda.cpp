#include "trilayer/lda.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "trilayer/errors.hpp"
#include "trilayer/rng.hpp"

namespace trilayer::lda {

namespace {

// Enough digits for an exact double round-trip.
std::string real_to_text(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

struct GibbsState {
    std::size_t k = 0;
    std::size_t vocab = 0;
    // Token streams as vocabulary indices, one per document.
    std::vector<std::vector<std::size_t>> words;
    std::vector<std::vector<std::size_t>> assignment;
    std::vector<std::vector<std::int64_t>> doc_topic;    // D x k
    std::vector<std::vector<std::int64_t>> topic_word;   // k x V
    std::vector<std::int64_t> topic_total;               // k

    void validate() const {
        for (std::size_t d = 0; d < words.size(); ++d) {
            std::int64_t sum = std::accumulate(doc_topic[d].begin(),
                                               doc_topic[d].end(),
                                               std::int64_t{0});
            if (sum != static_cast<std::int64_t>(words[d].size())) {
                throw std::logic_error("doc-topic counts out of sync");
            }
        }
        for (std::size_t t = 0; t < k; ++t) {
            std::int64_t sum = std::accumulate(topic_word[t].begin(),
                                               topic_word[t].end(),
                                               std::int64_t{0});
            if (sum != topic_total[t]) {
                throw std::logic_error("topic-word counts out of sync");
            }
        }
    }
};

}  // namespace

LdaConfig LdaConfig::resolved() const {
    LdaConfig out = *this;
    if (out.k < 1) throw ConfigError("topic count must be at least 1");
    if (out.token_cap < 1) throw ConfigError("token cap must be at least 1");
    if (out.alpha <= 0.0) out.alpha = 1.0 / static_cast<double>(out.k);
    if (out.beta <= 0.0) out.beta = 1.0 / static_cast<double>(out.k);
    return out;
}

std::size_t TopicModel::vocab_index(const std::string& word) const {
    if (index_.size() != vocabulary.size()) {  // unbuilt or stale
        index_.clear();
        for (std::size_t i = 0; i < vocabulary.size(); ++i) {
            index_.emplace(vocabulary[i], i);
        }
    }
    auto it = index_.find(word);
    return it == index_.end() ? npos : it->second;
}

const double* TopicModel::topic_row(std::size_t topic) const {
    return topic_word.data() + topic * vocabulary.size();
}

corpus::TokenDocument subsample_tokens(const corpus::TokenDocument& doc,
                                       std::size_t cap, std::uint64_t seed) {
    if (cap < 1) throw ConfigError("token cap must be at least 1");
    if (doc.tokens.size() <= cap) return doc;

    // Partial Fisher-Yates over the index range picks a uniform subset;
    // sorting it back keeps the surviving tokens in original order.
    std::vector<std::size_t> indices(doc.tokens.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = 0; i < cap; ++i) {
        std::size_t j =
            i + static_cast<std::size_t>(rng.uniform_int(indices.size() - i));
        std::swap(indices[i], indices[j]);
    }
    indices.resize(cap);
    std::sort(indices.begin(), indices.end());

    corpus::TokenDocument out;
    out.video_id = doc.video_id;
    out.channel_id = doc.channel_id;
    out.source = doc.source;
    out.tokens.reserve(cap);
    for (std::size_t index : indices) out.tokens.push_back(doc.tokens[index]);
    return out;
}

TopicModel train_lda(const std::vector<corpus::TokenDocument>& docs,
                     const LdaConfig& raw_config) {
    const LdaConfig config = raw_config.resolved();
    if (docs.empty()) throw DataError("cannot train topics on an empty corpus");

    TopicModel model;
    model.config = config;

    // Subsample over-cap documents and map tokens to vocabulary indices
    // (first-occurrence order).
    GibbsState state;
    state.k = config.k;
    std::unordered_map<std::string, std::size_t> vocab_index;
    for (const corpus::TokenDocument& doc : docs) {
        if (doc.tokens.empty()) {
            throw DataError("empty document \"" + doc.video_id + "\" (" +
                            corpus::to_string(doc.source) + ")");
        }
        const std::uint64_t doc_seed = derive_seed(
            config.seed, "subsample:" + doc.video_id + ":" +
                             corpus::to_string(doc.source));
        corpus::TokenDocument capped =
            subsample_tokens(doc, config.token_cap, doc_seed);
        std::vector<std::size_t> stream;
        stream.reserve(capped.tokens.size());
        for (const std::string& token : capped.tokens) {
            auto [it, inserted] =
                vocab_index.emplace(token, model.vocabulary.size());
            if (inserted) model.vocabulary.push_back(token);
            stream.push_back(it->second);
        }
        state.words.push_back(std::move(stream));
    }
    state.vocab = model.vocabulary.size();

    const std::size_t k = config.k;
    const double alpha = config.alpha;
    const double beta = config.beta;
    const double vbeta = static_cast<double>(state.vocab) * beta;

    state.doc_topic.assign(state.words.size(),
                           std::vector<std::int64_t>(k, 0));
    state.topic_word.assign(k, std::vector<std::int64_t>(state.vocab, 0));
    state.topic_total.assign(k, 0);
    state.assignment.resize(state.words.size());

    Rng rng(derive_seed(config.seed, "lda:train"));

    // Seeded random initial assignment.
    for (std::size_t d = 0; d < state.words.size(); ++d) {
        state.assignment[d].resize(state.words[d].size());
        for (std::size_t i = 0; i < state.words[d].size(); ++i) {
            const std::size_t t = static_cast<std::size_t>(rng.uniform_int(k));
            state.assignment[d][i] = t;
            ++state.doc_topic[d][t];
            ++state.topic_word[t][state.words[d][i]];
            ++state.topic_total[t];
        }
    }

    std::vector<double> weight(k);
    for (std::size_t sweep = 0; sweep < config.iterations; ++sweep) {
        for (std::size_t d = 0; d < state.words.size(); ++d) {
            for (std::size_t i = 0; i < state.words[d].size(); ++i) {
                const std::size_t w = state.words[d][i];
                const std::size_t old_t = state.assignment[d][i];
                --state.doc_topic[d][old_t];
                --state.topic_word[old_t][w];
                --state.topic_total[old_t];

                double total = 0.0;
                for (std::size_t t = 0; t < k; ++t) {
                    total +=
                        (static_cast<double>(state.doc_topic[d][t]) + alpha) *
                        (static_cast<double>(state.topic_word[t][w]) + beta) /
                        (static_cast<double>(state.topic_total[t]) + vbeta);
                    weight[t] = total;
                }
                const double u = rng.uniform() * total;
                std::size_t new_t = k - 1;
                for (std::size_t t = 0; t < k; ++t) {
                    if (u < weight[t]) {
                        new_t = t;
                        break;
                    }
                }

                state.assignment[d][i] = new_t;
                ++state.doc_topic[d][new_t];
                ++state.topic_word[new_t][w];
                ++state.topic_total[new_t];
            }
        }
        if (config.validate_counts) state.validate();
    }

    // Read the final counts once.
    model.topic_word.resize(k * state.vocab);
    for (std::size_t t = 0; t < k; ++t) {
        const double denom = static_cast<double>(state.topic_total[t]) + vbeta;
        for (std::size_t w = 0; w < state.vocab; ++w) {
            model.topic_word[t * state.vocab + w] =
                (static_cast<double>(state.topic_word[t][w]) + beta) / denom;
        }
    }
    model.doc_topic.resize(state.words.size());
    for (std::size_t d = 0; d < state.words.size(); ++d) {
        const double denom = static_cast<double>(state.words[d].size()) +
                             static_cast<double>(k) * alpha;
        model.doc_topic[d].resize(k);
        for (std::size_t t = 0; t < k; ++t) {
            model.doc_topic[d][t] =
                (static_cast<double>(state.doc_topic[d][t]) + alpha) / denom;
        }
    }
    return model;
}

std::vector<double> infer_topics(const TopicModel& model,
                                 const corpus::TokenDocument& doc,
                                 std::uint64_t seed, std::size_t sweeps) {
    const std::size_t k = model.config.k;
    const double alpha = model.config.alpha;

    std::vector<std::size_t> words;
    for (const std::string& token : doc.tokens) {
        const std::size_t w = model.vocab_index(token);
        if (w != TopicModel::npos) words.push_back(w);
    }
    if (words.empty()) {
        throw DataError("document \"" + doc.video_id +
                        "\" has no in-vocabulary tokens");
    }

    Rng rng(seed);
    std::vector<std::size_t> assignment(words.size());
    std::vector<std::int64_t> counts(k, 0);
    for (std::size_t i = 0; i < words.size(); ++i) {
        assignment[i] = static_cast<std::size_t>(rng.uniform_int(k));
        ++counts[assignment[i]];
    }

    const std::size_t vocab = model.vocabulary.size();
    std::vector<double> weight(k);
    for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
        for (std::size_t i = 0; i < words.size(); ++i) {
            const std::size_t w = words[i];
            --counts[assignment[i]];
            double total = 0.0;
            for (std::size_t t = 0; t < k; ++t) {
                total += (static_cast<double>(counts[t]) + alpha) *
                         model.topic_word[t * vocab + w];
                weight[t] = total;
            }
            const double u = rng.uniform() * total;
            std::size_t new_t = k - 1;
            for (std::size_t t = 0; t < k; ++t) {
                if (u < weight[t]) {
                    new_t = t;
                    break;
                }
            }
            assignment[i] = new_t;
            ++counts[new_t];
        }
    }

    std::vector<double> dist(k);
    const double denom = static_cast<double>(words.size()) +
                         static_cast<double>(k) * alpha;
    for (std::size_t t = 0; t < k; ++t) {
        dist[t] = (static_cast<double>(counts[t]) + alpha) / denom;
    }
    return dist;
}

std::size_t dominant_topic(const std::vector<double>& dist) {
    if (dist.empty()) throw DataError("empty topic distribution");
    std::size_t best = 0;
    for (std::size_t t = 1; t < dist.size(); ++t) {
        if (dist[t] > dist[best]) best = t;
    }
    return best;
}

std::vector<std::string> top_words(const TopicModel& model, std::size_t topic,
                                   std::size_t n) {
    if (topic >= model.config.k) {
        throw DataError("topic index " + std::to_string(topic) +
                        " out of range [0, " +
                        std::to_string(model.config.k) + ")");
    }
    const double* row = model.topic_row(topic);
    std::vector<std::size_t> order(model.vocabulary.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (row[a] != row[b]) return row[a] > row[b];
        return model.vocabulary[a] < model.vocabulary[b];
    });
    if (n < order.size()) order.resize(n);

    std::vector<std::string> words;
    words.reserve(order.size());
    for (std::size_t index : order) words.push_back(model.vocabulary[index]);
    return words;
}

void save_topic_model(const TopicModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write topic model: " + path);
    out << "lda " << model.config.k << ' ' << model.vocabulary.size() << ' '
        << real_to_text(model.config.alpha) << ' '
        << real_to_text(model.config.beta) << ' ' << model.config.seed << '\n';
    for (const std::string& word : model.vocabulary) out << word << '\n';
    const std::size_t vocab = model.vocabulary.size();
    for (std::size_t t = 0; t < model.config.k; ++t) {
        for (std::size_t w = 0; w < vocab; ++w) {
            if (w) out << ' ';
            out << real_to_text(model.topic_word[t * vocab + w]);
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

TopicModel load_topic_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open topic model: " + path);
    std::string magic;
    std::size_t k = 0, vocab = 0;
    double alpha = 0.0, beta = 0.0;
    std::uint64_t seed = 0;
    std::string header;
    if (!std::getline(in, header)) throw DataError("empty model file: " + path);
    {
        std::istringstream hs(header);
        if (!(hs >> magic >> k >> vocab >> alpha >> beta >> seed) ||
            magic != "lda") {
            throw DataError("not a topic model file: " + path);
        }
    }
    TopicModel model;
    model.config.k = k;
    model.config.alpha = alpha;
    model.config.beta = beta;
    model.config.seed = seed;
    model.vocabulary.reserve(vocab);
    std::string line;
    for (std::size_t i = 0; i < vocab; ++i) {
        if (!std::getline(in, line)) {
            throw DataError("truncated vocabulary in " + path);
        }
        model.vocabulary.push_back(line);
    }
    model.topic_word.resize(k * vocab);
    for (std::size_t t = 0; t < k; ++t) {
        if (!std::getline(in, line)) {
            throw DataError("truncated topic rows in " + path);
        }
        std::istringstream row(line);
        for (std::size_t w = 0; w < vocab; ++w) {
            if (!(row >> model.topic_word[t * vocab + w])) {
                throw DataError("truncated topic row " + std::to_string(t) +
                                " in " + path);
            }
        }
    }
    return model;
}

}  // namespace trilayer::lda
