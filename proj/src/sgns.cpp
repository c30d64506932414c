#include "trilayer/sgns.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "trilayer/errors.hpp"
#include "trilayer/rng.hpp"

namespace trilayer::sgns {

namespace {

constexpr double kLrFloorFraction = 1e-4;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Documents reduced to in-vocabulary index streams.
struct TrainPlan {
    std::vector<std::vector<std::size_t>> streams;
    std::uint64_t tokens = 0;
};

TrainPlan make_plan(const std::vector<corpus::TokenDocument>& docs,
                    const EmbeddingModel& model) {
    TrainPlan plan;
    for (const corpus::TokenDocument& doc : docs) {
        std::vector<std::size_t> stream;
        stream.reserve(doc.tokens.size());
        for (const std::string& token : doc.tokens) {
            const std::size_t index = model.word_index(token);
            if (index != EmbeddingModel::npos) stream.push_back(index);
        }
        if (!stream.empty()) {
            plan.tokens += stream.size();
            plan.streams.push_back(std::move(stream));
        }
    }
    return plan;
}

void check_finite(const EmbeddingModel& model, std::size_t epoch) {
    for (const auto* matrix : {&model.input_vectors, &model.output_vectors}) {
        for (float value : *matrix) {
            if (!std::isfinite(value)) {
                throw DataError("non-finite embedding value after epoch " +
                                std::to_string(epoch + 1) +
                                "; lower the learning rate");
            }
        }
    }
}

// One center position: the dynamic-radius window around stream[i],
// one positive plus `negatives` sampled updates per context word.
// Gradients are formed in double and applied to the 32-bit rows.
void train_position(EmbeddingModel& model, const std::vector<std::size_t>& stream,
                    std::size_t i, double lr, const NegativeSampler& sampler,
                    Rng& rng, std::vector<double>& accum) {
    const std::size_t dim = model.config.dim;
    const std::size_t center = stream[i];
    float* v_center = &model.input_vectors[center * dim];

    const std::size_t radius =
        1 + static_cast<std::size_t>(rng.uniform_int(model.config.window));
    const std::size_t lo = i >= radius ? i - radius : 0;
    const std::size_t hi = std::min(stream.size() - 1, i + radius);

    for (std::size_t j = lo; j <= hi; ++j) {
        if (j == i) continue;
        const std::size_t context = stream[j];
        std::fill(accum.begin(), accum.end(), 0.0);
        for (std::size_t s = 0; s <= model.config.negatives; ++s) {
            std::size_t target;
            double label;
            if (s == 0) {
                target = context;
                label = 1.0;
            } else {
                target = sampler.draw(rng);
                if (target == context) continue;  // skipped, not redrawn
                label = 0.0;
            }
            float* v_target = &model.output_vectors[target * dim];
            double f = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                f += static_cast<double>(v_center[d]) * v_target[d];
            }
            const double g = (label - sigmoid(f)) * lr;
            for (std::size_t d = 0; d < dim; ++d) {
                accum[d] += g * v_target[d];
                v_target[d] += static_cast<float>(g * v_center[d]);
            }
        }
        for (std::size_t d = 0; d < dim; ++d) {
            v_center[d] += static_cast<float>(accum[d]);
        }
    }
}

// Deterministic reference pass: one thread, one stream of randomness.
void train_single(EmbeddingModel& model, const TrainPlan& plan,
                  const NegativeSampler& sampler, std::size_t epochs,
                  double lr0, Rng& rng) {
    const double total =
        static_cast<double>(plan.tokens) * static_cast<double>(epochs);
    const double lr_floor = lr0 * kLrFloorFraction;
    std::uint64_t processed = 0;
    std::vector<double> accum(model.config.dim);
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        for (const auto& stream : plan.streams) {
            for (std::size_t i = 0; i < stream.size(); ++i) {
                const double lr = std::max(
                    lr0 * (1.0 - static_cast<double>(processed) / (total + 1.0)),
                    lr_floor);
                ++processed;
                train_position(model, stream, i, lr, sampler, rng, accum);
            }
        }
        check_finite(model, epoch);
    }
}

// Opt-in unsynchronized parallel pass (updates race benignly); not
// reproducible, so only chosen when config.workers > 1.
void train_hogwild(EmbeddingModel& model, const TrainPlan& plan,
                   const NegativeSampler& sampler, std::size_t epochs,
                   double lr0, std::uint64_t seed, std::size_t workers) {
    const double total =
        static_cast<double>(plan.tokens) * static_cast<double>(epochs);
    const double lr_floor = lr0 * kLrFloorFraction;
    std::atomic<std::uint64_t> processed{0};

    auto work = [&](std::size_t worker) {
        Rng rng(derive_seed(seed, "sgns:worker:" + std::to_string(worker)));
        std::vector<double> accum(model.config.dim);
        for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
            for (std::size_t s = worker; s < plan.streams.size();
                 s += workers) {
                const auto& stream = plan.streams[s];
                for (std::size_t i = 0; i < stream.size(); ++i) {
                    const double done = static_cast<double>(
                        processed.fetch_add(1, std::memory_order_relaxed));
                    const double lr =
                        std::max(lr0 * (1.0 - done / (total + 1.0)), lr_floor);
                    train_position(model, stream, i, lr, sampler, rng, accum);
                }
            }
        }
    };
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& thread : threads) thread.join();
    check_finite(model, epochs == 0 ? 0 : epochs - 1);
}

void seed_input_rows(EmbeddingModel& model, std::size_t first_row,
                     Rng& rng) {
    const std::size_t dim = model.config.dim;
    for (std::size_t row = first_row; row < model.vocabulary.size(); ++row) {
        for (std::size_t d = 0; d < dim; ++d) {
            model.input_vectors[row * dim + d] = static_cast<float>(
                (rng.uniform() - 0.5) / static_cast<double>(dim));
        }
    }
}

// ---- binary model format helpers (little-endian on any host) ----

void put_u32(std::ostream& out, std::uint32_t value) {
    char bytes[4];
    for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>(value >> (8 * i));
    out.write(bytes, 4);
}

void put_u64(std::ostream& out, std::uint64_t value) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>(value >> (8 * i));
    out.write(bytes, 8);
}

void put_f32(std::ostream& out, float value) {
    put_u32(out, std::bit_cast<std::uint32_t>(value));
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
        throw DataError("truncated embedding file: " + path);
    }
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i) value |= std::uint32_t{bytes[i]} << (8 * i);
    return value;
}

std::uint64_t get_u64(std::istream& in, const std::string& path) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
        throw DataError("truncated embedding file: " + path);
    }
    std::uint64_t value = 0;
    for (int i = 0; i < 8; ++i) value |= std::uint64_t{bytes[i]} << (8 * i);
    return value;
}

float get_f32(std::istream& in, const std::string& path) {
    return std::bit_cast<float>(get_u32(in, path));
}

}  // namespace

std::size_t EmbeddingModel::word_index(const std::string& word) const {
    if (index_.size() != vocabulary.size()) {  // unbuilt or stale
        index_.clear();
        for (std::size_t i = 0; i < vocabulary.size(); ++i) {
            index_.emplace(vocabulary[i], i);
        }
    }
    auto it = index_.find(word);
    return it == index_.end() ? npos : it->second;
}

const float* EmbeddingModel::vector_of(const std::string& word) const {
    const std::size_t index = word_index(word);
    if (index == npos) {
        throw DataError("word \"" + word + "\" is not in the vocabulary");
    }
    return &input_vectors[index * config.dim];
}

NegativeSampler::NegativeSampler(const std::vector<std::uint64_t>& counts) {
    double run = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) continue;
        run += std::pow(static_cast<double>(counts[i]), 0.75);
        cumulative_.push_back(run);
        candidates_.push_back(i);
    }
}

std::size_t NegativeSampler::draw(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    const auto it =
        std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const std::size_t offset = it == cumulative_.end()
                                   ? cumulative_.size() - 1
                                   : static_cast<std::size_t>(
                                         it - cumulative_.begin());
    return candidates_[offset];
}

EmbeddingModel train_sgns(const std::vector<corpus::TokenDocument>& docs,
                          const SgnsConfig& config) {
    if (config.dim < 1 || config.window < 1 || config.negatives < 1 ||
        config.learning_rate <= 0.0) {
        throw ConfigError("embedding dimensions, window, negatives and "
                          "learning rate must be positive");
    }
    if (docs.empty()) throw DataError("cannot train embeddings on an empty corpus");

    std::unordered_map<std::string, std::uint64_t> tally;
    for (const corpus::TokenDocument& doc : docs) {
        for (const std::string& token : doc.tokens) ++tally[token];
    }
    std::vector<std::pair<std::string, std::uint64_t>> kept;
    for (const auto& [word, count] : tally) {
        if (count >= config.min_count) kept.emplace_back(word, count);
    }
    if (kept.empty()) {
        throw DataError("no word reaches min_count " +
                        std::to_string(config.min_count));
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    EmbeddingModel model;
    model.config = config;
    model.vocabulary.reserve(kept.size());
    model.counts.reserve(kept.size());
    for (auto& [word, count] : kept) {
        model.vocabulary.push_back(std::move(word));
        model.counts.push_back(count);
    }
    model.input_vectors.assign(model.vocabulary.size() * config.dim, 0.0f);
    model.output_vectors.assign(model.vocabulary.size() * config.dim, 0.0f);

    Rng init_rng(derive_seed(config.seed, "sgns:init"));
    seed_input_rows(model, 0, init_rng);

    const TrainPlan plan = make_plan(docs, model);
    if (plan.tokens == 0) return model;
    const NegativeSampler sampler(model.counts);

    if (config.workers > 1) {
        train_hogwild(model, plan, sampler, config.epochs,
                      config.learning_rate, config.seed, config.workers);
    } else {
        Rng rng(derive_seed(config.seed, "sgns:train"));
        train_single(model, plan, sampler, config.epochs, config.learning_rate,
                     rng);
    }
    return model;
}

EmbeddingModel fine_tune(const EmbeddingModel& base,
                         const std::vector<corpus::TokenDocument>& docs,
                         std::size_t epochs, std::uint64_t seed) {
    EmbeddingModel model = base;
    model.config.seed = seed;
    model.config.epochs = epochs;

    std::unordered_map<std::string, std::uint64_t> tally;
    for (const corpus::TokenDocument& doc : docs) {
        for (const std::string& token : doc.tokens) ++tally[token];
    }
    if (tally.empty()) return model;  // nothing to learn from

    // Append unseen words that reach the vocabulary floor, most frequent
    // first; the base ordering is left untouched.
    std::vector<std::pair<std::string, std::uint64_t>> additions;
    for (const auto& [word, count] : tally) {
        if (count >= base.config.min_count &&
            base.word_index(word) == EmbeddingModel::npos) {
            additions.emplace_back(word, count);
        }
    }
    std::sort(additions.begin(), additions.end(),
              [](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second > b.second;
                  return a.first < b.first;
              });
    const std::size_t base_rows = model.vocabulary.size();
    for (auto& [word, count] : additions) {
        model.vocabulary.push_back(std::move(word));
        model.counts.push_back(0);  // accumulated below
    }
    model.input_vectors.resize(model.vocabulary.size() * model.config.dim,
                               0.0f);
    model.output_vectors.resize(model.vocabulary.size() * model.config.dim,
                                0.0f);

    Rng init_rng(derive_seed(seed, "sgns:init"));
    seed_input_rows(model, base_rows, init_rng);

    // Negative sampling over this corpus only: words it never uses keep
    // probability zero, so their rows cannot be written.
    std::vector<std::uint64_t> fresh_counts(model.vocabulary.size(), 0);
    for (const auto& [word, count] : tally) {
        const std::size_t index = model.word_index(word);
        if (index != EmbeddingModel::npos) {
            fresh_counts[index] = count;
            model.counts[index] += count;
        }
    }

    const TrainPlan plan = make_plan(docs, model);
    if (plan.tokens == 0) return model;
    const NegativeSampler sampler(fresh_counts);

    if (model.config.workers > 1) {
        train_hogwild(model, plan, sampler, epochs,
                      model.config.learning_rate, seed, model.config.workers);
    } else {
        Rng rng(derive_seed(seed, "sgns:train"));
        train_single(model, plan, sampler, epochs, model.config.learning_rate,
                     rng);
    }
    return model;
}

double cosine(const EmbeddingModel& model, const std::string& w1,
              const std::string& w2) {
    const float* a = model.vector_of(w1);
    const float* b = model.vector_of(w2);
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t d = 0; d < model.config.dim; ++d) {
        dot += static_cast<double>(a[d]) * b[d];
        na += static_cast<double>(a[d]) * a[d];
        nb += static_cast<double>(b[d]) * b[d];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

void save_embedding(const EmbeddingModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write embedding file: " + path);
    out.write("EMB1", 4);
    put_u32(out, static_cast<std::uint32_t>(model.config.dim));
    put_u64(out, model.vocabulary.size());
    const std::size_t dim = model.config.dim;
    for (std::size_t i = 0; i < model.vocabulary.size(); ++i) {
        const std::string& word = model.vocabulary[i];
        put_u32(out, static_cast<std::uint32_t>(word.size()));
        out.write(word.data(), static_cast<std::streamsize>(word.size()));
        put_u64(out, model.counts[i]);
        for (std::size_t d = 0; d < dim; ++d) {
            put_f32(out, model.input_vectors[i * dim + d]);
        }
        for (std::size_t d = 0; d < dim; ++d) {
            put_f32(out, model.output_vectors[i * dim + d]);
        }
    }
    if (!out) throw DataError("write failed: " + path);
}

EmbeddingModel load_embedding(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open embedding file: " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::string(magic, 4) != "EMB1") {
        throw DataError("not an embedding model file (bad magic): " + path);
    }
    EmbeddingModel model;
    model.config.dim = get_u32(in, path);
    const std::uint64_t vocab = get_u64(in, path);
    const std::size_t dim = model.config.dim;
    model.vocabulary.reserve(vocab);
    model.counts.reserve(vocab);
    model.input_vectors.resize(vocab * dim);
    model.output_vectors.resize(vocab * dim);
    for (std::uint64_t i = 0; i < vocab; ++i) {
        const std::uint32_t length = get_u32(in, path);
        std::string word(length, '\0');
        if (!in.read(word.data(), length)) {
            throw DataError("truncated embedding file: " + path);
        }
        model.vocabulary.push_back(std::move(word));
        model.counts.push_back(get_u64(in, path));
        for (std::size_t d = 0; d < dim; ++d) {
            model.input_vectors[i * dim + d] = get_f32(in, path);
        }
        for (std::size_t d = 0; d < dim; ++d) {
            model.output_vectors[i * dim + d] = get_f32(in, path);
        }
    }
    return model;
}

void save_embedding_text(const EmbeddingModel& model,
                         const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write embedding file: " + path);
    out << model.vocabulary.size() << ' ' << model.config.dim << '\n';
    char buffer[32];
    const std::size_t dim = model.config.dim;
    for (std::size_t i = 0; i < model.vocabulary.size(); ++i) {
        out << model.vocabulary[i];
        for (std::size_t d = 0; d < dim; ++d) {
            // nine significant digits reproduce any 32-bit real exactly
            std::snprintf(buffer, sizeof(buffer), "%.9g",
                          static_cast<double>(model.input_vectors[i * dim + d]));
            out << ' ' << buffer;
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

EmbeddingModel load_embedding_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open embedding file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty embedding file: " + path);
    std::size_t vocab = 0, dim = 0;
    {
        std::istringstream header(line);
        if (!(header >> vocab >> dim) || dim == 0) {
            throw DataError("malformed embedding header: " + path);
        }
    }
    EmbeddingModel model;
    model.config.dim = dim;
    model.vocabulary.reserve(vocab);
    model.counts.assign(vocab, 0);
    model.input_vectors.reserve(vocab * dim);
    for (std::size_t i = 0; i < vocab; ++i) {
        if (!std::getline(in, line)) {
            throw DataError("truncated embedding file: " + path);
        }
        std::istringstream row(line);
        std::string word;
        if (!(row >> word)) throw DataError("truncated embedding file: " + path);
        model.vocabulary.push_back(word);
        for (std::size_t d = 0; d < dim; ++d) {
            float value;
            if (!(row >> value)) {
                throw DataError("truncated vector for \"" + word + "\" in " +
                                path);
            }
            model.input_vectors.push_back(value);
        }
    }
    model.output_vectors.assign(vocab * dim, 0.0f);
    return model;
}

}  // namespace trilayer::sgns
