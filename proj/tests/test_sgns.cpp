#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "trilayer/errors.hpp"
#include "trilayer/rng.hpp"
#include "trilayer/sgns.hpp"

using namespace trilayer;
using namespace trilayer::sgns;

namespace {

corpus::TokenDocument doc_of(std::string video,
                             std::vector<std::string> tokens) {
    return corpus::TokenDocument{std::move(video), "c1",
                                 corpus::Source::caption, std::move(tokens)};
}

// 2,000 short sentences: {x1,x2} always co-occur, {y1,y2} always co-occur,
// never across pairs; filler words keep the contexts busy.
std::vector<corpus::TokenDocument> planted_pairs(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<corpus::TokenDocument> docs;
    for (int i = 0; i < 2000; ++i) {
        std::vector<std::string> tokens;
        const bool x_side = (i % 2 == 0);
        for (int j = 0; j < 3; ++j) {
            if (x_side) {
                tokens.push_back("x1");
                tokens.push_back("x2");
                tokens.push_back("fx" + std::to_string(rng.uniform_int(5)));
            } else {
                tokens.push_back("y1");
                tokens.push_back("y2");
                tokens.push_back("fy" + std::to_string(rng.uniform_int(5)));
            }
        }
        docs.push_back(doc_of("v" + std::to_string(i), std::move(tokens)));
    }
    return docs;
}

SgnsConfig small_config() {
    SgnsConfig config;
    config.dim = 16;
    config.window = 3;
    config.negatives = 4;
    config.epochs = 3;
    config.min_count = 2;
    config.seed = 7;
    return config;
}

}  // namespace

TEST_CASE("planted co-occurrence pairs end up close") {
    auto docs = planted_pairs(1);
    auto model = train_sgns(docs, small_config());

    CHECK(cosine(model, "x1", "x2") > cosine(model, "x1", "y1"));
    CHECK(cosine(model, "y1", "y2") > cosine(model, "x1", "y1"));
}

TEST_CASE("training is deterministic for one worker") {
    auto docs = planted_pairs(1);
    auto a = train_sgns(docs, small_config());
    auto b = train_sgns(docs, small_config());
    CHECK(a.vocabulary == b.vocabulary);
    CHECK(a.input_vectors == b.input_vectors);
    CHECK(a.output_vectors == b.output_vectors);

    SgnsConfig other = small_config();
    other.seed = 8;
    auto c = train_sgns(docs, other);
    CHECK(a.input_vectors != c.input_vectors);
}

TEST_CASE("vocabulary keeps only words reaching min_count, most frequent first") {
    std::vector<corpus::TokenDocument> docs{
        doc_of("v1", {"b", "b", "a", "a", "a", "once", "b", "tie1", "tie2",
                      "tie1", "tie2"})};
    SgnsConfig config = small_config();
    config.min_count = 2;
    auto model = train_sgns(docs, config);
    REQUIRE(model.vocabulary.size() == 4);
    CHECK(model.vocabulary[0] == "a");   // 3
    CHECK(model.vocabulary[1] == "b");   // 3 — tie broken to "a" first
    CHECK(model.vocabulary[2] == "tie1");
    CHECK(model.vocabulary[3] == "tie2");
    CHECK(model.counts == std::vector<std::uint64_t>{3, 3, 2, 2});
    CHECK(model.word_index("once") == EmbeddingModel::npos);

    config.min_count = 100;
    CHECK_THROWS_AS(train_sgns(docs, config), DataError);
    CHECK_THROWS_AS(train_sgns({}, config), DataError);
}

TEST_CASE("all vector entries stay finite") {
    auto docs = planted_pairs(2);
    SgnsConfig config = small_config();
    config.learning_rate = 0.05;
    auto model = train_sgns(docs, config);
    for (float v : model.input_vectors) CHECK(std::isfinite(v));
    for (float v : model.output_vectors) CHECK(std::isfinite(v));
}

TEST_CASE("negative sampler tracks the unigram^0.75 distribution") {
    std::vector<std::uint64_t> counts;
    double total_weight = 0.0;
    for (int i = 0; i < 10; ++i) {
        counts.push_back(static_cast<std::uint64_t>(10 + 90 * i));
        total_weight += std::pow(static_cast<double>(counts.back()), 0.75);
    }
    NegativeSampler sampler(counts);
    Rng rng(55);
    std::vector<int> hits(10, 0);
    const int draws = 1000000;
    for (int i = 0; i < draws; ++i) hits[sampler.draw(rng)] += 1;
    for (int i = 0; i < 10; ++i) {
        double expected =
            std::pow(static_cast<double>(counts[i]), 0.75) / total_weight;
        double observed = static_cast<double>(hits[i]) / draws;
        CHECK(std::abs(observed - expected) < 0.01);
    }
}

TEST_CASE("negative sampler skips zero-count words") {
    std::vector<std::uint64_t> counts{0, 5, 0, 3, 0};
    NegativeSampler sampler(counts);
    Rng rng(9);
    for (int i = 0; i < 1000; ++i) {
        std::size_t draw = sampler.draw(rng);
        CHECK((draw == 1 || draw == 3));
    }
}

TEST_CASE("cosine evaluates the standard formula") {
    EmbeddingModel model;
    model.config.dim = 2;
    model.vocabulary = {"right", "up", "diag"};
    model.counts = {1, 1, 1};
    model.input_vectors = {1, 0, 0, 1, 1, 1};
    model.output_vectors = {0, 0, 0, 0, 0, 0};

    CHECK(cosine(model, "right", "right") == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cosine(model, "right", "up") == 0.0);
    CHECK(cosine(model, "diag", "right") == doctest::Approx(0.7071).epsilon(1e-4));
    CHECK_THROWS_WITH_AS(cosine(model, "right", "ghost"),
                         doctest::Contains("ghost"), DataError);
}

TEST_CASE("fine_tune on an empty corpus returns the base unchanged") {
    auto docs = planted_pairs(3);
    auto base = train_sgns(docs, small_config());
    auto tuned = fine_tune(base, {}, 3, 99);
    CHECK(tuned.vocabulary == base.vocabulary);
    CHECK(tuned.counts == base.counts);
    CHECK(tuned.input_vectors == base.input_vectors);
    CHECK(tuned.output_vectors == base.output_vectors);
}

TEST_CASE("fine_tune leaves words outside the new corpus bit-identical") {
    auto docs = planted_pairs(3);
    auto base = train_sgns(docs, small_config());

    std::vector<corpus::TokenDocument> fresh;
    for (int i = 0; i < 50; ++i) {
        fresh.push_back(doc_of("n" + std::to_string(i),
                               {"x1", "newword", "x1", "newword"}));
    }
    auto tuned = fine_tune(base, fresh, 2, 4);

    // union vocabulary: base order first, then the addition
    REQUIRE(tuned.vocabulary.size() == base.vocabulary.size() + 1);
    for (std::size_t i = 0; i < base.vocabulary.size(); ++i) {
        CHECK(tuned.vocabulary[i] == base.vocabulary[i]);
    }
    CHECK(tuned.vocabulary.back() == "newword");

    const std::size_t dim = base.config.dim;
    std::size_t touched = 0;
    for (std::size_t i = 0; i < base.vocabulary.size(); ++i) {
        bool same = true;
        for (std::size_t d = 0; d < dim; ++d) {
            if (tuned.input_vectors[i * dim + d] !=
                    base.input_vectors[i * dim + d] ||
                tuned.output_vectors[i * dim + d] !=
                    base.output_vectors[i * dim + d]) {
                same = false;
            }
        }
        if (!same) ++touched;
        if (base.vocabulary[i] != "x1") {
            CHECK(same);  // only x1 appears in the new text
        }
    }
    CHECK(touched == 1);  // x1 must actually have moved

    // counts accumulate new exposures
    const std::size_t x1 = tuned.word_index("x1");
    CHECK(tuned.counts[x1] == base.counts[base.word_index("x1")] + 100);
}

TEST_CASE("fine_tune pulls a reversed pairing together") {
    auto docs = planted_pairs(3);
    auto base = train_sgns(docs, small_config());
    const double before = cosine(base, "x1", "y1");

    // New text re-pairs x1 into y1's old role: partnered with y2 inside
    // the fy contexts, while y1 itself never appears (so its vectors stay
    // frozen). Input-vector similarity follows shared contexts, so x1
    // must drift toward where y1 already sits.
    std::vector<corpus::TokenDocument> reversal;
    for (int i = 0; i < 400; ++i) {
        auto fy = [&](int j) { return "fy" + std::to_string((i + j) % 5); };
        reversal.push_back(doc_of(
            "r" + std::to_string(i),
            {"x1", "y2", fy(0), "x1", "y2", fy(1), "x1", "y2", fy(2)}));
    }
    auto tuned = fine_tune(base, reversal, 3, 11);
    CHECK(cosine(tuned, "x1", "y1") > before);
}

TEST_CASE("fine_tune is deterministic given the seed") {
    auto docs = planted_pairs(4);
    auto base = train_sgns(docs, small_config());
    std::vector<corpus::TokenDocument> fresh{
        doc_of("n1", {"x1", "x2", "x1", "x2", "zz", "zz"})};
    auto a = fine_tune(base, fresh, 2, 123);
    auto b = fine_tune(base, fresh, 2, 123);
    CHECK(a.vocabulary == b.vocabulary);
    CHECK(a.input_vectors == b.input_vectors);
    CHECK(a.output_vectors == b.output_vectors);
}

TEST_CASE("binary model files round-trip bit-exactly") {
    auto docs = planted_pairs(5);
    auto model = train_sgns(docs, small_config());

    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / "trilayer_empb_roundtrip.bin";
    save_embedding(model, path.string());
    auto loaded = load_embedding(path.string());
    fs::remove(path);

    CHECK(loaded.config.dim == model.config.dim);
    CHECK(loaded.vocabulary == model.vocabulary);
    CHECK(loaded.counts == model.counts);
    CHECK(loaded.input_vectors == model.input_vectors);
    CHECK(loaded.output_vectors == model.output_vectors);
}

TEST_CASE("text model files round-trip the input vectors") {
    auto docs = planted_pairs(5);
    auto model = train_sgns(docs, small_config());

    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / "trilayer_embt_roundtrip.txt";
    save_embedding_text(model, path.string());
    auto loaded = load_embedding_text(path.string());
    fs::remove(path);

    CHECK(loaded.vocabulary == model.vocabulary);
    REQUIRE(loaded.input_vectors.size() == model.input_vectors.size());
    for (std::size_t i = 0; i < model.input_vectors.size(); ++i) {
        CHECK(std::abs(loaded.input_vectors[i] - model.input_vectors[i]) <=
              1e-6);
    }
}

TEST_CASE("embedding loader rejects foreign and truncated files") {
    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / "trilayer_emb_bad.bin";
    {
        std::ofstream out(path, std::ios::binary);
        out << "NOPE and some bytes";
    }
    CHECK_THROWS_WITH_AS(load_embedding(path.string()),
                         doctest::Contains("magic"), DataError);
    {
        std::ofstream out(path, std::ios::binary);
        out << "EMB1";  // header cut off
    }
    CHECK_THROWS_WITH_AS(load_embedding(path.string()),
                         doctest::Contains("truncated"), DataError);
    fs::remove(path);
    CHECK_THROWS_AS(load_embedding(path.string()), DataError);
}

TEST_CASE("initialization ranges follow the declared scheme") {
    auto docs = planted_pairs(6);
    SgnsConfig config = small_config();
    config.epochs = 0;  // initialization only
    auto model = train_sgns(docs, config);
    const double bound = 0.5 / static_cast<double>(config.dim);
    bool any_nonzero = false;
    for (float v : model.input_vectors) {
        CHECK(v >= -bound);
        CHECK(v <= bound);
        if (v != 0.0f) any_nonzero = true;
    }
    CHECK(any_nonzero);
    for (float v : model.output_vectors) CHECK(v == 0.0f);
}

TEST_CASE("multi-worker mode trains a usable model") {
    auto docs = planted_pairs(8);
    SgnsConfig config = small_config();
    config.workers = 4;
    auto model = train_sgns(docs, config);
    CHECK(cosine(model, "x1", "x2") > cosine(model, "x1", "y1"));
    for (float v : model.input_vectors) CHECK(std::isfinite(v));
}
