#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "trilayer/errors.hpp"
#include "trilayer/lexicon.hpp"
#include "trilayer/rng.hpp"

using namespace trilayer;
using namespace trilayer::lexicon;

namespace {

CategoryLexicon tiny_lexicon() {
    return CategoryLexicon::from_categories({
        {"kill", Polarity::negative, {"kill"}},
        {"love", Polarity::positive, {"love"}},
        {"hate", Polarity::negative, {"hate"}},
    });
}

corpus::TokenDocument doc_with(std::vector<std::string> tokens) {
    return corpus::TokenDocument{"v1", "c1", corpus::Source::caption,
                                 std::move(tokens)};
}

NormalizedCategoryVector nv(std::string video, corpus::Source source,
                            std::vector<double> fractions) {
    return NormalizedCategoryVector{std::move(video), source,
                                    std::move(fractions)};
}

// Independent direct-formula Pearson for oracle comparisons.
double pearson_oracle(const std::vector<double>& xs,
                      const std::vector<double>& ys) {
    double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxy += xs[i] * ys[i];
        sxx += xs[i] * xs[i];
        syy += ys[i] * ys[i];
    }
    return (n * sxy - sx * sy) /
           std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

}  // namespace

TEST_CASE("count_categories counts multiplicity per category") {
    auto lexicon = tiny_lexicon();
    auto cv = count_categories(doc_with({"kill", "kill", "love"}), lexicon);
    CHECK(cv.counts == std::vector<std::int64_t>{2, 1, 0});

    auto empty = count_categories(doc_with({}), lexicon);
    CHECK(empty.counts == std::vector<std::int64_t>{0, 0, 0});
}

TEST_CASE("a word in several categories increments each") {
    auto lexicon = CategoryLexicon::from_categories({
        {"anger", Polarity::negative, {"rage", "fury"}},
        {"rage", Polarity::negative, {"rage"}},
    });
    auto cv = count_categories(doc_with({"rage"}), lexicon);
    CHECK(cv.counts == std::vector<std::int64_t>{1, 1});
}

TEST_CASE("normalize_vector divides by the category sum") {
    CategoryVector cv{"v1", corpus::Source::caption, {2, 1, 0}};
    auto nv = normalize_vector(cv);
    CHECK(nv.fractions[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(nv.fractions[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(nv.fractions[2] == 0.0);

    CategoryVector single{"v1", corpus::Source::caption, {5, 0, 0}};
    CHECK(normalize_vector(single).fractions ==
          std::vector<double>{1.0, 0.0, 0.0});

    CategoryVector zero{"v1", corpus::Source::caption, {0, 0, 0}};
    CHECK_THROWS_AS(normalize_vector(zero), DataError);
}

TEST_CASE("normalized fractions sum to one") {
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        CategoryVector cv{"v", corpus::Source::caption, {}};
        for (int i = 0; i < 20; ++i) {
            cv.counts.push_back(static_cast<std::int64_t>(rng.uniform_int(50)));
        }
        cv.counts[0] += 1;  // keep the sum positive
        auto nv = normalize_vector(cv);
        double sum = 0;
        for (double f : nv.fractions) sum += f;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("aggregate_channel takes the componentwise mean") {
    auto source = corpus::Source::caption;
    auto cc = aggregate_channel(
        "c1", source, {nv("v1", source, {1, 0}), nv("v2", source, {0, 1})});
    CHECK(cc.means == std::vector<double>{0.5, 0.5});
    CHECK(cc.videos == 2);

    auto one = aggregate_channel("c1", source, {nv("v1", source, {0.3, 0.7})});
    CHECK(one.means == std::vector<double>{0.3, 0.7});

    auto three = aggregate_channel("c1", source,
                                   {nv("v1", source, {0.2, 0.8}),
                                    nv("v2", source, {0.4, 0.6}),
                                    nv("v3", source, {0.6, 0.4})});
    CHECK(three.means[0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(three.means[1] == doctest::Approx(0.6).epsilon(1e-12));

    CHECK_THROWS_AS(aggregate_channel("c1", source, {}), DataError);
}

TEST_CASE("aggregate_channel commutes with permutation of the videos") {
    auto source = corpus::Source::comments;
    std::vector<NormalizedCategoryVector> vectors{
        nv("v1", source, {0.1, 0.9}), nv("v2", source, {0.5, 0.5}),
        nv("v3", source, {0.25, 0.75}), nv("v4", source, {0.8, 0.2})};
    auto forward = aggregate_channel("c", source, vectors);
    Rng rng(5);
    rng.shuffle(vectors);
    auto permuted = aggregate_channel("c", source, vectors);
    for (std::size_t i = 0; i < forward.means.size(); ++i) {
        CHECK(forward.means[i] == doctest::Approx(permuted.means[i]).epsilon(1e-15));
    }
}

TEST_CASE("caption_comment_similarity evaluates the cosine") {
    auto cap = nv("v1", corpus::Source::caption, {0.5, 0.25, 0.25});
    auto com = nv("v1", corpus::Source::comments, {0.5, 0.25, 0.25});
    CHECK(caption_comment_similarity(cap, com).value ==
          doctest::Approx(1.0).epsilon(1e-12));

    auto a = nv("v1", corpus::Source::caption, {1, 0, 0});
    auto b = nv("v1", corpus::Source::comments, {0, 1, 0});
    CHECK(caption_comment_similarity(a, b).value == 0.0);

    auto c = nv("v1", corpus::Source::caption, {1, 0});
    auto d = nv("v1", corpus::Source::comments, {0.5, 0.5});
    CHECK(caption_comment_similarity(c, d).value ==
          doctest::Approx(0.7071).epsilon(1e-4));

    auto other = nv("v2", corpus::Source::comments, {1, 0});
    CHECK_THROWS_AS(caption_comment_similarity(c, other), DataError);
}

TEST_CASE("similarity is invariant to positive scaling of the counts") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        CategoryVector a{"v", corpus::Source::caption, {}};
        CategoryVector b{"v", corpus::Source::comments, {}};
        for (int i = 0; i < 8; ++i) {
            a.counts.push_back(static_cast<std::int64_t>(rng.uniform_int(9)));
            b.counts.push_back(static_cast<std::int64_t>(rng.uniform_int(9)));
        }
        a.counts[trial % 8] += 1;
        b.counts[(trial + 3) % 8] += 1;

        CategoryVector a_scaled = a;
        for (auto& count : a_scaled.counts) count *= 7;

        double plain = caption_comment_similarity(normalize_vector(a),
                                                  normalize_vector(b))
                           .value;
        double scaled = caption_comment_similarity(normalize_vector(a_scaled),
                                                   normalize_vector(b))
                            .value;
        CHECK(plain == doctest::Approx(scaled).epsilon(1e-12));
    }
}

TEST_CASE("similarity matches a direct dot-product oracle on random pairs") {
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> raw_a, raw_b;
        double sum_a = 0, sum_b = 0;
        for (int i = 0; i < 12; ++i) {
            raw_a.push_back(rng.uniform());
            raw_b.push_back(rng.uniform());
            sum_a += raw_a.back();
            sum_b += raw_b.back();
        }
        for (double& v : raw_a) v /= sum_a;
        for (double& v : raw_b) v /= sum_b;

        double got = caption_comment_similarity(
                         nv("v", corpus::Source::caption, raw_a),
                         nv("v", corpus::Source::comments, raw_b))
                         .value;

        double dot = 0, na = 0, nb = 0;
        for (int i = 0; i < 12; ++i) {
            dot += raw_a[i] * raw_b[i];
            na += raw_a[i] * raw_a[i];
            nb += raw_b[i] * raw_b[i];
        }
        double want = dot / (std::sqrt(na) * std::sqrt(nb));
        CHECK(got >= 0.0);
        CHECK(got <= 1.0);
        CHECK(got == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("pearson_correlation recovers exact and hand-computed r") {
    std::vector<double> xs{1, 2, 3, 4, 5};
    auto self = pearson_correlation(xs, xs, 100, 1);
    CHECK(self.r == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> neg;
    for (double x : xs) neg.push_back(-x + 7);
    CHECK(pearson_correlation(xs, neg, 100, 1).r ==
          doctest::Approx(-1.0).epsilon(1e-12));

    auto hand = pearson_correlation({1, 2, 3}, {2, 4, 7}, 100, 1);
    CHECK(hand.r == doctest::Approx(0.9934).epsilon(1e-3));
}

TEST_CASE("pearson_correlation rejects bad input") {
    CHECK_THROWS_AS(pearson_correlation({1, 2}, {1, 2, 3}, 10, 1), DataError);
    CHECK_THROWS_AS(pearson_correlation({1, 2}, {3, 4}, 10, 1), DataError);
    CHECK_THROWS_AS(pearson_correlation({1, 1, 1}, {1, 2, 3}, 10, 1),
                    DataError);
    CHECK_THROWS_AS(pearson_correlation({1, 2, 3}, {4, 4, 4}, 10, 1),
                    DataError);
}

TEST_CASE("pearson r is invariant under positive affine transforms") {
    std::vector<double> xs{0.3, 1.7, 0.9, 2.4, 1.1, 0.05};
    std::vector<double> ys{4.0, 2.2, 5.1, 1.9, 3.3, 4.4};
    double base = pearson_correlation(xs, ys, 10, 9).r;
    std::vector<double> xs2, ys2;
    for (double x : xs) xs2.push_back(3.5 * x + 11.0);
    for (double y : ys) ys2.push_back(0.25 * y - 2.0);
    CHECK(pearson_correlation(xs2, ys, 10, 9).r ==
          doctest::Approx(base).epsilon(1e-12));
    CHECK(pearson_correlation(xs, ys2, 10, 9).r ==
          doctest::Approx(base).epsilon(1e-12));
    CHECK(pearson_correlation(xs2, ys2, 10, 9).r ==
          doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("permutation p-value is reproducible and well calibrated") {
    std::vector<double> xs{1, 2, 3};
    auto a = pearson_correlation(xs, xs, 10000, 77);
    auto b = pearson_correlation(xs, xs, 10000, 77);
    CHECK(a.p == b.p);  // bit-for-bit given (seed, permutations)

    // For xs = ys = (1,2,3), exactly 2 of the 6 orderings reach |r| = 1,
    // so the sampled p must concentrate near 1/3.
    CHECK(a.p > 0.30);
    CHECK(a.p < 0.37);

    auto c = pearson_correlation(xs, xs, 10000, 78);
    CHECK(c.p != a.p);  // different seed, different sample
}

TEST_CASE("median_difference_test") {
    auto equal = median_difference_test({1, 2, 3}, {1, 2, 3}, 200, 4);
    CHECK(equal.difference == 0.0);
    CHECK(equal.p == 1.0);  // every resample ties or beats a zero difference

    // Exact enumeration over the C(8,4) = 70 splits: 4 of them reach
    // |median difference| >= 9 (swapping the two extreme elements across
    // groups moves neither median), so p concentrates near 4/70 = 0.0571.
    auto apart = median_difference_test({10, 11, 12, 13}, {1, 2, 3, 4}, 2000, 4);
    CHECK(apart.difference == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(apart.p > 0.04);
    CHECK(apart.p < 0.08);

    auto again = median_difference_test({10, 11, 12, 13}, {1, 2, 3, 4}, 2000, 4);
    CHECK(again.p == apart.p);

    CHECK_THROWS_AS(median_difference_test({}, {1.0}, 10, 1), DataError);
}

TEST_CASE("correlation_table flags a constructed identity") {
    // Six channels whose mean similarity equals their "violence" fraction
    // exactly; values chosen non-symmetric so only the identity ordering
    // reproduces |r| = 1 under permutation.
    std::vector<double> values{0.10, 0.22, 0.35, 0.51, 0.70, 0.93};
    std::vector<ChannelProfile> profiles;
    for (std::size_t i = 0; i < values.size(); ++i) {
        ChannelProfile profile;
        profile.channel_id = "c" + std::to_string(i);
        profile.group = "rightwing";
        profile.source = corpus::Source::caption;
        profile.means = {values[i], 1.0 - values[i]};
        profile.mean_similarity = values[i];
        profiles.push_back(profile);
    }
    auto rows = correlation_table(profiles, {"violence", "joy"}, 10000, 123);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].category == "violence");
    REQUIRE(rows[0].r.has_value());
    CHECK(*rows[0].r == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rows[0].significant);
    REQUIRE(rows[1].r.has_value());
    CHECK(*rows[1].r == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("correlation_table emits null rows for small groups") {
    std::vector<ChannelProfile> profiles;
    for (int i = 0; i < 2; ++i) {
        ChannelProfile profile;
        profile.channel_id = "c" + std::to_string(i);
        profile.group = "baseline";
        profile.source = corpus::Source::comments;
        profile.means = {0.1 * i + 0.1};
        profile.mean_similarity = 0.2 * i + 0.3;
        profiles.push_back(profile);
    }
    auto rows = correlation_table(profiles, {"violence"}, 100, 1);
    REQUIRE(rows.size() == 1);
    CHECK_FALSE(rows[0].r.has_value());
    CHECK_FALSE(rows[0].significant);
    CHECK(rows[0].diagnostic.find("2") != std::string::npos);
}

TEST_CASE("correlation_table r matches an independent recomputation") {
    Rng rng(31);
    std::vector<ChannelProfile> profiles;
    std::vector<double> xs, ys;
    for (int i = 0; i < 5; ++i) {
        ChannelProfile profile;
        profile.channel_id = "c" + std::to_string(i);
        profile.group = "g";
        profile.source = corpus::Source::caption;
        double fraction = rng.uniform();
        profile.means = {fraction, 1.0 - fraction};
        profile.mean_similarity = rng.uniform();
        xs.push_back(profile.mean_similarity);
        ys.push_back(fraction);
        profiles.push_back(profile);
    }
    auto rows = correlation_table(profiles, {"cat0", "cat1"}, 50, 7);
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[0].r.has_value());
    CHECK(*rows[0].r == doctest::Approx(pearson_oracle(xs, ys)).epsilon(1e-12));
}

TEST_CASE("lexicon file round-trip and importer") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path();
    fs::path lexicon_path = dir / "trilayer_lexicon_test.tsv";
    fs::path lists_path = dir / "trilayer_lists_test.tsv";

    auto lexicon = tiny_lexicon();
    lexicon.save(lexicon_path.string());
    auto reloaded = CategoryLexicon::from_file(lexicon_path.string());
    REQUIRE(reloaded.size() == 3);
    CHECK(reloaded.categories()[0].name == "kill");
    CHECK(reloaded.categories()[1].polarity == Polarity::positive);
    CHECK(reloaded.categories()[2].words == std::vector<std::string>{"hate"});

    {
        std::ofstream out(lists_path);
        out << "violence\tkill\tfight\tblood\n";
        out << "ignored\tfoo\tbar\n";
        out << "joy\thappy\tcheer\n";
    }
    auto imported = CategoryLexicon::import_category_lists(
        lists_path.string(), {"violence"}, {"joy"});
    REQUIRE(imported.size() == 2);
    CHECK(imported.categories()[0].name == "violence");
    CHECK(imported.categories()[0].polarity == Polarity::negative);
    CHECK(imported.categories()[0].words ==
          std::vector<std::string>{"kill", "fight", "blood"});
    CHECK(imported.categories()[1].name == "joy");
    CHECK(imported.categories()[1].polarity == Polarity::positive);

    CHECK_THROWS_AS(CategoryLexicon::import_category_lists(
                        lists_path.string(), {"missing_cat"}, {}),
                    DataError);

    fs::remove(lexicon_path);
    fs::remove(lists_path);
}

TEST_CASE("default category lists carry 15 negative and 5 positive names") {
    CHECK(default_negative_categories().size() == 15);
    CHECK(default_positive_categories().size() == 5);
}

TEST_CASE("lexicon construction rejects duplicates and empty word sets") {
    CHECK_THROWS_AS(CategoryLexicon::from_categories(
                        {{"a", Polarity::negative, {"x"}},
                         {"a", Polarity::positive, {"y"}}}),
                    DataError);
    CHECK_THROWS_AS(CategoryLexicon::from_categories(
                        {{"a", Polarity::negative, {}}}),
                    DataError);
}
