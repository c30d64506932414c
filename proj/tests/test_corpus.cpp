#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "trilayer/corpus.hpp"
#include "trilayer/errors.hpp"

using namespace trilayer;
using namespace trilayer::corpus;

namespace {

// Writes content to a unique file under the build's temp dir and returns
// the path; the file is removed when the guard goes out of scope.
struct TempFile {
    std::filesystem::path path;
    explicit TempFile(const std::string& content) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("trilayer_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++) + ".tmp");
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::filesystem::remove(path); }
};

RawDocument doc(std::string video, std::string channel, Source source,
                std::string text) {
    return RawDocument{std::move(video), std::move(channel), source,
                       std::move(text)};
}

}  // namespace

TEST_CASE("strip_markup removes tags and url tokens") {
    CHECK(strip_markup("<b>hi</b> see http://x.com now") == " hi  see  now");
    CHECK(strip_markup("plain text") == "plain text");
    CHECK(strip_markup("<a href='u'>link</a>") == " link ");
    CHECK(strip_markup("") == "");
    CHECK(strip_markup("go to https://a.b and www.c.d end") ==
          "go to  and  end");
}

TEST_CASE("strip_markup is idempotent") {
    for (const char* text :
         {"<b>hi</b> see http://x.com now", "plain text",
          "<a href='u'>link</a>", "x < y and z > w", "www.only.url"}) {
        std::string once = strip_markup(text);
        CHECK(strip_markup(once) == once);
    }
}

TEST_CASE("language_filter keeps documents at or above the threshold") {
    auto classifier = [](const std::string& text) {
        return text == "hi" ? 0.80 : 0.79;
    };
    std::vector<RawDocument> docs{doc("v1", "c1", Source::caption, "hi"),
                                  doc("v2", "c1", Source::caption, "lo")};

    auto kept = language_filter(docs, classifier, 0.8);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].video_id == "v1");  // 0.80 is inclusive, 0.79 is not

    CHECK(language_filter(docs, classifier, 0.0).size() == 2);
    CHECK(language_filter(docs, classifier, 1.1).empty());
}

TEST_CASE("language_filter preserves order and is idempotent") {
    auto classifier = [](const std::string& text) {
        return static_cast<double>(text.size()) / 10.0;
    };
    std::vector<RawDocument> docs{doc("v1", "c", Source::caption, "aaaaaaaaa"),
                                  doc("v2", "c", Source::caption, "a"),
                                  doc("v3", "c", Source::caption, "aaaaaaaaaa")};
    auto kept = language_filter(docs, classifier, 0.8);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].video_id == "v1");
    CHECK(kept[1].video_id == "v3");
    auto twice = language_filter(kept, classifier, 0.8);
    CHECK(twice.size() == kept.size());
}

TEST_CASE("preprocess_tokens lowers, strips punctuation, splits, stops") {
    Stoplist empty;
    CHECK(preprocess_tokens("Hello,   World!", empty) ==
          std::vector<std::string>{"hello", "world"});
    Stoplist the{"the"};
    CHECK(preprocess_tokens("the cat", the) == std::vector<std::string>{"cat"});
    CHECK(preprocess_tokens("", empty).empty());
    CHECK(preprocess_tokens("don't", empty) ==
          std::vector<std::string>{"dont"});
    CHECK(preprocess_tokens("a\tb\nc  d", empty) ==
          std::vector<std::string>{"a", "b", "c", "d"});
}

TEST_CASE("re-tokenizing joined tokens reproduces the token list") {
    Stoplist stop{"the", "a"};
    for (const char* text :
         {"Hello,   World!", "the cat sat; on a mat.", "don't stop me now",
          "Mixed CASE with 123 numbers!"}) {
        auto tokens = preprocess_tokens(text, stop);
        std::string joined;
        for (const auto& token : tokens) {
            if (!joined.empty()) joined += ' ';
            joined += token;
        }
        CHECK(preprocess_tokens(joined, stop) == tokens);
    }
}

TEST_CASE("lemmatize replaces known forms and passes unknowns through") {
    LemmaTable table{{"cats", "cat"}, {"running", "run"}};
    CHECK(lemmatize({"cats"}, table) == std::vector<std::string>{"cat"});
    CHECK(lemmatize({"running"}, table) == std::vector<std::string>{"run"});
    CHECK(lemmatize({"zzyx"}, table) == std::vector<std::string>{"zzyx"});
    CHECK(lemmatize({"cats", "zzyx", "running"}, table) ==
          std::vector<std::string>{"cat", "zzyx", "run"});
    // idempotent because lemma outputs are their own fixed points here
    auto once = lemmatize({"cats", "running", "cat"}, table);
    CHECK(lemmatize(once, table) == once);
}

TEST_CASE("load_corpus reads channels then documents") {
    TempFile file(
        R"({"type":"channel","id":"c1","name":"Chan One","group":"rightwing","subscribers":1000}
{"type":"channel","id":"c2","name":"Chan Two","group":"baseline"}
{"type":"doc","video_id":"v1","channel_id":"c1","source":"caption","text":"hello"}
{"type":"doc","video_id":"v1","channel_id":"c1","source":"comments","text":"hi there"}
{"type":"doc","video_id":"v2","channel_id":"c2","source":"caption","text":"more"}
{"type":"doc","video_id":"v2","channel_id":"c2","source":"comments","text":"words"}
)");
    Corpus corpus = load_corpus(file.path.string());
    REQUIRE(corpus.channels.size() == 2);
    REQUIRE(corpus.documents.size() == 4);
    CHECK(corpus.channels[0].id == "c1");
    CHECK(corpus.channels[0].group == "rightwing");
    REQUIRE(corpus.channels[0].subscribers.has_value());
    CHECK(*corpus.channels[0].subscribers == 1000);
    CHECK_FALSE(corpus.channels[1].subscribers.has_value());
    CHECK(corpus.documents[1].source == Source::comments);
    CHECK(corpus.find_channel("c2") != nullptr);
    CHECK(corpus.find_channel("nope") == nullptr);
}

TEST_CASE("load_corpus rejects unknown channel references") {
    TempFile file(
        R"({"type":"channel","id":"c1","name":"n","group":"g"}
{"type":"doc","video_id":"v1","channel_id":"ghost","source":"caption","text":"x"}
)");
    CHECK_THROWS_WITH_AS(load_corpus(file.path.string()),
                         doctest::Contains("ghost"), DataError);
}

TEST_CASE("load_corpus rejects duplicate (video_id, source) pairs") {
    TempFile file(
        R"({"type":"channel","id":"c1","name":"n","group":"g"}
{"type":"doc","video_id":"v1","channel_id":"c1","source":"caption","text":"x"}
{"type":"doc","video_id":"v1","channel_id":"c1","source":"caption","text":"y"}
)");
    CHECK_THROWS_AS(load_corpus(file.path.string()), DataError);
}

TEST_CASE("load_corpus reports the line number of malformed records") {
    TempFile file(
        R"({"type":"channel","id":"c1","name":"n","group":"g"}
{"type":"doc","video_id":"v1"
)");
    CHECK_THROWS_WITH_AS(load_corpus(file.path.string()),
                         doctest::Contains(":2:"), DataError);
}

TEST_CASE("load_corpus validates fields") {
    SUBCASE("bad source value") {
        TempFile file(
            R"({"type":"channel","id":"c1","name":"n","group":"g"}
{"type":"doc","video_id":"v1","channel_id":"c1","source":"capt","text":"x"}
)");
        CHECK_THROWS_AS(load_corpus(file.path.string()), DataError);
    }
    SUBCASE("duplicate channel id") {
        TempFile file(
            R"({"type":"channel","id":"c1","name":"n","group":"g"}
{"type":"channel","id":"c1","name":"m","group":"g"}
)");
        CHECK_THROWS_AS(load_corpus(file.path.string()), DataError);
    }
    SUBCASE("empty group") {
        TempFile file(R"({"type":"channel","id":"c1","name":"n","group":""}
)");
        CHECK_THROWS_AS(load_corpus(file.path.string()), DataError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_corpus("/nonexistent/path.jsonl"), DataError);
    }
}

TEST_CASE("stoplist and lemma table loaders") {
    TempFile stop("# comment\nthe\nand\n\nof\n");
    Stoplist stoplist = load_stoplist(stop.path.string());
    CHECK(stoplist.size() == 3);
    CHECK(stoplist.count("the") == 1);
    CHECK(stoplist.count("# comment") == 0);

    TempFile lemmas("cats\tcat\nrunning\trun\n");
    LemmaTable table = load_lemma_table(lemmas.path.string());
    CHECK(table.size() == 2);
    CHECK(table.at("cats") == "cat");

    TempFile bad("no-tab-here\n");
    CHECK_THROWS_AS(load_lemma_table(bad.path.string()), DataError);
}

TEST_CASE("english_probability scores prose by function-word share") {
    CHECK(english_probability(
              "the cat is on the mat and it is very happy to be here") >= 0.8);
    CHECK(english_probability("zzz qqq vvv kkk xxx") < 0.8);
    CHECK(english_probability("") == 0.0);
    double p = english_probability("some words");
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
}
