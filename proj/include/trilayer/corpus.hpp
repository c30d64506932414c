#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace trilayer::corpus {

// Which side of a video a document came from.
enum class Source { caption, comments };

std::string to_string(Source source);
Source source_from_string(const std::string& text);

struct Channel {
    std::string id;
    std::string name;
    std::string group;  // free-form group tag, e.g. "rightwing" / "baseline"
    std::optional<std::uint64_t> subscribers;
};

// One unit of raw text: a video's caption or its pooled comments.
struct RawDocument {
    std::string video_id;
    std::string channel_id;
    Source source = Source::caption;
    std::string text;
};

struct TokenDocument {
    std::string video_id;
    std::string channel_id;
    Source source = Source::caption;
    std::vector<std::string> tokens;
};

using Stoplist = std::unordered_set<std::string>;
using LemmaTable = std::unordered_map<std::string, std::string>;

// Maps a text to the probability that it is in the target language.
using LanguageClassifier = std::function<double(const std::string&)>;

struct Corpus {
    std::vector<Channel> channels;
    std::vector<RawDocument> documents;

    const Channel* find_channel(const std::string& id) const;
};

// Removes <...> spans (each replaced by a single space) and whitespace
// delimited tokens starting with http://, https:// or www. (each dropped,
// the surrounding whitespace keeps the neighbours separated). All other
// characters are preserved in order.
std::string strip_markup(const std::string& text);

// Keeps exactly the documents whose classifier score reaches the
// threshold (inclusive), preserving order.
std::vector<RawDocument> language_filter(const std::vector<RawDocument>& docs,
                                         const LanguageClassifier& classifier,
                                         double threshold = 0.8);

// Lowercases, strips punctuation (ASCII set plus common Unicode
// punctuation blocks; characters are deleted, so "don't" becomes "dont"),
// splits on whitespace runs and drops stoplist members.
std::vector<std::string> preprocess_tokens(const std::string& text,
                                           const Stoplist& stoplist);

// Replaces each token by its dictionary lemma when present; unknown
// tokens pass through unchanged.
std::vector<std::string> lemmatize(const std::vector<std::string>& tokens,
                                   const LemmaTable& lemmas);

// Reads the line-delimited JSON ingestion format: channel records
// followed by document records. Throws DataError with the line number on
// malformed records, unknown channel references and duplicate
// (video_id, source) pairs.
Corpus load_corpus(const std::string& path);

// One word per line, UTF-8. '#' lines are comments.
Stoplist load_stoplist(const std::string& path);

// One surface<TAB>lemma pair per line, UTF-8.
LemmaTable load_lemma_table(const std::string& path);

// Bundled language scorer: the share of a text's alphabetic tokens found
// in an English function-word list, rescaled so that 40% coverage (a
// typical share for running English prose) already maps to 1.0. Serves as
// the default LanguageClassifier; any replacement can be injected.
double english_probability(const std::string& text);

}  // namespace trilayer::corpus
