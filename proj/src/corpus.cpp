#include "trilayer/corpus.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <string_view>

#include <json.hpp>

#include "trilayer/errors.hpp"

namespace trilayer::corpus {

namespace {

// Decodes one UTF-8 sequence starting at `i`. Invalid bytes are consumed
// one at a time and reported as U+FFFD so callers copy them through.
std::size_t decode_utf8(std::string_view text, std::size_t i, char32_t& cp) {
    const auto byte = [&](std::size_t k) {
        return static_cast<unsigned char>(text[i + k]);
    };
    const auto is_cont = [&](std::size_t k) {
        return i + k < text.size() && (byte(k) & 0xC0) == 0x80;
    };
    unsigned char b0 = byte(0);
    if (b0 < 0x80) {
        cp = b0;
        return 1;
    }
    if ((b0 & 0xE0) == 0xC0 && is_cont(1)) {
        cp = (char32_t(b0 & 0x1F) << 6) | (byte(1) & 0x3F);
        return 2;
    }
    if ((b0 & 0xF0) == 0xE0 && is_cont(1) && is_cont(2)) {
        cp = (char32_t(b0 & 0x0F) << 12) | (char32_t(byte(1) & 0x3F) << 6) |
             (byte(2) & 0x3F);
        return 3;
    }
    if ((b0 & 0xF8) == 0xF0 && is_cont(1) && is_cont(2) && is_cont(3)) {
        cp = (char32_t(b0 & 0x07) << 18) | (char32_t(byte(1) & 0x3F) << 12) |
             (char32_t(byte(2) & 0x3F) << 6) | (byte(3) & 0x3F);
        return 4;
    }
    cp = 0xFFFD;
    return 1;
}

bool is_unicode_space(char32_t cp) {
    return cp == 0x00A0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) ||
           cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F ||
           cp == 0x3000;
}

// Common Unicode punctuation blocks (general punctuation, supplemental,
// CJK symbols, vertical/small/fullwidth forms, Latin-1 marks).
bool is_unicode_punct(char32_t cp) {
    if (cp == 0x00A1 || cp == 0x00A7 || cp == 0x00AB || cp == 0x00B6 ||
        cp == 0x00B7 || cp == 0x00BB || cp == 0x00BF) {
        return true;
    }
    if (cp >= 0x2010 && cp <= 0x2027) return true;
    if (cp >= 0x2030 && cp <= 0x205E) return true;
    if (cp >= 0x2E00 && cp <= 0x2E7F) return true;
    if ((cp >= 0x3001 && cp <= 0x3003) || (cp >= 0x3008 && cp <= 0x3011) ||
        (cp >= 0x3014 && cp <= 0x301F) || cp == 0x3030 || cp == 0x303D) {
        return true;
    }
    if (cp >= 0xFE10 && cp <= 0xFE19) return true;
    if (cp >= 0xFE30 && cp <= 0xFE52) return true;
    if (cp >= 0xFE54 && cp <= 0xFE61) return true;
    if (cp == 0xFE63 || cp == 0xFE68 || cp == 0xFE6A || cp == 0xFE6B) {
        return true;
    }
    if ((cp >= 0xFF01 && cp <= 0xFF03) || (cp >= 0xFF05 && cp <= 0xFF0A) ||
        (cp >= 0xFF0C && cp <= 0xFF0F) || cp == 0xFF1A || cp == 0xFF1B ||
        cp == 0xFF1F || cp == 0xFF20 || (cp >= 0xFF3B && cp <= 0xFF3D) ||
        cp == 0xFF3F || cp == 0xFF5B || cp == 0xFF5D ||
        (cp >= 0xFF5F && cp <= 0xFF65)) {
        return true;
    }
    return false;
}

// Function words for the bundled English scorer. Inflection-free closed
// class words only, so the scorer is insensitive to topic.
const std::unordered_set<std::string_view>& function_words() {
    static const std::unordered_set<std::string_view> words = {
        "the",   "be",    "to",      "of",     "and",    "a",       "in",
        "that",  "have",  "i",       "it",     "for",    "not",     "on",
        "with",  "he",    "as",      "you",    "do",     "at",      "this",
        "but",   "his",   "by",      "from",   "they",   "we",      "say",
        "her",   "she",   "or",      "an",     "will",   "my",      "one",
        "all",   "would", "there",   "their",  "what",   "so",      "up",
        "out",   "if",    "about",   "who",    "get",    "which",   "go",
        "me",    "when",  "can",     "like",   "no",     "just",    "him",
        "know",  "take",  "into",    "your",   "some",   "could",   "them",
        "see",   "other", "than",    "then",   "now",    "only",    "its",
        "over",  "also",  "after",   "how",    "our",    "well",    "way",
        "even",  "new",   "because", "any",    "these",  "us",      "is",
        "was",   "are",   "were",    "been",   "being",  "has",     "had",
        "did",   "does",  "am",      "shall",  "should", "may",     "might",
        "must",  "very",  "much",    "many",   "such",   "each",    "few",
        "both",  "own",   "same",    "too",    "again",  "further", "once",
        "here",  "where", "why",     "down",   "during", "before",  "under",
        "while", "above", "between", "through", "against", "until", "below",
        "more",  "most",  "off",     "those",  "itself", "himself", "herself",
        "whom",  "whose", "among",   "upon",   "toward", "within",  "without",
        "yet",   "nor",   "per",     "via",    "unless", "although", "though",
        "since", "still", "thus",    "hence",  "onto",   "around",  "across",
    };
    return words;
}

}  // namespace

std::string to_string(Source source) {
    return source == Source::caption ? "caption" : "comments";
}

Source source_from_string(const std::string& text) {
    if (text == "caption") return Source::caption;
    if (text == "comments") return Source::comments;
    throw DataError("unknown document source: \"" + text +
                    "\" (expected \"caption\" or \"comments\")");
}

const Channel* Corpus::find_channel(const std::string& id) const {
    for (const Channel& channel : channels) {
        if (channel.id == id) return &channel;
    }
    return nullptr;
}

std::string strip_markup(const std::string& text) {
    // <...> spans first: a tag may wrap a URL.
    std::string no_tags;
    no_tags.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '<') {
            std::size_t close = text.find('>', i + 1);
            if (close != std::string::npos) {
                no_tags.push_back(' ');
                i = close + 1;
                continue;
            }
        }
        no_tags.push_back(text[i]);
        ++i;
    }

    static constexpr std::array<std::string_view, 3> kUrlPrefixes = {
        "http://", "https://", "www."};
    std::string out;
    out.reserve(no_tags.size());
    i = 0;
    while (i < no_tags.size()) {
        if (std::isspace(static_cast<unsigned char>(no_tags[i]))) {
            out.push_back(no_tags[i]);
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < no_tags.size() &&
               !std::isspace(static_cast<unsigned char>(no_tags[end]))) {
            ++end;
        }
        std::string_view token(no_tags.data() + i, end - i);
        bool is_url = false;
        for (std::string_view prefix : kUrlPrefixes) {
            if (token.substr(0, prefix.size()) == prefix) {
                is_url = true;
                break;
            }
        }
        if (!is_url) out.append(token);
        i = end;
    }
    return out;
}

std::vector<RawDocument> language_filter(const std::vector<RawDocument>& docs,
                                         const LanguageClassifier& classifier,
                                         double threshold) {
    std::vector<RawDocument> kept;
    kept.reserve(docs.size());
    for (const RawDocument& doc : docs) {
        if (classifier(doc.text) >= threshold) kept.push_back(doc);
    }
    return kept;
}

std::vector<std::string> preprocess_tokens(const std::string& text,
                                           const Stoplist& stoplist) {
    std::vector<std::string> tokens;
    std::string current;
    const auto flush = [&] {
        if (!current.empty()) {
            if (stoplist.find(current) == stoplist.end()) {
                tokens.push_back(current);
            }
            current.clear();
        }
    };
    for (std::size_t i = 0; i < text.size();) {
        char32_t cp = 0;
        std::size_t len = decode_utf8(text, i, cp);
        if (cp < 0x80) {
            unsigned char c = static_cast<unsigned char>(cp);
            if (std::isspace(c)) {
                flush();
            } else if (std::ispunct(c)) {
                // deleted; word halves join ("don't" -> "dont")
            } else {
                current.push_back(static_cast<char>(std::tolower(c)));
            }
        } else if (is_unicode_space(cp)) {
            flush();
        } else if (is_unicode_punct(cp)) {
            // deleted
        } else {
            current.append(text, i, len);
        }
        i += len;
    }
    flush();
    return tokens;
}

std::vector<std::string> lemmatize(const std::vector<std::string>& tokens,
                                   const LemmaTable& lemmas) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const std::string& token : tokens) {
        auto it = lemmas.find(token);
        out.push_back(it != lemmas.end() ? it->second : token);
    }
    return out;
}

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file: " + path);

    Corpus corpus;
    std::unordered_set<std::string> channel_ids;
    std::unordered_set<std::string> doc_keys;
    bool seen_document = false;
    std::string line;
    std::size_t line_no = 0;

    const auto fail = [&](const std::string& message) -> void {
        throw DataError(path + ":" + std::to_string(line_no) + ": " + message);
    };
    const auto get_string = [&](const nlohmann::json& record,
                                const char* key) -> std::string {
        auto it = record.find(key);
        if (it == record.end() || !it->is_string()) {
            fail(std::string("missing or non-string field \"") + key + "\"");
        }
        return it->get<std::string>();
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            fail(std::string("malformed record: ") + e.what());
        }
        if (!record.is_object()) fail("record is not a JSON object");

        const std::string type = get_string(record, "type");
        if (type == "channel") {
            if (seen_document) {
                fail("channel record after document records");
            }
            Channel channel;
            channel.id = get_string(record, "id");
            channel.name = get_string(record, "name");
            channel.group = get_string(record, "group");
            if (channel.group.empty()) fail("empty channel group");
            if (auto it = record.find("subscribers");
                it != record.end() && !it->is_null()) {
                if (!it->is_number_unsigned()) {
                    fail("subscribers must be a nonnegative integer");
                }
                channel.subscribers = it->get<std::uint64_t>();
            }
            if (!channel_ids.insert(channel.id).second) {
                fail("duplicate channel id \"" + channel.id + "\"");
            }
            corpus.channels.push_back(std::move(channel));
        } else if (type == "doc") {
            seen_document = true;
            RawDocument doc;
            doc.video_id = get_string(record, "video_id");
            doc.channel_id = get_string(record, "channel_id");
            std::string source;
            try {
                source = get_string(record, "source");
                doc.source = source_from_string(source);
            } catch (const DataError& e) {
                fail(e.what());
            }
            doc.text = get_string(record, "text");
            if (channel_ids.find(doc.channel_id) == channel_ids.end()) {
                fail("document \"" + doc.video_id +
                     "\" references undeclared channel \"" + doc.channel_id +
                     "\"");
            }
            std::string key = doc.video_id + "\x1f" + source;
            if (!doc_keys.insert(key).second) {
                fail("duplicate document (" + doc.video_id + ", " + source +
                     ")");
            }
            corpus.documents.push_back(std::move(doc));
        } else {
            fail("unknown record type \"" + type + "\"");
        }
    }
    return corpus;
}

Stoplist load_stoplist(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open stoplist file: " + path);
    Stoplist words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        words.insert(line);
    }
    return words;
}

LemmaTable load_lemma_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open lemma dictionary: " + path);
    LemmaTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": expected surface<TAB>lemma");
        }
        table[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return table;
}

double english_probability(const std::string& text) {
    const auto& words = function_words();
    std::size_t total = 0;
    std::size_t hits = 0;
    std::string current;
    const auto flush = [&] {
        if (current.empty()) return;
        ++total;
        if (words.find(current) != words.end()) ++hits;
        current.clear();
    };
    for (unsigned char c : text) {
        if (std::isalpha(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    if (total == 0) return 0.0;
    double fraction = static_cast<double>(hits) / static_cast<double>(total);
    double score = fraction / 0.4;
    return score > 1.0 ? 1.0 : score;
}

}  // namespace trilayer::corpus
