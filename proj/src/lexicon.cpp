#include "trilayer/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "trilayer/errors.hpp"
#include "trilayer/rng.hpp"
#include "trilayer/stats.hpp"

namespace trilayer::lexicon {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(text);
    while (std::getline(in, part, sep)) parts.push_back(part);
    return parts;
}

double pearson_r(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mean_x;
        const double dy = ys[i] - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

bool is_constant(const std::vector<double>& values) {
    for (double v : values) {
        if (v != values.front()) return false;
    }
    return true;
}

}  // namespace

std::string to_string(Polarity polarity) {
    return polarity == Polarity::negative ? "negative" : "positive";
}

const std::vector<std::string>& default_negative_categories() {
    static const std::vector<std::string> names = {
        "aggression",  "anger",          "disgust", "dominant_personality",
        "hate",        "kill",           "negative_emotion",
        "nervousness", "pain",           "rage",    "sadness",
        "suffering",   "swearing_terms", "terrorism",
        "violence"};
    return names;
}

const std::vector<std::string>& default_positive_categories() {
    static const std::vector<std::string> names = {
        "joy", "love", "optimist", "politeness", "positive_emotion"};
    return names;
}

Polarity polarity_from_string(const std::string& text) {
    if (text == "negative") return Polarity::negative;
    if (text == "positive") return Polarity::positive;
    throw DataError("unknown polarity: \"" + text + "\"");
}

CategoryLexicon CategoryLexicon::from_categories(
    std::vector<Category> categories) {
    CategoryLexicon lexicon;
    std::set<std::string> names;
    for (std::size_t i = 0; i < categories.size(); ++i) {
        const Category& category = categories[i];
        if (category.name.empty()) throw DataError("empty category name");
        if (!names.insert(category.name).second) {
            throw DataError("duplicate category \"" + category.name + "\"");
        }
        if (category.words.empty()) {
            throw DataError("category \"" + category.name +
                            "\" has an empty word set");
        }
        for (const std::string& word : category.words) {
            auto& slots = lexicon.word_index_[word];
            if (slots.empty() || slots.back() != i) slots.push_back(i);
        }
    }
    lexicon.categories_ = std::move(categories);
    return lexicon;
}

CategoryLexicon CategoryLexicon::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open lexicon file: " + path);
    std::vector<Category> categories;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields = split(line, '\t');
        if (fields.size() != 3) {
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": expected category<TAB>polarity<TAB>words");
        }
        Category category;
        category.name = fields[0];
        category.polarity = polarity_from_string(fields[1]);
        for (std::string& word : split(fields[2], ',')) {
            if (!word.empty()) category.words.push_back(std::move(word));
        }
        categories.push_back(std::move(category));
    }
    return from_categories(std::move(categories));
}

CategoryLexicon CategoryLexicon::import_category_lists(
    const std::string& path, const std::vector<std::string>& negative,
    const std::vector<std::string>& positive) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open category list file: " + path);
    std::unordered_map<std::string, std::vector<std::string>> by_name;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = split(line, '\t');
        if (fields.empty()) continue;
        std::vector<std::string> words(fields.begin() + 1, fields.end());
        by_name[fields[0]] = std::move(words);
    }
    std::vector<Category> categories;
    const auto take = [&](const std::vector<std::string>& names,
                          Polarity polarity) {
        for (const std::string& name : names) {
            auto it = by_name.find(name);
            if (it == by_name.end()) {
                throw DataError("category \"" + name +
                                "\" not present in " + path);
            }
            categories.push_back(Category{name, polarity, it->second});
        }
    };
    take(negative, Polarity::negative);
    take(positive, Polarity::positive);
    return from_categories(std::move(categories));
}

void CategoryLexicon::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write lexicon file: " + path);
    for (const Category& category : categories_) {
        out << category.name << '\t' << to_string(category.polarity) << '\t';
        for (std::size_t i = 0; i < category.words.size(); ++i) {
            if (i) out << ',';
            out << category.words[i];
        }
        out << '\n';
    }
}

std::vector<std::string> CategoryLexicon::category_names() const {
    std::vector<std::string> names;
    names.reserve(categories_.size());
    for (const Category& category : categories_) names.push_back(category.name);
    return names;
}

const std::vector<std::size_t>* CategoryLexicon::categories_of(
    const std::string& word) const {
    auto it = word_index_.find(word);
    return it == word_index_.end() ? nullptr : &it->second;
}

CategoryVector count_categories(const corpus::TokenDocument& doc,
                                const CategoryLexicon& lexicon) {
    CategoryVector cv;
    cv.video_id = doc.video_id;
    cv.source = doc.source;
    cv.counts.assign(lexicon.size(), 0);
    for (const std::string& token : doc.tokens) {
        if (const auto* slots = lexicon.categories_of(token)) {
            for (std::size_t index : *slots) ++cv.counts[index];
        }
    }
    return cv;
}

NormalizedCategoryVector normalize_vector(const CategoryVector& cv) {
    std::int64_t sum = 0;
    for (std::int64_t count : cv.counts) sum += count;
    if (sum <= 0) {
        throw DataError("zero-sum category vector for video \"" + cv.video_id +
                        "\" (" + corpus::to_string(cv.source) + ")");
    }
    NormalizedCategoryVector nv;
    nv.video_id = cv.video_id;
    nv.source = cv.source;
    nv.fractions.reserve(cv.counts.size());
    for (std::int64_t count : cv.counts) {
        nv.fractions.push_back(static_cast<double>(count) /
                               static_cast<double>(sum));
    }
    return nv;
}

ChannelCategoryVector aggregate_channel(
    const std::string& channel_id, corpus::Source source,
    const std::vector<NormalizedCategoryVector>& vectors) {
    if (vectors.empty()) {
        throw DataError("no vectors to aggregate for channel \"" + channel_id +
                        "\"");
    }
    ChannelCategoryVector cc;
    cc.channel_id = channel_id;
    cc.source = source;
    cc.videos = vectors.size();
    cc.means.assign(vectors.front().fractions.size(), 0.0);
    for (const NormalizedCategoryVector& nv : vectors) {
        if (nv.source != source || nv.fractions.size() != cc.means.size()) {
            throw DataError("mixed sources or dimensions in aggregate for "
                            "channel \"" + channel_id + "\"");
        }
        for (std::size_t i = 0; i < cc.means.size(); ++i) {
            cc.means[i] += nv.fractions[i];
        }
    }
    for (double& m : cc.means) m /= static_cast<double>(vectors.size());
    return cc;
}

SimilarityScore caption_comment_similarity(
    const NormalizedCategoryVector& cap, const NormalizedCategoryVector& com) {
    if (cap.video_id != com.video_id) {
        throw DataError("similarity of mismatched videos \"" + cap.video_id +
                        "\" and \"" + com.video_id + "\"");
    }
    if (cap.fractions.size() != com.fractions.size()) {
        throw DataError("similarity of mismatched dimensions for video \"" +
                        cap.video_id + "\"");
    }
    double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
    for (std::size_t i = 0; i < cap.fractions.size(); ++i) {
        dot += cap.fractions[i] * com.fractions[i];
        norm_a += cap.fractions[i] * cap.fractions[i];
        norm_b += com.fractions[i] * com.fractions[i];
    }
    SimilarityScore score;
    score.video_id = cap.video_id;
    score.value = std::clamp(dot / std::sqrt(norm_a * norm_b), 0.0, 1.0);
    return score;
}

PearsonResult pearson_correlation(const std::vector<double>& xs,
                                  const std::vector<double>& ys,
                                  std::size_t permutations,
                                  std::uint64_t seed) {
    if (xs.size() != ys.size()) {
        throw DataError("correlation series length mismatch: " +
                        std::to_string(xs.size()) + " vs " +
                        std::to_string(ys.size()));
    }
    if (xs.size() < 3) {
        throw DataError("correlation needs at least 3 points, got " +
                        std::to_string(xs.size()));
    }
    if (is_constant(xs) || is_constant(ys)) {
        throw DataError("constant series has no defined correlation");
    }
    PearsonResult result;
    result.r = pearson_r(xs, ys);

    const double observed = std::abs(result.r);
    Rng rng(seed);
    std::vector<double> shuffled = ys;
    std::size_t count = 0;
    for (std::size_t i = 0; i < permutations; ++i) {
        rng.shuffle(shuffled);
        if (std::abs(pearson_r(xs, shuffled)) >= observed) ++count;
    }
    result.p = static_cast<double>(1 + count) /
               static_cast<double>(1 + permutations);
    return result;
}

MedianDifferenceResult median_difference_test(const std::vector<double>& xs,
                                              const std::vector<double>& ys,
                                              std::size_t resamples,
                                              std::uint64_t seed) {
    if (xs.empty() || ys.empty()) {
        throw DataError("median difference test needs non-empty groups");
    }
    MedianDifferenceResult result;
    result.difference = stats::median(xs) - stats::median(ys);

    std::vector<double> pooled = xs;
    pooled.insert(pooled.end(), ys.begin(), ys.end());
    const double observed = std::abs(result.difference);
    Rng rng(seed);
    std::size_t count = 0;
    for (std::size_t i = 0; i < resamples; ++i) {
        rng.shuffle(pooled);
        std::vector<double> a(pooled.begin(),
                              pooled.begin() + static_cast<long>(xs.size()));
        std::vector<double> b(pooled.begin() + static_cast<long>(xs.size()),
                              pooled.end());
        if (std::abs(stats::median(std::move(a)) - stats::median(std::move(b))) >=
            observed) {
            ++count;
        }
    }
    result.p =
        static_cast<double>(1 + count) / static_cast<double>(1 + resamples);
    return result;
}

std::vector<CorrelationRow> correlation_table(
    const std::vector<ChannelProfile>& profiles,
    const std::vector<std::string>& category_names, std::size_t permutations,
    std::uint64_t seed) {
    // Deterministic row order: (group asc, source, category in lexicon order).
    std::set<std::pair<std::string, corpus::Source>> keys;
    for (const ChannelProfile& profile : profiles) {
        keys.insert({profile.group, profile.source});
    }

    std::vector<CorrelationRow> rows;
    for (const auto& [group, source] : keys) {
        std::vector<const ChannelProfile*> members;
        for (const ChannelProfile& profile : profiles) {
            if (profile.group == group && profile.source == source) {
                members.push_back(&profile);
            }
        }
        for (std::size_t c = 0; c < category_names.size(); ++c) {
            CorrelationRow row;
            row.category = category_names[c];
            row.group = group;
            row.source = source;
            if (members.size() < 3) {
                row.diagnostic = "insufficient channels (" +
                                 std::to_string(members.size()) + " < 3)";
                rows.push_back(std::move(row));
                continue;
            }
            std::vector<double> xs, ys;
            xs.reserve(members.size());
            ys.reserve(members.size());
            for (const ChannelProfile* member : members) {
                xs.push_back(member->mean_similarity);
                ys.push_back(member->means.at(c));
            }
            if (is_constant(xs) || is_constant(ys)) {
                row.diagnostic = "constant series";
                rows.push_back(std::move(row));
                continue;
            }
            const std::uint64_t row_seed = derive_seed(
                seed, "pearson:" + group + ":" + corpus::to_string(source) +
                          ":" + row.category);
            PearsonResult pr =
                pearson_correlation(xs, ys, permutations, row_seed);
            row.r = pr.r;
            row.p = pr.p;
            row.significant = pr.p < 0.05;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace trilayer::lexicon
