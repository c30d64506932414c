#include "trilayer/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include <json.hpp>

#include "trilayer/errors.hpp"
#include "trilayer/rng.hpp"
#include "trilayer/stats.hpp"

namespace trilayer::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "0.1.0";
constexpr int kFormatVersion = 1;

std::string real_to_text(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

// Prefixes module errors with the pipeline stage that raised them.
template <typename Fn>
auto run_stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError& error) {
        throw ConfigError(name + ": " + error.what());
    } catch (const DataError& error) {
        throw DataError(name + ": " + error.what());
    }
}

std::string trim(const std::string& text) {
    std::size_t begin = text.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    std::size_t end = text.find_last_not_of(" \t\r");
    return text.substr(begin, end - begin + 1);
}

std::uint64_t parse_u64(const std::string& value, const std::string& where) {
    try {
        std::size_t used = 0;
        unsigned long long parsed = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError(where + ": not a non-negative integer: " + value);
    }
}

double parse_real(const std::string& value, const std::string& where) {
    try {
        std::size_t used = 0;
        double parsed = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError(where + ": not a number: " + value);
    }
}

// Relative paths in a config file are relative to the file itself.
std::string resolve_path(const std::string& value, const fs::path& base_dir) {
    if (value.empty()) return value;
    fs::path p(value);
    if (p.is_absolute()) return p.string();
    return (base_dir / p).lexically_normal().string();
}

}  // namespace

void RunConfig::validate() const {
    auto require_file = [](const std::string& path, const char* key) {
        if (path.empty()) {
            throw ConfigError(std::string(key) + " path is not configured");
        }
        if (!fs::exists(path)) {
            throw ConfigError(std::string(key) + " path does not exist: " + path);
        }
    };
    require_file(corpus_path, "corpus");
    require_file(lexicon_path, "lexicon");
    require_file(stoplist_path, "stoplist");
    require_file(lemma_path, "lemmas");
    if (!base_embedding_path.empty() && !fs::exists(base_embedding_path)) {
        throw ConfigError("base_embedding path does not exist: " +
                          base_embedding_path);
    }
    if (!weat_spec_path.empty() && !fs::exists(weat_spec_path)) {
        throw ConfigError("weat_specs path does not exist: " + weat_spec_path);
    }
    if (language_threshold < 0.0 || language_threshold > 1.0) {
        throw ConfigError("language_threshold must lie in [0, 1]");
    }
    if (significance_level <= 0.0 || significance_level >= 1.0) {
        throw ConfigError("significance_level must lie in (0, 1)");
    }
    if (correlation_permutations == 0) {
        throw ConfigError("correlation_permutations must be positive");
    }
    if (fine_tune_epochs == 0) {
        throw ConfigError("fine_tune_epochs must be positive");
    }
    lda.resolved();  // range checks
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    const fs::path base_dir = fs::path(path).parent_path();

    RunConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        const std::string where = path + ":" + std::to_string(line_no);
        std::size_t eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(where + ": expected key = value");
        }
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty()) throw ConfigError(where + ": empty key");

        if (key == "corpus") {
            config.corpus_path = resolve_path(value, base_dir);
        } else if (key == "lexicon") {
            config.lexicon_path = resolve_path(value, base_dir);
        } else if (key == "stoplist") {
            config.stoplist_path = resolve_path(value, base_dir);
        } else if (key == "lemmas") {
            config.lemma_path = resolve_path(value, base_dir);
        } else if (key == "base_embedding") {
            config.base_embedding_path = resolve_path(value, base_dir);
        } else if (key == "weat_specs") {
            config.weat_spec_path = resolve_path(value, base_dir);
        } else if (key == "output_dir") {
            config.output_dir = resolve_path(value, base_dir);
        } else if (key == "language_threshold") {
            config.language_threshold = parse_real(value, where);
        } else if (key == "significance_level") {
            config.significance_level = parse_real(value, where);
        } else if (key == "correlation_permutations") {
            config.correlation_permutations =
                static_cast<std::size_t>(parse_u64(value, where));
        } else if (key == "seed") {
            config.seed = parse_u64(value, where);
        } else if (key == "lda_topics") {
            config.lda.k = static_cast<std::size_t>(parse_u64(value, where));
        } else if (key == "lda_alpha") {
            config.lda.alpha = parse_real(value, where);
        } else if (key == "lda_beta") {
            config.lda.beta = parse_real(value, where);
        } else if (key == "lda_iterations") {
            config.lda.iterations =
                static_cast<std::size_t>(parse_u64(value, where));
        } else if (key == "lda_token_cap") {
            config.lda.token_cap =
                static_cast<std::size_t>(parse_u64(value, where));
        } else if (key == "sgns_dim") {
            config.sgns.dim = static_cast<std::size_t>(parse_u64(value, where));
        } else if (key == "sgns_window") {
            config.sgns.window =
                static_cast<std::size_t>(parse_u64(value, where));
        } else if (key == "sgns_negatives") {
            config.sgns.negatives =
                static_cast<std::size_t>(parse_u64(value, where));
        } else if (key == "sgns_epochs") {
            config.sgns.epochs =
                static_cast<std::size_t>(parse_u64(value, where));
        } else if (key == "sgns_learning_rate") {
            config.sgns.learning_rate = parse_real(value, where);
        } else if (key == "sgns_min_count") {
            config.sgns.min_count =
                static_cast<std::size_t>(parse_u64(value, where));
        } else if (key == "sgns_workers") {
            config.sgns.workers =
                static_cast<std::size_t>(parse_u64(value, where));
        } else if (key == "fine_tune_epochs") {
            config.fine_tune_epochs =
                static_cast<std::size_t>(parse_u64(value, where));
        } else if (key == "weat_policy") {
            config.weat_policy = weat::oov_policy_from_string(value);
        } else if (key == "weat_mode") {
            config.weat_mode = weat::tail_mode_from_string(value);
        } else {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
    return config;
}

DistributionSummary summarize_distribution(const std::vector<double>& values) {
    if (values.empty()) {
        throw DataError("cannot summarize an empty distribution");
    }
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    DistributionSummary summary;
    summary.q1 = stats::quantile_sorted(sorted, 0.25);
    summary.median = stats::quantile_sorted(sorted, 0.5);
    summary.q3 = stats::quantile_sorted(sorted, 0.75);
    summary.n = n;

    const double iqr = summary.q3 - summary.q1;
    const double fence_low = summary.q1 - 1.5 * iqr;
    const double fence_high = summary.q3 + 1.5 * iqr;
    summary.whisker_low = sorted.back();
    summary.whisker_high = sorted.front();
    bool any_inside = false;
    for (double v : sorted) {
        if (v >= fence_low && v <= fence_high) {
            summary.whisker_low = std::min(summary.whisker_low, v);
            summary.whisker_high = std::max(summary.whisker_high, v);
            any_inside = true;
        } else {
            summary.outliers.push_back(v);
        }
    }
    if (!any_inside) {
        // cannot happen: the quartiles themselves lie inside the fences,
        // and they interpolate between data points
        summary.whisker_low = summary.q1;
        summary.whisker_high = summary.q3;
    }
    return summary;
}

// ---------------------------------------------------------------------
// Analysis stages.

namespace {

struct CorpusIndex {
    std::vector<std::string> groups;  // first-appearance order
    std::unordered_map<std::string, std::string> channel_group;
    std::vector<std::string> video_order;  // first-appearance order
};

CorpusIndex index_corpus(const corpus::Corpus& corpus_data) {
    CorpusIndex index;
    std::unordered_set<std::string> seen_groups;
    for (const auto& channel : corpus_data.channels) {
        index.channel_group[channel.id] = channel.group;
        if (seen_groups.insert(channel.group).second) {
            index.groups.push_back(channel.group);
        }
    }
    std::unordered_set<std::string> seen_videos;
    for (const auto& doc : corpus_data.documents) {
        if (seen_videos.insert(doc.video_id).second) {
            index.video_order.push_back(doc.video_id);
        }
    }
    return index;
}

std::string doc_key(const std::string& video_id, corpus::Source source) {
    return video_id + "\x1f" + corpus::to_string(source);
}

}  // namespace

AnalysisArtifacts run_analysis(const RunConfig& config, Stage through) {
    run_stage("config", [&] { config.validate(); return 0; });

    AnalysisArtifacts artifacts;
    Report& report = artifacts.report;
    report.seed = config.seed;
    report.lda = run_stage("config", [&] { return config.lda.resolved(); });
    report.sgns = config.sgns;
    report.fine_tune_epochs = config.fine_tune_epochs;
    report.weat_policy = weat::to_string(config.weat_policy);
    report.weat_mode = weat::to_string(config.weat_mode);
    report.language_threshold = config.language_threshold;
    report.significance_level = config.significance_level;
    report.base_embedding_path = config.base_embedding_path;

    // ---- ingest ----
    const corpus::Corpus corpus_data =
        run_stage("ingest", [&] { return corpus::load_corpus(config.corpus_path); });
    const CorpusIndex index = index_corpus(corpus_data);
    report.coverage.channels = corpus_data.channels.size();
    report.coverage.videos = index.video_order.size();
    report.coverage.documents = corpus_data.documents.size();
    if (through == Stage::ingest) return artifacts;

    // ---- preprocess ----
    const corpus::Stoplist stoplist = run_stage(
        "preprocess", [&] { return corpus::load_stoplist(config.stoplist_path); });
    const corpus::LemmaTable lemmas = run_stage(
        "preprocess", [&] { return corpus::load_lemma_table(config.lemma_path); });
    run_stage("preprocess", [&] {
        for (const auto& doc : corpus_data.documents) {
            const std::string stripped = corpus::strip_markup(doc.text);
            if (corpus::english_probability(stripped) <
                config.language_threshold) {
                report.exclusions.push_back({doc.video_id,
                                             corpus::to_string(doc.source),
                                             "preprocess", "language filter"});
                continue;
            }
            std::vector<std::string> tokens = corpus::lemmatize(
                corpus::preprocess_tokens(stripped, stoplist), lemmas);
            if (tokens.empty()) {
                report.exclusions.push_back(
                    {doc.video_id, corpus::to_string(doc.source), "preprocess",
                     "empty after preprocessing"});
                continue;
            }
            artifacts.tokens.push_back({doc.video_id, doc.channel_id,
                                        doc.source, std::move(tokens)});
        }
        return 0;
    });
    report.coverage.documents_preprocessed = artifacts.tokens.size();
    if (through == Stage::preprocess) return artifacts;

    // ---- lexical layer ----
    const lexicon::CategoryLexicon lex = run_stage(
        "lexical", [&] { return lexicon::CategoryLexicon::from_file(config.lexicon_path); });
    report.categories = lex.category_names();

    std::vector<lexicon::NormalizedCategoryVector> normalized;
    std::unordered_map<std::string, std::size_t> normalized_by_doc;
    std::unordered_map<std::string, std::string> video_channel;
    run_stage("lexical", [&] {
        for (const auto& doc : artifacts.tokens) {
            video_channel.emplace(doc.video_id, doc.channel_id);
            lexicon::CategoryVector counts = lexicon::count_categories(doc, lex);
            bool all_zero = true;
            for (std::int64_t c : counts.counts) {
                if (c != 0) {
                    all_zero = false;
                    break;
                }
            }
            if (all_zero) {
                report.exclusions.push_back({doc.video_id,
                                             corpus::to_string(doc.source),
                                             "lexical", "zero-category"});
                continue;
            }
            normalized_by_doc.emplace(doc_key(doc.video_id, doc.source),
                                      normalized.size());
            normalized.push_back(lexicon::normalize_vector(counts));
        }
        return 0;
    });
    report.coverage.documents_lexical = normalized.size();

    const std::vector<corpus::Source> both_sources = {
        corpus::Source::caption, corpus::Source::comments};

    run_stage("lexical", [&] {
        // per-channel aggregates
        for (const auto& channel : corpus_data.channels) {
            for (corpus::Source source : both_sources) {
                std::vector<lexicon::NormalizedCategoryVector> mine;
                for (const auto& doc : artifacts.tokens) {
                    if (doc.channel_id != channel.id || doc.source != source) {
                        continue;
                    }
                    auto it =
                        normalized_by_doc.find(doc_key(doc.video_id, doc.source));
                    if (it != normalized_by_doc.end()) {
                        mine.push_back(normalized[it->second]);
                    }
                }
                if (mine.empty()) continue;
                lexicon::ChannelCategoryVector agg =
                    lexicon::aggregate_channel(channel.id, source, mine);
                report.channel_vectors.push_back(
                    {channel.id, channel.group, corpus::to_string(source),
                     agg.videos, std::move(agg.means)});
            }
        }

        // per-(group, source, category) fraction distributions
        for (const std::string& group : index.groups) {
            for (corpus::Source source : both_sources) {
                std::vector<std::vector<double>> per_category(lex.size());
                for (const auto& doc : artifacts.tokens) {
                    if (doc.source != source ||
                        index.channel_group.at(doc.channel_id) != group) {
                        continue;
                    }
                    auto it =
                        normalized_by_doc.find(doc_key(doc.video_id, doc.source));
                    if (it == normalized_by_doc.end()) continue;
                    const auto& fractions = normalized[it->second].fractions;
                    for (std::size_t c = 0; c < fractions.size(); ++c) {
                        per_category[c].push_back(fractions[c]);
                    }
                }
                for (std::size_t c = 0; c < per_category.size(); ++c) {
                    if (per_category[c].empty()) continue;
                    DistributionSummary summary =
                        summarize_distribution(per_category[c]);
                    summary.group = group;
                    summary.source = corpus::to_string(source);
                    summary.metric = report.categories[c];
                    report.category_summaries.push_back(std::move(summary));
                }
            }
        }

        // per-video caption/comments similarity
        for (const std::string& video : index.video_order) {
            auto cap = normalized_by_doc.find(
                doc_key(video, corpus::Source::caption));
            auto com = normalized_by_doc.find(
                doc_key(video, corpus::Source::comments));
            if (cap == normalized_by_doc.end() ||
                com == normalized_by_doc.end()) {
                continue;
            }
            lexicon::SimilarityScore score = lexicon::caption_comment_similarity(
                normalized[cap->second], normalized[com->second]);
            const std::string& channel_id = video_channel.at(video);
            report.similarities.push_back({video, channel_id,
                                           index.channel_group.at(channel_id),
                                           score.value});
        }

        // per-group similarity distributions
        for (const std::string& group : index.groups) {
            std::vector<double> values;
            for (const auto& row : report.similarities) {
                if (row.group == group) values.push_back(row.value);
            }
            if (values.empty()) continue;
            DistributionSummary summary = summarize_distribution(values);
            summary.group = group;
            summary.source = "both";
            summary.metric = "caption_comment_similarity";
            report.similarity_summaries.push_back(std::move(summary));
        }

        // per-channel mean similarity over the videos with both sides
        for (const auto& channel : corpus_data.channels) {
            double sum = 0.0;
            std::size_t count = 0;
            for (const auto& row : report.similarities) {
                if (row.channel_id == channel.id) {
                    sum += row.value;
                    ++count;
                }
            }
            if (count == 0) continue;
            report.channel_similarities.push_back(
                {channel.id, channel.group, sum / static_cast<double>(count),
                 count});
        }

        // similarity-vs-category correlation table
        std::vector<lexicon::ChannelProfile> profiles;
        for (const auto& row : report.channel_similarities) {
            for (corpus::Source source : both_sources) {
                for (const auto& vec : report.channel_vectors) {
                    if (vec.channel_id != row.channel_id ||
                        vec.source != corpus::to_string(source)) {
                        continue;
                    }
                    lexicon::ChannelProfile profile;
                    profile.channel_id = row.channel_id;
                    profile.group = row.group;
                    profile.source = source;
                    profile.means = vec.means;
                    profile.mean_similarity = row.mean_similarity;
                    profiles.push_back(std::move(profile));
                }
            }
        }
        report.correlations = lexicon::correlation_table(
            profiles, report.categories, config.correlation_permutations,
            config.seed);
        return 0;
    });
    if (through == Stage::lexical) return artifacts;

    // ---- topic layer: one model per (group, source) class ----
    run_stage("topics", [&] {
        for (const std::string& group : index.groups) {
            for (corpus::Source source : both_sources) {
                std::vector<corpus::TokenDocument> class_docs;
                for (const auto& doc : artifacts.tokens) {
                    if (doc.source == source &&
                        index.channel_group.at(doc.channel_id) == group) {
                        class_docs.push_back(doc);
                    }
                }
                if (class_docs.empty()) continue;
                lda::LdaConfig lda_config = config.lda;
                lda_config.seed = derive_seed(
                    config.seed,
                    "lda:" + group + ":" + corpus::to_string(source));
                lda::TopicModel model = lda::train_lda(class_docs, lda_config);

                std::vector<std::size_t> dominant_counts(model.config.k, 0);
                for (const auto& dist : model.doc_topic) {
                    ++dominant_counts[lda::dominant_topic(dist)];
                }
                std::vector<std::size_t> order(model.config.k);
                for (std::size_t t = 0; t < order.size(); ++t) order[t] = t;
                std::stable_sort(order.begin(), order.end(),
                                 [&](std::size_t a, std::size_t b) {
                                     return dominant_counts[a] > dominant_counts[b];
                                 });

                TopicClassSummary summary;
                summary.group = group;
                summary.source = corpus::to_string(source);
                summary.documents = class_docs.size();
                const std::size_t take = std::min<std::size_t>(2, model.config.k);
                for (std::size_t i = 0; i < take; ++i) {
                    TopicEntry entry;
                    entry.topic = order[i];
                    entry.dominant_documents = dominant_counts[order[i]];
                    entry.words = lda::top_words(model, order[i], 20);
                    summary.top_topics.push_back(std::move(entry));
                }
                report.topics.push_back(std::move(summary));
                artifacts.topic_models.emplace_back(
                    group + "_" + corpus::to_string(source), std::move(model));
            }
        }
        return 0;
    });
    if (through == Stage::topics) return artifacts;

    // ---- embedding layer ----
    run_stage("embeddings", [&] {
        if (!config.base_embedding_path.empty()) {
            artifacts.base = sgns::load_embedding(config.base_embedding_path);
        } else {
            sgns::SgnsConfig base_config = config.sgns;
            base_config.seed = derive_seed(config.seed, "sgns:base");
            artifacts.base = sgns::train_sgns(artifacts.tokens, base_config);
            report.base_model_substituted = true;
        }
        artifacts.has_base = true;
        return 0;
    });

    const std::vector<weat::WeatSpec> specs = run_stage("weat", [&] {
        return config.weat_spec_path.empty()
                   ? weat::builtin_specs()
                   : weat::load_specs(config.weat_spec_path);
    });

    run_stage("embeddings", [&] {
        for (const auto& channel : corpus_data.channels) {
            for (corpus::Source source : both_sources) {
                std::vector<corpus::TokenDocument> docs;
                for (const auto& doc : artifacts.tokens) {
                    if (doc.channel_id == channel.id && doc.source == source) {
                        docs.push_back(doc);
                    }
                }
                const std::uint64_t seed = derive_seed(
                    config.seed, "fine-tune:" + channel.id + ":" +
                                     corpus::to_string(source));
                sgns::EmbeddingModel model = sgns::fine_tune(
                    artifacts.base, docs, config.fine_tune_epochs, seed);

                for (const auto& doc : docs) {
                    bool any_known = false;
                    for (const auto& token : doc.tokens) {
                        if (model.word_index(token) !=
                            sgns::EmbeddingModel::npos) {
                            any_known = true;
                            break;
                        }
                    }
                    if (any_known) {
                        ++report.coverage.documents_embedding;
                    } else {
                        report.exclusions.push_back(
                            {doc.video_id, corpus::to_string(doc.source),
                             "embedding", "all-OOV"});
                    }
                }

                for (const auto& spec : specs) {
                    weat::WeatOptions options;
                    options.policy = config.weat_policy;
                    options.mode = config.weat_mode;
                    weat::WeatResult result = run_stage("weat", [&] {
                        return weat::run_weat(model, spec, options);
                    });
                    WeatRow row;
                    row.channel_id = channel.id;
                    row.group = channel.group;
                    row.source = corpus::to_string(source);
                    row.spec = spec.name;
                    row.class_size = result.class_size;
                    row.statistic = result.statistic;
                    row.effect_size = result.effect_size;
                    row.p_value = result.p_value;
                    row.partitions = result.partitions_evaluated;
                    row.exact = result.exact;
                    row.mode = weat::to_string(result.mode);
                    row.degenerate = result.degenerate;
                    row.significant =
                        !result.degenerate &&
                        result.p_value < config.significance_level;
                    row.dropped_class1 = result.dropped_class1;
                    row.dropped_class2 = result.dropped_class2;
                    row.dropped_attrs = result.dropped_attrs;
                    report.weat_rows.push_back(std::move(row));
                }

                artifacts.channel_models.emplace_back(
                    channel.id + "_" + corpus::to_string(source),
                    std::move(model));
            }
        }

        // caption-vs-comments bias differences, per channel and spec
        auto find_row = [&](const std::string& channel_id,
                            const std::string& source,
                            const std::string& spec) -> const WeatRow* {
            for (const auto& row : report.weat_rows) {
                if (row.channel_id == channel_id && row.source == source &&
                    row.spec == spec) {
                    return &row;
                }
            }
            return nullptr;
        };
        for (const auto& channel : corpus_data.channels) {
            for (const auto& spec : specs) {
                const WeatRow* cap = find_row(channel.id, "caption", spec.name);
                const WeatRow* com = find_row(channel.id, "comments", spec.name);
                WeatDifferenceRow row;
                row.channel_id = channel.id;
                row.group = channel.group;
                row.spec = spec.name;
                if (cap == nullptr || com == nullptr) {
                    row.note = "missing side";
                } else if (cap->significant && com->significant) {
                    row.difference = com->effect_size - cap->effect_size;
                } else if (cap->significant) {
                    row.note = "comments side not significant";
                } else if (com->significant) {
                    row.note = "caption side not significant";
                } else {
                    row.note = "neither side significant";
                }
                report.weat_differences.push_back(std::move(row));
            }
        }

        // per-(group, source, spec) distributions of significant d values
        for (const std::string& group : index.groups) {
            for (corpus::Source source : both_sources) {
                for (const auto& spec : specs) {
                    std::vector<double> values;
                    for (const auto& row : report.weat_rows) {
                        if (row.group == group &&
                            row.source == corpus::to_string(source) &&
                            row.spec == spec.name && row.significant) {
                            values.push_back(row.effect_size);
                        }
                    }
                    if (values.empty()) continue;
                    DistributionSummary summary =
                        summarize_distribution(values);
                    summary.group = group;
                    summary.source = corpus::to_string(source);
                    summary.metric = spec.name;
                    report.weat_group_summaries.push_back(std::move(summary));
                }
            }
        }
        return 0;
    });

    return artifacts;
}

// ---------------------------------------------------------------------
// Report emission.

namespace {

ordered_json summary_to_json(const DistributionSummary& summary) {
    ordered_json j;
    j["group"] = summary.group;
    j["source"] = summary.source;
    j["metric"] = summary.metric;
    j["n"] = summary.n;
    j["q1"] = summary.q1;
    j["median"] = summary.median;
    j["q3"] = summary.q3;
    j["whisker_low"] = summary.whisker_low;
    j["whisker_high"] = summary.whisker_high;
    j["outliers"] = summary.outliers;
    return j;
}

ordered_json report_to_json(const Report& report) {
    ordered_json j;
    ordered_json meta;
    meta["tool"] = "trilayer";
    meta["version"] = kToolVersion;
    meta["format_version"] = kFormatVersion;
    meta["seed"] = report.seed;
    meta["language_threshold"] = report.language_threshold;
    meta["significance_level"] = report.significance_level;
    meta["weat"] = {{"policy", report.weat_policy},
                    {"mode", report.weat_mode}};
    meta["lda"] = ordered_json{{"topics", report.lda.k},
                               {"alpha", report.lda.alpha},
                               {"beta", report.lda.beta},
                               {"iterations", report.lda.iterations},
                               {"token_cap", report.lda.token_cap}};
    meta["sgns"] = ordered_json{{"dim", report.sgns.dim},
                                {"window", report.sgns.window},
                                {"negatives", report.sgns.negatives},
                                {"epochs", report.sgns.epochs},
                                {"learning_rate", report.sgns.learning_rate},
                                {"min_count", report.sgns.min_count},
                                {"workers", report.sgns.workers}};
    meta["fine_tune_epochs"] = report.fine_tune_epochs;
    ordered_json base;
    base["substituted"] = report.base_model_substituted;
    if (report.base_embedding_path.empty()) {
        base["path"] = nullptr;
    } else {
        base["path"] = report.base_embedding_path;
    }
    meta["base_embedding"] = base;
    meta["conventions"] = ordered_json{
        {"effect_size", "Cohen's d with the n-1 sample standard deviation"},
        {"p_value",
         "one-sided exact permutation test over all equal-size bipartitions"},
        {"quantiles", "linear interpolation between order statistics"},
        {"whiskers", "most extreme points within 1.5 IQR of the quartiles"}};
    meta["coverage"] = ordered_json{
        {"channels", report.coverage.channels},
        {"videos", report.coverage.videos},
        {"documents", report.coverage.documents},
        {"documents_preprocessed", report.coverage.documents_preprocessed},
        {"documents_lexical", report.coverage.documents_lexical},
        {"documents_embedding", report.coverage.documents_embedding}};
    j["meta"] = meta;

    ordered_json exclusions = ordered_json::array();
    for (const auto& record : report.exclusions) {
        exclusions.push_back(ordered_json{{"video_id", record.video_id},
                                          {"source", record.source},
                                          {"stage", record.stage},
                                          {"reason", record.reason}});
    }
    j["exclusions"] = exclusions;

    ordered_json lexical;
    lexical["categories"] = report.categories;
    ordered_json vectors = ordered_json::array();
    for (const auto& row : report.channel_vectors) {
        vectors.push_back(ordered_json{{"channel", row.channel_id},
                                       {"group", row.group},
                                       {"source", row.source},
                                       {"videos", row.videos},
                                       {"means", row.means}});
    }
    lexical["channel_vectors"] = vectors;
    ordered_json category_summaries = ordered_json::array();
    for (const auto& summary : report.category_summaries) {
        category_summaries.push_back(summary_to_json(summary));
    }
    lexical["category_summaries"] = category_summaries;
    ordered_json similarities = ordered_json::array();
    for (const auto& row : report.similarities) {
        similarities.push_back(ordered_json{{"video_id", row.video_id},
                                            {"channel", row.channel_id},
                                            {"group", row.group},
                                            {"value", row.value}});
    }
    lexical["similarities"] = similarities;
    ordered_json similarity_summaries = ordered_json::array();
    for (const auto& summary : report.similarity_summaries) {
        similarity_summaries.push_back(summary_to_json(summary));
    }
    lexical["similarity_summaries"] = similarity_summaries;
    ordered_json channel_similarities = ordered_json::array();
    for (const auto& row : report.channel_similarities) {
        channel_similarities.push_back(
            ordered_json{{"channel", row.channel_id},
                         {"group", row.group},
                         {"mean_similarity", row.mean_similarity},
                         {"videos", row.videos}});
    }
    lexical["channel_similarities"] = channel_similarities;
    ordered_json correlations = ordered_json::array();
    for (const auto& row : report.correlations) {
        ordered_json entry;
        entry["category"] = row.category;
        entry["group"] = row.group;
        entry["source"] = corpus::to_string(row.source);
        if (row.r.has_value()) {
            entry["r"] = *row.r;
            entry["p"] = *row.p;
        } else {
            entry["r"] = nullptr;
            entry["p"] = nullptr;
        }
        entry["significant"] = row.significant;
        entry["diagnostic"] = row.diagnostic;
        correlations.push_back(entry);
    }
    lexical["correlations"] = correlations;
    j["lexical"] = lexical;

    ordered_json topics = ordered_json::array();
    for (const auto& summary : report.topics) {
        ordered_json entry;
        entry["group"] = summary.group;
        entry["source"] = summary.source;
        entry["documents"] = summary.documents;
        ordered_json tops = ordered_json::array();
        for (const auto& topic : summary.top_topics) {
            tops.push_back(ordered_json{
                {"topic", topic.topic},
                {"dominant_documents", topic.dominant_documents},
                {"words", topic.words}});
        }
        entry["topics"] = tops;
        topics.push_back(entry);
    }
    j["topics"] = topics;

    ordered_json weat_section;
    ordered_json rows = ordered_json::array();
    for (const auto& row : report.weat_rows) {
        rows.push_back(ordered_json{{"channel", row.channel_id},
                                    {"group", row.group},
                                    {"source", row.source},
                                    {"spec", row.spec},
                                    {"class_size", row.class_size},
                                    {"statistic", row.statistic},
                                    {"effect_size", row.effect_size},
                                    {"p_value", row.p_value},
                                    {"partitions", row.partitions},
                                    {"exact", row.exact},
                                    {"mode", row.mode},
                                    {"degenerate", row.degenerate},
                                    {"significant", row.significant},
                                    {"dropped_class1", row.dropped_class1},
                                    {"dropped_class2", row.dropped_class2},
                                    {"dropped_attrs", row.dropped_attrs}});
    }
    weat_section["rows"] = rows;
    ordered_json differences = ordered_json::array();
    for (const auto& row : report.weat_differences) {
        ordered_json entry;
        entry["channel"] = row.channel_id;
        entry["group"] = row.group;
        entry["spec"] = row.spec;
        if (row.difference.has_value()) {
            entry["difference"] = *row.difference;
        } else {
            entry["difference"] = nullptr;
        }
        entry["note"] = row.note;
        differences.push_back(entry);
    }
    weat_section["differences"] = differences;
    ordered_json group_summaries = ordered_json::array();
    for (const auto& summary : report.weat_group_summaries) {
        group_summaries.push_back(summary_to_json(summary));
    }
    weat_section["group_summaries"] = group_summaries;
    j["weat"] = weat_section;

    return j;
}

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string quoted = "\"";
    for (char c : value) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i > 0) out += ';';
        out += words[i];
    }
    return out;
}

std::string join_reals(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ';';
        out += real_to_text(values[i]);
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write output file: " + path);
    out << content;
    if (!out) throw DataError("cannot write output file: " + path);
}

std::string summary_header() {
    return "group,source,metric,n,q1,median,q3,whisker_low,whisker_high,"
           "outliers\n";
}

std::string summary_csv_row(const DistributionSummary& s) {
    std::string line;
    line += csv_field(s.group) + "," + csv_field(s.source) + "," +
            csv_field(s.metric) + "," + std::to_string(s.n) + "," +
            real_to_text(s.q1) + "," + real_to_text(s.median) + "," +
            real_to_text(s.q3) + "," + real_to_text(s.whisker_low) + "," +
            real_to_text(s.whisker_high) + "," +
            csv_field(join_reals(s.outliers)) + "\n";
    return line;
}

}  // namespace

std::vector<std::string> emit_report(const Report& report, ReportFormat format,
                                     const std::string& dir) {
    fs::create_directories(dir);
    std::vector<std::string> written;
    const fs::path base(dir);

    if (format == ReportFormat::json) {
        const std::string path = (base / "report.json").string();
        write_text_file(path, report_to_json(report).dump(2) + "\n");
        written.push_back(path);
        return written;
    }

    auto emit = [&](const std::string& name, const std::string& content) {
        const std::string path = (base / name).string();
        write_text_file(path, content);
        written.push_back(path);
    };

    {
        std::string csv = "channel,group,source,videos";
        for (const auto& name : report.categories) {
            csv += "," + csv_field(name);
        }
        csv += "\n";
        for (const auto& row : report.channel_vectors) {
            csv += csv_field(row.channel_id) + "," + csv_field(row.group) +
                   "," + row.source + "," + std::to_string(row.videos);
            for (double mean : row.means) csv += "," + real_to_text(mean);
            csv += "\n";
        }
        emit("channel_vectors.csv", csv);
    }
    {
        std::string csv = summary_header();
        for (const auto& s : report.category_summaries) {
            csv += summary_csv_row(s);
        }
        emit("category_summaries.csv", csv);
    }
    {
        std::string csv = "video_id,channel,group,value\n";
        for (const auto& row : report.similarities) {
            csv += csv_field(row.video_id) + "," + csv_field(row.channel_id) +
                   "," + csv_field(row.group) + "," + real_to_text(row.value) +
                   "\n";
        }
        emit("similarities.csv", csv);
    }
    {
        std::string csv = summary_header();
        for (const auto& s : report.similarity_summaries) {
            csv += summary_csv_row(s);
        }
        emit("similarity_summaries.csv", csv);
    }
    {
        std::string csv = "channel,group,mean_similarity,videos\n";
        for (const auto& row : report.channel_similarities) {
            csv += csv_field(row.channel_id) + "," + csv_field(row.group) +
                   "," + real_to_text(row.mean_similarity) + "," +
                   std::to_string(row.videos) + "\n";
        }
        emit("channel_similarities.csv", csv);
    }
    {
        std::string csv = "category,group,source,r,p,significant,diagnostic\n";
        for (const auto& row : report.correlations) {
            csv += csv_field(row.category) + "," + csv_field(row.group) + "," +
                   corpus::to_string(row.source) + ",";
            if (row.r.has_value()) {
                csv += real_to_text(*row.r);
            }
            csv += ",";
            if (row.p.has_value()) {
                csv += real_to_text(*row.p);
            }
            csv += std::string(",") + (row.significant ? "true" : "false") +
                   "," + csv_field(row.diagnostic) + "\n";
        }
        emit("correlations.csv", csv);
    }
    {
        std::string csv =
            "group,source,documents,rank,topic,dominant_documents,words\n";
        for (const auto& summary : report.topics) {
            for (std::size_t i = 0; i < summary.top_topics.size(); ++i) {
                const auto& topic = summary.top_topics[i];
                csv += csv_field(summary.group) + "," + summary.source + "," +
                       std::to_string(summary.documents) + "," +
                       std::to_string(i + 1) + "," +
                       std::to_string(topic.topic) + "," +
                       std::to_string(topic.dominant_documents) + "," +
                       csv_field(join_words(topic.words)) + "\n";
            }
        }
        emit("topics.csv", csv);
    }
    {
        std::string csv =
            "channel,group,source,spec,class_size,statistic,effect_size,"
            "p_value,partitions,exact,mode,degenerate,significant,"
            "dropped_class1,dropped_class2,dropped_attrs\n";
        for (const auto& row : report.weat_rows) {
            csv += csv_field(row.channel_id) + "," + csv_field(row.group) +
                   "," + row.source + "," + csv_field(row.spec) + "," +
                   std::to_string(row.class_size) + "," +
                   real_to_text(row.statistic) + "," +
                   real_to_text(row.effect_size) + "," +
                   real_to_text(row.p_value) + "," +
                   std::to_string(row.partitions) + "," +
                   (row.exact ? "true" : "false") + "," + row.mode + "," +
                   (row.degenerate ? "true" : "false") + "," +
                   (row.significant ? "true" : "false") + "," +
                   csv_field(join_words(row.dropped_class1)) + "," +
                   csv_field(join_words(row.dropped_class2)) + "," +
                   csv_field(join_words(row.dropped_attrs)) + "\n";
        }
        emit("weat.csv", csv);
    }
    {
        std::string csv = "channel,group,spec,difference,note\n";
        for (const auto& row : report.weat_differences) {
            csv += csv_field(row.channel_id) + "," + csv_field(row.group) +
                   "," + csv_field(row.spec) + ",";
            if (row.difference.has_value()) {
                csv += real_to_text(*row.difference);
            }
            csv += "," + csv_field(row.note) + "\n";
        }
        emit("weat_differences.csv", csv);
    }
    {
        std::string csv = summary_header();
        for (const auto& s : report.weat_group_summaries) {
            csv += summary_csv_row(s);
        }
        emit("weat_group_summaries.csv", csv);
    }
    {
        std::string csv = "video_id,source,stage,reason\n";
        for (const auto& record : report.exclusions) {
            csv += csv_field(record.video_id) + "," + record.source + "," +
                   record.stage + "," + csv_field(record.reason) + "\n";
        }
        emit("exclusions.csv", csv);
    }
    return written;
}

Report run_full_analysis(const RunConfig& config) {
    if (config.output_dir.empty()) {
        throw ConfigError("config: output_dir is not configured");
    }
    AnalysisArtifacts artifacts = run_analysis(config, Stage::report);

    std::vector<std::string> written;
    std::vector<std::string> created_dirs;
    const fs::path out(config.output_dir);
    auto ensure_dir = [&](const fs::path& dir) {
        if (!fs::exists(dir)) {
            fs::create_directories(dir);
            created_dirs.push_back(dir.string());
        }
    };
    try {
        ensure_dir(out);
        ensure_dir(out / "csv");
        ensure_dir(out / "models");

        {
            std::string stream;
            for (const auto& doc : artifacts.tokens) {
                ordered_json line;
                line["video_id"] = doc.video_id;
                line["channel_id"] = doc.channel_id;
                line["source"] = corpus::to_string(doc.source);
                line["tokens"] = doc.tokens;
                stream += line.dump() + "\n";
            }
            const std::string path = (out / "tokens.jsonl").string();
            write_text_file(path, stream);
            written.push_back(path);
        }

        for (const auto& [name, model] : artifacts.topic_models) {
            const std::string path =
                (out / "models" / ("lda_" + name + ".lda")).string();
            lda::save_topic_model(model, path);
            written.push_back(path);
        }
        // a base model loaded from disk is an input, not an artifact
        if (artifacts.has_base && artifacts.report.base_model_substituted) {
            const std::string path = (out / "models" / "base.emb").string();
            sgns::save_embedding(artifacts.base, path);
            written.push_back(path);
        }
        for (const auto& [name, model] : artifacts.channel_models) {
            const std::string path =
                (out / "models" / (name + ".emb")).string();
            sgns::save_embedding(model, path);
            written.push_back(path);
        }

        auto json_files =
            emit_report(artifacts.report, ReportFormat::json, out.string());
        written.insert(written.end(), json_files.begin(), json_files.end());
        auto csv_files = emit_report(artifacts.report, ReportFormat::csv_bundle,
                                     (out / "csv").string());
        written.insert(written.end(), csv_files.begin(), csv_files.end());
    } catch (...) {
        std::error_code ec;
        for (const auto& path : written) fs::remove(path, ec);
        for (auto it = created_dirs.rbegin(); it != created_dirs.rend(); ++it) {
            fs::remove(*it, ec);  // only removes now-empty directories
        }
        throw;
    }
    return artifacts.report;
}

// ---------------------------------------------------------------------
// Report schema validation (JSON-Schema subset).

namespace {

std::string json_type_name(const json& value) {
    if (value.is_object()) return "object";
    if (value.is_array()) return "array";
    if (value.is_string()) return "string";
    if (value.is_boolean()) return "boolean";
    if (value.is_null()) return "null";
    if (value.is_number_integer() || value.is_number_unsigned()) {
        return "integer";
    }
    return "number";
}

bool type_matches(const json& value, const std::string& wanted) {
    const std::string actual = json_type_name(value);
    if (wanted == actual) return true;
    // every integer is also a number
    return wanted == "number" && actual == "integer";
}

void check_schema(const json& instance, const json& schema,
                  const std::string& path, std::vector<std::string>& errors) {
    if (!schema.is_object()) {
        errors.push_back(path + ": schema node is not an object");
        return;
    }
    if (auto it = schema.find("type"); it != schema.end()) {
        bool ok = false;
        if (it->is_string()) {
            ok = type_matches(instance, it->get<std::string>());
        } else if (it->is_array()) {
            for (const auto& option : *it) {
                if (type_matches(instance, option.get<std::string>())) {
                    ok = true;
                    break;
                }
            }
        }
        if (!ok) {
            errors.push_back(path + ": expected type " + it->dump() + ", got " +
                             json_type_name(instance));
            return;
        }
    }
    if (auto it = schema.find("enum"); it != schema.end()) {
        bool ok = false;
        for (const auto& option : *it) {
            if (instance == option) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            errors.push_back(path + ": value not in enum " + it->dump());
        }
    }
    if (instance.is_number()) {
        if (auto it = schema.find("minimum");
            it != schema.end() && instance.get<double>() < it->get<double>()) {
            errors.push_back(path + ": value below minimum " + it->dump());
        }
        if (auto it = schema.find("maximum");
            it != schema.end() && instance.get<double>() > it->get<double>()) {
            errors.push_back(path + ": value above maximum " + it->dump());
        }
    }
    if (instance.is_array()) {
        if (auto it = schema.find("minItems");
            it != schema.end() && instance.size() < it->get<std::size_t>()) {
            errors.push_back(path + ": fewer than " + it->dump() + " items");
        }
        if (auto it = schema.find("items"); it != schema.end()) {
            for (std::size_t i = 0; i < instance.size(); ++i) {
                check_schema(instance[i], *it,
                             path + "[" + std::to_string(i) + "]", errors);
            }
        }
    }
    if (instance.is_object()) {
        const json* properties = nullptr;
        if (auto it = schema.find("properties"); it != schema.end()) {
            properties = &*it;
        }
        if (auto it = schema.find("required"); it != schema.end()) {
            for (const auto& key : *it) {
                if (!instance.contains(key.get<std::string>())) {
                    errors.push_back(path + ": missing required key '" +
                                     key.get<std::string>() + "'");
                }
            }
        }
        for (auto it = instance.begin(); it != instance.end(); ++it) {
            const json* property_schema = nullptr;
            if (properties != nullptr && properties->contains(it.key())) {
                property_schema = &(*properties)[it.key()];
            }
            if (property_schema != nullptr) {
                check_schema(it.value(), *property_schema,
                             path + "." + it.key(), errors);
                continue;
            }
            if (auto extra = schema.find("additionalProperties");
                extra != schema.end()) {
                if (extra->is_boolean() && !extra->get<bool>()) {
                    errors.push_back(path + ": unexpected key '" + it.key() +
                                     "'");
                } else if (extra->is_object()) {
                    check_schema(it.value(), *extra, path + "." + it.key(),
                                 errors);
                }
            }
        }
    }
}

}  // namespace

std::vector<std::string> validate_against_schema(
    const std::string& instance_json, const std::string& schema_json) {
    json instance, schema;
    try {
        instance = json::parse(instance_json);
    } catch (const json::exception& error) {
        return {std::string("instance is not valid JSON: ") + error.what()};
    }
    try {
        schema = json::parse(schema_json);
    } catch (const json::exception& error) {
        return {std::string("schema is not valid JSON: ") + error.what()};
    }
    std::vector<std::string> errors;
    check_schema(instance, schema, "$", errors);
    return errors;
}

}  // namespace trilayer::pipeline
