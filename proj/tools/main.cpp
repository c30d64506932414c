#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "trilayer/errors.hpp"
#include "trilayer/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using namespace trilayer;

struct CliOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> threads;
};

pipeline::RunConfig effective_config(const CliOptions& options) {
    pipeline::RunConfig config = pipeline::load_run_config(options.config_path);
    if (options.seed.has_value()) config.seed = *options.seed;
    if (options.out.has_value()) config.output_dir = *options.out;
    if (options.threads.has_value()) config.sgns.workers = *options.threads;
    return config;
}

void require_output_dir(const pipeline::RunConfig& config) {
    if (config.output_dir.empty()) {
        throw ConfigError(
            "no output directory: set output_dir in the config or pass --out");
    }
}

void print_coverage(const pipeline::Report& report) {
    const auto& c = report.coverage;
    std::cout << "channels=" << c.channels << " videos=" << c.videos
              << " documents=" << c.documents << "\n";
}

void write_tokens(const pipeline::AnalysisArtifacts& artifacts,
                  const pipeline::RunConfig& config) {
    fs::create_directories(config.output_dir);
    const std::string path =
        (fs::path(config.output_dir) / "tokens.jsonl").string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write output file: " + path);
    for (const auto& doc : artifacts.tokens) {
        nlohmann::ordered_json line;
        line["video_id"] = doc.video_id;
        line["channel_id"] = doc.channel_id;
        line["source"] = corpus::to_string(doc.source);
        line["tokens"] = doc.tokens;
        out << line.dump() << "\n";
    }
    std::cout << "wrote " << path << "\n";
}

void write_models(const pipeline::AnalysisArtifacts& artifacts,
                  const pipeline::RunConfig& config) {
    const fs::path models = fs::path(config.output_dir) / "models";
    fs::create_directories(models);
    for (const auto& [name, model] : artifacts.topic_models) {
        const std::string path = (models / ("lda_" + name + ".lda")).string();
        lda::save_topic_model(model, path);
        std::cout << "wrote " << path << "\n";
    }
    if (artifacts.has_base && artifacts.report.base_model_substituted) {
        const std::string path = (models / "base.emb").string();
        sgns::save_embedding(artifacts.base, path);
        std::cout << "wrote " << path << "\n";
    }
    for (const auto& [name, model] : artifacts.channel_models) {
        const std::string path = (models / (name + ".emb")).string();
        sgns::save_embedding(model, path);
        std::cout << "wrote " << path << "\n";
    }
}

void write_csv_bundle(const pipeline::Report& report,
                      const pipeline::RunConfig& config) {
    const std::string dir = (fs::path(config.output_dir) / "csv").string();
    for (const auto& path :
         pipeline::emit_report(report, pipeline::ReportFormat::csv_bundle, dir)) {
        std::cout << "wrote " << path << "\n";
    }
}

int dispatch(const std::string& command, const CliOptions& options) {
    pipeline::RunConfig config = effective_config(options);

    if (command == "ingest") {
        auto artifacts = pipeline::run_analysis(config, pipeline::Stage::ingest);
        print_coverage(artifacts.report);
        return 0;
    }
    if (command == "preprocess") {
        auto artifacts =
            pipeline::run_analysis(config, pipeline::Stage::preprocess);
        require_output_dir(config);
        write_tokens(artifacts, config);
        print_coverage(artifacts.report);
        std::cout << "documents_preprocessed="
                  << artifacts.report.coverage.documents_preprocessed
                  << " excluded=" << artifacts.report.exclusions.size() << "\n";
        return 0;
    }
    if (command == "lexicon") {
        auto artifacts =
            pipeline::run_analysis(config, pipeline::Stage::lexical);
        require_output_dir(config);
        write_csv_bundle(artifacts.report, config);
        return 0;
    }
    if (command == "topics") {
        auto artifacts = pipeline::run_analysis(config, pipeline::Stage::topics);
        require_output_dir(config);
        write_models(artifacts, config);
        write_csv_bundle(artifacts.report, config);
        return 0;
    }
    if (command == "embed") {
        auto artifacts =
            pipeline::run_analysis(config, pipeline::Stage::embeddings);
        require_output_dir(config);
        write_models(artifacts, config);
        return 0;
    }
    if (command == "weat") {
        auto artifacts =
            pipeline::run_analysis(config, pipeline::Stage::embeddings);
        require_output_dir(config);
        write_csv_bundle(artifacts.report, config);
        return 0;
    }
    if (command == "report") {
        auto artifacts = pipeline::run_analysis(config, pipeline::Stage::report);
        require_output_dir(config);
        for (const auto& path :
             pipeline::emit_report(artifacts.report, pipeline::ReportFormat::json,
                                   config.output_dir)) {
            std::cout << "wrote " << path << "\n";
        }
        write_csv_bundle(artifacts.report, config);
        return 0;
    }
    if (command == "run-all") {
        require_output_dir(config);
        pipeline::Report report = pipeline::run_full_analysis(config);
        std::cout << "wrote "
                  << (fs::path(config.output_dir) / "report.json").string()
                  << "\n";
        print_coverage(report);
        return 0;
    }
    throw ConfigError("unknown subcommand: " + command);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Three-layer corpus analytics: lexical category profiles, topic "
        "models and embedding-bias measurements over channel corpora."};
    app.require_subcommand(1);

    CliOptions options;
    const std::vector<std::string> commands = {
        "ingest",  "preprocess", "lexicon", "topics",
        "embed",   "weat",       "report",  "run-all"};
    const std::vector<std::string> descriptions = {
        "Load and validate the corpus, print coverage counts",
        "Run markup stripping, language filter, tokenization; write tokens",
        "Run the lexical category layer; write the CSV tables",
        "Train per-class topic models; write models and tables",
        "Train the base and per-channel embedding models; write them",
        "Run the embedding bias tests; write the CSV tables",
        "Run the full analysis; write report.json and the CSV tables",
        "Run everything and write all artifacts (report, CSV, models, tokens)"};
    for (std::size_t i = 0; i < commands.size(); ++i) {
        CLI::App* sub = app.add_subcommand(commands[i], descriptions[i]);
        sub->add_option("--config", options.config_path,
                        "Run configuration file")
            ->required();
        sub->add_option("--seed", options.seed,
                        "Override the configured global seed");
        sub->add_option("--out", options.out,
                        "Override the configured output directory");
        sub->add_option("--threads", options.threads,
                        "Embedding trainer workers (>1 is non-deterministic)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& error) {
        const int code = app.exit(error);
        return code == 0 ? 0 : 2;
    }

    try {
        return dispatch(app.get_subcommands().front()->get_name(), options);
    } catch (const ConfigError& error) {
        std::cerr << "configuration error: " << error.what() << "\n";
        return 2;
    } catch (const DataError& error) {
        std::cerr << "data error: " << error.what() << "\n";
        return 3;
    } catch (const std::exception& error) {
        std::cerr << "internal error: " << error.what() << "\n";
        return 1;
    }
}
