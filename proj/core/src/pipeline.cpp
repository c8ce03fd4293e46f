#include "memexplain/pipeline.hpp"

#include "memexplain/agreement.hpp"
#include "memexplain/annotation_server.hpp"
#include "memexplain/error.hpp"
#include "memexplain/mock_adapter.hpp"
#include "memexplain/remote_adapter.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>

namespace memexplain {
namespace {

namespace fs = std::filesystem;

// Lets the fixture simulate a crash part-way through a batch.
class InterruptingProvider final : public ExpertProvider {
public:
    InterruptingProvider(std::unique_ptr<ExpertProvider> inner, std::size_t interrupt_after)
        : inner_(std::move(inner)), interrupt_after_(interrupt_after) {}

    std::string complete(const ProviderRequest& request) override {
        if (++calls_ == interrupt_after_) throw std::runtime_error("simulated interruption");
        return inner_->complete(request);
    }
    std::string id() const override { return inner_->id(); }
    std::string model_version() const override { return inner_->model_version(); }

private:
    std::unique_ptr<ExpertProvider> inner_;
    std::size_t interrupt_after_;
    std::atomic<std::size_t> calls_{0};
};

// Counts calls without changing behavior.
class CountingProvider final : public ExpertProvider {
public:
    explicit CountingProvider(ExpertProvider& inner) : inner_(inner) {}
    std::string complete(const ProviderRequest& request) override {
        ++calls_;
        return inner_.complete(request);
    }
    std::string id() const override { return inner_.id(); }
    std::string model_version() const override { return inner_.model_version(); }
    std::size_t calls() const noexcept { return calls_.load(); }

private:
    ExpertProvider& inner_;
    std::atomic<std::size_t> calls_{0};
};

std::string instruction_file(TaskMode mode, std::optional<Language> language, Split split) {
    std::string name = mode == TaskMode::classify ? "classify" : "classify_explain_" + std::string(to_string(*language));
    return name + "_" + std::string(to_string(split)) + ".jsonl";
}

std::unique_ptr<TokenEmbedder> make_embedder(const RunConfig& config) {
    if (config.eval.embedder == "toy-hash") return std::make_unique<HashToyEmbedder>();
    if (config.eval.embedder == "precomputed") {
        return std::make_unique<PrecomputedEmbedder>(
            config.eval.embedder_path, config.eval.embedder_model.empty() ? "precomputed" : config.eval.embedder_model);
    }
    return nullptr;
}

std::string fallback_for(const RunConfig& config, const fs::path& instructions_dir, const LabelSet& labels) {
    if (!config.eval.fallback_label.empty()) return config.eval.fallback_label;
    const fs::path train = instructions_dir / instruction_file(TaskMode::classify, std::nullopt, Split::train);
    if (!fs::exists(train)) return labels.labels.front();
    return majority_label(read_samples(train), labels);
}

std::string utc_stamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

}  // namespace

fs::path make_run_dir(const RunConfig& config) {
    fs::path dir = config.output_root / (utc_stamp() + "-seed" + std::to_string(config.seed));
    fs::create_directories(dir);
    return dir;
}

std::unique_ptr<ExpertProvider> make_provider(const RunConfig& config) {
    std::unique_ptr<ExpertProvider> provider;
    if (config.generation.config.provider == "remote") {
        provider = std::make_unique<RemoteProvider>(config.generation.remote);
    } else {
        provider = ScriptedProvider::deterministic();
    }
    if (config.generation.mock_interrupt_after > 0) {
        if (config.generation.config.provider != "mock") {
            throw ValidationError("only applies to the mock provider", "generation.mock.interrupt_after");
        }
        provider = std::make_unique<InterruptingProvider>(std::move(provider), config.generation.mock_interrupt_after);
    }
    return provider;
}

std::unique_ptr<ModelAdapter> make_model(const RunConfig& config) {
    if (config.train.backend == "remote") {
        return std::make_unique<RemoteModelAdapter>(
            RemoteAdapterConfig{config.train.remote_endpoint, config.train.remote_api_key_env});
    }
    MockAdapterOptions options;
    options.buckets = config.train.mock_buckets;
    options.gain = config.train.mock_gain;
    return std::make_unique<MockModelAdapter>(config.label_set(), options);
}

std::string majority_label(std::span<const InstructionSample> samples, const LabelSet& labels) {
    std::vector<std::size_t> counts(labels.labels.size(), 0);
    for (const auto& s : samples) {
        if (const auto i = labels.index_of(target_label(s))) ++counts[*i];
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < counts.size(); ++i) {
        if (counts[i] > counts[best]) best = i;
    }
    return labels.labels[best];
}

EnhanceSummary enhance(const RunConfig& config, const fs::path& run_dir, ExpertProvider* provider) {
    if (config.dataset.manifest.empty()) throw ValidationError("required", "dataset.manifest");
    const LabelSet labels = config.label_set();
    const LoadedDataset dataset =
        load_dataset(config.dataset.root, config.dataset.manifest, labels, {config.dataset.missing_files});

    std::unique_ptr<ExpertProvider> owned;
    if (provider == nullptr) {
        owned = make_provider(config);
        provider = owned.get();
    }
    CountingProvider counting(*provider);

    std::vector<ExplainedRecord> records = dataset.all();
    json per_template = json::object();
    std::vector<json> failures;
    bool exceeds = false;
    fs::create_directories(run_dir / "enhance");
    for (TemplateId id : config.resolved_templates()) {
        const PromptTemplate& tmpl = builtin_template(id);
        if (tmpl.dataset != labels.name) {
            throw ValidationError("template " + std::string(to_string(id)) + " belongs to " + tmpl.dataset,
                                  "generation.templates");
        }
        BatchOptions options;
        options.checkpoint_path = run_dir / "enhance" / (std::string(to_string(id)) + ".checkpoint.jsonl");
        options.image_root = config.dataset.root;
        BatchResult result = batch_generate(records, tmpl, config.generation.config, counting, options);
        spdlog::info("{}: {} generated, {} resumed, {} failed", to_string(id), result.generated, result.resumed,
                     result.failures.size());
        for (const auto& f : result.failures) {
            json row = to_json(f);
            row["template_id"] = std::string(to_string(id));
            failures.push_back(std::move(row));
        }
        per_template[std::string(to_string(id))] = {{"generated", result.generated},
                                                    {"resumed", result.resumed},
                                                    {"failures", result.failures.size()},
                                                    {"failure_fraction", result.failure_fraction},
                                                    {"exceeds_threshold", result.exceeds_threshold}};
        exceeds = exceeds || result.exceeds_threshold;
        records = std::move(result.records);
    }

    EnhanceSummary summary;
    summary.output = run_dir / "enhanced.jsonl";
    summary.records = records.size();
    summary.failures = failures.size();
    summary.provider_calls = counting.calls();
    summary.exceeds_threshold = exceeds;
    save_dataset(summary.output, records);
    write_jsonl(run_dir / "enhance" / "failures.jsonl", failures);
    write_json(run_dir / "enhance" / "report.json", {{"config", to_json(config)},
                                                     {"records", records.size()},
                                                     {"templates", per_template},
                                                     {"provider_calls", summary.provider_calls},
                                                     {"exceeds_threshold", exceeds}});
    return summary;
}

std::vector<InstructionSample> read_samples(const fs::path& path) {
    std::vector<InstructionSample> out;
    for (const auto& row : read_jsonl(path)) out.push_back(sample_from_json(row));
    return out;
}

void write_samples(const fs::path& path, std::span<const InstructionSample> samples) {
    std::vector<json> rows;
    rows.reserve(samples.size());
    for (const auto& s : samples) rows.push_back(to_json(s));
    write_jsonl(path, rows);
}

InstructionSummary build_instructions(const RunConfig& config, const fs::path& enhanced_manifest,
                                      const fs::path& run_dir) {
    const LabelSet labels = config.label_set();
    const LoadedDataset dataset =
        load_dataset(config.dataset.root, enhanced_manifest, labels, {MissingFilePolicy::ignore});
    InstructionSummary summary;
    summary.directory = run_dir / "instructions";
    fs::create_directories(summary.directory);
    const auto& templates = config.instructions.templates;

    auto emit = [&](TaskMode mode, std::optional<Language> language) {
        for (Split split : kAllSplits) {
            const auto samples = build_stage_dataset(dataset.split(split), mode, language, templates, labels);
            const std::string file = instruction_file(mode, language, split);
            write_samples(summary.directory / file, samples);
            summary.files[file] = samples.size();
        }
    };
    emit(TaskMode::classify, std::nullopt);
    for (Language language : config.resolved_languages()) emit(TaskMode::classify_explain, language);

    write_json(summary.directory / "meta.json",
               {{"config", to_json(config)}, {"source", enhanced_manifest.generic_string()}, {"files", summary.files}});
    return summary;
}

TrainMode parse_train_mode(std::string_view name) {
    if (name == "ss") return TrainMode::single_stage;
    if (name == "ms") return TrainMode::multi_stage;
    throw ValidationError("must be ss or ms", "mode");
}

TrainSummary train(const RunConfig& config, TrainMode mode, const fs::path& instructions_dir,
                   const fs::path& run_dir, ModelAdapter* model) {
    const LabelSet labels = config.label_set();
    const Language language = config.train.language;
    auto load = [&](TaskMode task, Split split) {
        std::optional<Language> lang;
        if (task == TaskMode::classify_explain) lang = language;
        const fs::path path = instructions_dir / instruction_file(task, lang, split);
        if (!fs::exists(path)) throw ValidationError("missing instruction file " + path.string(), "instructions");
        return read_samples(path);
    };

    std::unique_ptr<ModelAdapter> owned;
    if (model == nullptr) {
        owned = make_model(config);
        model = owned.get();
    }
    EvaluateOptions eval_options;
    eval_options.fallback_label = fallback_for(config, instructions_dir, labels);
    eval_options.bleu.sentence_mean = config.eval.bleu_sentence_mean;
    const auto embedder = make_embedder(config);
    eval_options.embedder = embedder.get();
    const EvalFn eval = default_eval_fn(labels, eval_options);

    const std::string mode_name = mode == TrainMode::multi_stage ? "ms" : "ss";
    RunOptions options{run_dir / ("train-" + mode_name), config.train.selection_criterion};
    fs::create_directories(options.run_dir);

    CurriculumData data;
    data.joint_train = load(TaskMode::classify_explain, Split::train);
    data.joint_dev = load(TaskMode::classify_explain, Split::dev);
    TrainingResult result;
    if (mode == TrainMode::multi_stage) {
        data.classify_train = load(TaskMode::classify, Split::train);
        data.classify_dev = load(TaskMode::classify, Split::dev);
        result = run_curriculum(config.train.stage1, config.train.stage2, data, *model, eval, options);
    } else {
        result = run_single_stage(config.train.single_stage, data, *model, eval, options);
    }
    result.manifest["seed"] = config.seed;
    result.manifest["language"] = std::string(to_string(language));
    result.manifest["config"] = to_json(config);

    TrainSummary summary{options.run_dir / "manifest.json", options.run_dir / result.final_model_ref};
    write_json(summary.manifest, result.manifest);
    return summary;
}

EvaluateSummary evaluate(const RunConfig& config, const EvaluateRequest& request, const fs::path& run_dir) {
    const LabelSet labels = config.label_set();
    std::optional<Language> language;
    if (request.task == TaskMode::classify_explain) language = request.language;
    const fs::path samples_path = request.instructions_dir / instruction_file(request.task, language, request.split);
    if (!fs::exists(samples_path)) throw ValidationError("missing instruction file " + samples_path.string(), "split");
    const auto samples = read_samples(samples_path);
    if (samples.empty()) throw ValidationError("no samples in " + samples_path.string(), "split");

    std::unique_ptr<ModelAdapter> model;
    if (request.model_ref == "echo") {
        model = std::make_unique<EchoModelAdapter>(samples);
    } else {
        if (request.model_ref.empty()) throw ValidationError("required", "model");
        model = make_model(config);
        model->load(request.model_ref);
    }

    EvaluateOptions options;
    options.fallback_label = fallback_for(config, request.instructions_dir, labels);
    options.bleu.sentence_mean = config.eval.bleu_sentence_mean;
    const auto embedder = make_embedder(config);
    options.embedder = embedder.get();
    const fs::path dir = run_dir / request.name;
    fs::create_directories(dir);
    options.partial_report_path = dir / "partial_report.json";

    Evaluation evaluation = evaluate_model(*model, samples, labels, options);
    EvaluateSummary summary{dir / "report.json", dir / "predictions.jsonl", evaluation.report};
    std::vector<json> rows;
    for (const auto& p : evaluation.predictions) rows.push_back(to_json(p));
    write_jsonl(summary.predictions, rows);
    write_json(summary.report, {{"config", to_json(config)},
                                {"model", request.model_ref},
                                {"backend", model->name()},
                                {"split", std::string(to_string(request.split))},
                                {"task", std::string(to_string(request.task))},
                                {"language", language ? json(std::string(to_string(*language))) : json(nullptr)},
                                {"metrics", to_json(evaluation.report)}});
    return summary;
}

fs::path agreement(const RunConfig& config, const fs::path& ratings, const fs::path& run_dir,
                   const AgreementOptions& options) {
    std::vector<AnnotationRating> parsed;
    for (const auto& row : read_jsonl(ratings)) parsed.push_back(rating_from_json(row, options.bounds));
    const AgreementReport report = aggregate(parsed, options);
    const fs::path out = run_dir / "agreement" / "report.json";
    fs::create_directories(out.parent_path());
    json body = to_json(report);
    body["source"] = ratings.generic_string();
    body["config"] = to_json(config);
    write_json(out, body);
    return out;
}

fs::path stats(const RunConfig& config, const fs::path& manifest, const fs::path& run_dir) {
    const fs::path source = manifest.empty() ? config.dataset.manifest : manifest;
    if (source.empty()) throw ValidationError("required", "dataset.manifest");
    const LoadedDataset dataset =
        load_dataset(config.dataset.root, source, config.label_set(), {config.dataset.missing_files});
    json counts = json::object();
    json totals = json::object();
    for (Split s : kAllSplits) {
        counts[std::string(to_string(s))] = dataset.counts.at(s);
        totals[std::string(to_string(s))] = dataset.split_total(s);
    }
    const fs::path out = run_dir / "stats.json";
    fs::create_directories(run_dir);
    write_json(out, {{"config", to_json(config)},
                     {"manifest", source.generic_string()},
                     {"label_set", dataset.label_set.name},
                     {"counts", std::move(counts)},
                     {"split_totals", std::move(totals)},
                     {"total", dataset.total()},
                     {"missing_files", dataset.missing_files.size()},
                     {"word_stats", to_json(dataset_stats(dataset))}});
    return out;
}

void serve_annotation(const RunConfig& config, const fs::path& items_manifest, const fs::path& ratings_path) {
    const LoadedDataset dataset =
        load_dataset(config.dataset.root, items_manifest, config.label_set(), {config.dataset.missing_files});
    const auto all = dataset.all();
    auto items = tasks_from_records(all, config.annotation.language, config.annotation.guideline_ref);
    if (items.empty()) throw ValidationError("no records carry an explanation in the annotation language",
                                             "annotation.language");
    std::set<std::string> annotators;
    for (const auto& [token, annotator] : config.annotation.tokens) annotators.insert(annotator);
    if (annotators.empty()) throw ValidationError("at least one annotator token is required", "annotation.tokens");

    AnnotationStore store(std::move(items), annotators, ratings_path,
                          {config.annotation.quota, ScaleBounds{}});
    AnnotationServerConfig server_config;
    server_config.tokens = config.annotation.tokens;
    server_config.image_root = config.dataset.root;
    if (const char* admin = std::getenv(config.annotation.admin_token_env.c_str())) server_config.admin_token = admin;
    if (server_config.admin_token.empty()) {
        spdlog::warn("{} is not set; /api/export is disabled", config.annotation.admin_token_env);
    }
    AnnotationServer server(store, server_config);
    spdlog::info("annotation service on {}:{}", config.annotation.host, config.annotation.port);
    if (!server.listen(config.annotation.host, config.annotation.port)) {
        throw RuntimeFailure("cannot listen on " + config.annotation.host + ":" +
                             std::to_string(config.annotation.port));
    }
}

}  // namespace memexplain
