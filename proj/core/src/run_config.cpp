#include "memexplain/run_config.hpp"

#include "memexplain/error.hpp"

#include <set>

namespace memexplain {
namespace {

void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw ValidationError("must be an object", path);
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (auto a : allowed) known = known || a == key;
        if (!known) throw ValidationError("unknown key", path.empty() ? key : path + "." + key);
    }
}

template <typename T>
T field(const json& obj, const std::string& key, const std::string& path, T fallback) {
    if (!obj.contains(key) || obj[key].is_null()) return fallback;
    try {
        return obj[key].get<T>();
    } catch (const json::exception&) {
        throw ValidationError("has the wrong type", path.empty() ? key : path + "." + key);
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
    if (p.empty() || p.is_absolute() || base.empty()) return p;
    return (base / p).lexically_normal();
}

MissingFilePolicy parse_policy(const std::string& s) {
    if (s == "warn") return MissingFilePolicy::warn;
    if (s == "error") return MissingFilePolicy::error;
    if (s == "ignore") return MissingFilePolicy::ignore;
    throw ValidationError("must be warn, error or ignore", "dataset.missing_files");
}

std::string_view policy_name(MissingFilePolicy p) {
    switch (p) {
        case MissingFilePolicy::warn: return "warn";
        case MissingFilePolicy::error: return "error";
        case MissingFilePolicy::ignore: return "ignore";
    }
    return "warn";
}

StageConfig parse_stage(const json& doc, const std::string& key, StageConfig c, std::uint64_t seed) {
    c.seed = seed;
    if (!doc.contains(key)) return c;
    json section = doc[key];
    if (!section.is_object()) throw ValidationError("must be an object", "train." + key);
    if (!section.contains("seed")) section["seed"] = seed;
    try {
        return stage_config_from_json(section, c);
    } catch (const ValidationError& e) {
        std::string message = e.what();
        if (!e.field().empty() && message.starts_with(e.field() + ": ")) message.erase(0, e.field().size() + 2);
        throw ValidationError(message, "train." + key + (e.field().empty() ? "" : "." + e.field()));
    }
}

}  // namespace

std::vector<TemplateId> RunConfig::resolved_templates() const {
    if (!generation.templates.empty()) return generation.templates;
    if (label_set().name == "hateful") return {TemplateId::hateful_en};
    return {TemplateId::armeme_ar, TemplateId::armeme_en};
}

std::vector<Language> RunConfig::resolved_languages() const {
    if (!instructions.languages.empty()) return instructions.languages;
    if (label_set().name == "hateful") return {Language::en};
    return {Language::ar, Language::en};
}

void apply_override(json& document, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ValidationError("override must look like key.path=value", std::string(assignment));
    }
    const std::string path(assignment.substr(0, eq));
    const std::string raw(assignment.substr(eq + 1));
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &document;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ValidationError("empty path segment", path);
        if (!node->is_object()) {
            if (!node->is_null()) throw ValidationError("is not an object", path.substr(0, start ? start - 1 : 0));
            *node = json::object();
        }
        if (dot == std::string::npos) {
            (*node)[key] = std::move(value);
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

RunConfig run_config_from_json(const json& doc, const std::filesystem::path& base_dir) {
    check_keys(doc, "", {"dataset", "generation", "instructions", "train", "eval", "annotation", "seed", "output_root"});
    RunConfig c;
    c.seed = field<std::uint64_t>(doc, "seed", "", c.seed);
    c.output_root = resolve(base_dir, field<std::string>(doc, "output_root", "", c.output_root.string()));

    const json empty = json::object();
    const json& ds = doc.contains("dataset") ? doc["dataset"] : empty;
    check_keys(ds, "dataset", {"profile", "root", "manifest", "missing_files"});
    c.dataset.profile = field<std::string>(ds, "profile", "dataset", c.dataset.profile);
    try {
        (void)LabelSet::by_name(c.dataset.profile);
    } catch (const std::exception&) {
        throw ValidationError("must be armeme or hateful", "dataset.profile");
    }
    c.dataset.root = resolve(base_dir, field<std::string>(ds, "root", "dataset", ""));
    c.dataset.manifest = resolve(base_dir, field<std::string>(ds, "manifest", "dataset", ""));
    c.dataset.missing_files = parse_policy(field<std::string>(ds, "missing_files", "dataset", "warn"));

    const json& gen = doc.contains("generation") ? doc["generation"] : empty;
    check_keys(gen, "generation",
               {"word_limit", "temperature", "max_retries", "concurrency_limit", "provider", "over_limit_tolerance",
                "failure_threshold", "retry_backoff_ms", "fixed_timestamp", "templates", "remote", "mock"});
    auto& g = c.generation.config;
    g.word_limit = field<std::size_t>(gen, "word_limit", "generation", g.word_limit);
    g.temperature = field<double>(gen, "temperature", "generation", g.temperature);
    g.max_retries = field<std::size_t>(gen, "max_retries", "generation", g.max_retries);
    g.concurrency_limit = field<std::size_t>(gen, "concurrency_limit", "generation", g.concurrency_limit);
    g.provider = field<std::string>(gen, "provider", "generation", g.provider);
    g.over_limit_tolerance = field<double>(gen, "over_limit_tolerance", "generation", g.over_limit_tolerance);
    g.failure_threshold = field<double>(gen, "failure_threshold", "generation", g.failure_threshold);
    g.retry_backoff = std::chrono::milliseconds(field<std::int64_t>(gen, "retry_backoff_ms", "generation", 0));
    if (gen.contains("fixed_timestamp") && !gen["fixed_timestamp"].is_null()) {
        g.fixed_timestamp = field<std::string>(gen, "fixed_timestamp", "generation", "");
    }
    if (g.word_limit == 0) throw ValidationError("must be positive", "generation.word_limit");
    if (g.max_retries == 0) throw ValidationError("must be positive", "generation.max_retries");
    if (g.concurrency_limit == 0) throw ValidationError("must be positive", "generation.concurrency_limit");
    if (g.over_limit_tolerance < 1.0) throw ValidationError("must be at least 1", "generation.over_limit_tolerance");
    if (g.failure_threshold < 0.0 || g.failure_threshold > 1.0) {
        throw ValidationError("must be in [0, 1]", "generation.failure_threshold");
    }
    if (g.provider != "mock" && g.provider != "remote") {
        throw ValidationError("must be mock or remote", "generation.provider");
    }
    for (const auto& t : field<std::vector<std::string>>(gen, "templates", "generation", {})) {
        try {
            c.generation.templates.push_back(parse_template_id(t));
        } catch (const std::exception&) {
            throw ValidationError("unknown template '" + t + "'", "generation.templates");
        }
    }
    const json& remote = gen.contains("remote") ? gen["remote"] : empty;
    check_keys(remote, "generation.remote", {"endpoint", "model", "api_key_env", "auth_header", "timeout_s"});
    auto& r = c.generation.remote;
    r.endpoint = field<std::string>(remote, "endpoint", "generation.remote", r.endpoint);
    r.model = field<std::string>(remote, "model", "generation.remote", r.model);
    r.api_key_env = field<std::string>(remote, "api_key_env", "generation.remote", r.api_key_env);
    r.auth_header = field<std::string>(remote, "auth_header", "generation.remote", r.auth_header);
    r.timeout = std::chrono::seconds(field<std::int64_t>(remote, "timeout_s", "generation.remote", r.timeout.count()));
    const json& mock = gen.contains("mock") ? gen["mock"] : empty;
    check_keys(mock, "generation.mock", {"interrupt_after"});
    c.generation.mock_interrupt_after = field<std::size_t>(mock, "interrupt_after", "generation.mock", 0);

    const json& ins = doc.contains("instructions") ? doc["instructions"] : empty;
    check_keys(ins, "instructions", {"version", "classify", "classify_explain_en", "classify_explain_ar", "languages"});
    auto& it = c.instructions.templates;
    it.version = field<std::string>(ins, "version", "instructions", it.version);
    it.classify = field<std::string>(ins, "classify", "instructions", it.classify);
    it.classify_explain_en = field<std::string>(ins, "classify_explain_en", "instructions", it.classify_explain_en);
    it.classify_explain_ar = field<std::string>(ins, "classify_explain_ar", "instructions", it.classify_explain_ar);
    for (const auto& l : field<std::vector<std::string>>(ins, "languages", "instructions", {})) {
        try {
            c.instructions.languages.push_back(parse_language(l));
        } catch (const std::exception&) {
            throw ValidationError("unknown language '" + l + "'", "instructions.languages");
        }
    }

    const json& tr = doc.contains("train") ? doc["train"] : empty;
    check_keys(tr, "train",
               {"backend", "selection_criterion", "language", "stage1", "stage2", "single_stage", "remote", "mock"});
    auto& t = c.train;
    t.backend = field<std::string>(tr, "backend", "train", t.backend);
    if (t.backend != "mock" && t.backend != "remote") throw ValidationError("must be mock or remote", "train.backend");
    t.selection_criterion = field<std::string>(tr, "selection_criterion", "train", t.selection_criterion);
    static const std::set<std::string> criteria{"accuracy", "weighted_f1", "macro_f1", "bleu", "meteor", "embed_sim_f1"};
    if (!criteria.contains(t.selection_criterion)) {
        throw ValidationError("unknown metric", "train.selection_criterion");
    }
    t.language = parse_language(field<std::string>(tr, "language", "train", "en"));
    t.stage1 = parse_stage(tr, "stage1", StageConfig::defaults(StageId::stage1), c.seed);
    // Stage 2 fields left unset follow the stage-1 values through the default profile.
    t.stage2 = parse_stage(tr, "stage2", derive_stage2(t.stage1), c.seed);
    t.single_stage = parse_stage(tr, "single_stage", StageConfig::defaults(StageId::single_stage), c.seed);
    const json& tremote = tr.contains("remote") ? tr["remote"] : empty;
    check_keys(tremote, "train.remote", {"endpoint", "api_key_env"});
    t.remote_endpoint = field<std::string>(tremote, "endpoint", "train.remote", t.remote_endpoint);
    t.remote_api_key_env = field<std::string>(tremote, "api_key_env", "train.remote", t.remote_api_key_env);
    const json& tmock = tr.contains("mock") ? tr["mock"] : empty;
    check_keys(tmock, "train.mock", {"buckets", "gain"});
    t.mock_buckets = field<std::size_t>(tmock, "buckets", "train.mock", t.mock_buckets);
    t.mock_gain = field<double>(tmock, "gain", "train.mock", t.mock_gain);

    const json& ev = doc.contains("eval") ? doc["eval"] : empty;
    check_keys(ev, "eval", {"fallback_label", "embedder", "embedder_path", "embedder_model", "bleu_sentence_mean"});
    c.eval.fallback_label = field<std::string>(ev, "fallback_label", "eval", "");
    if (!c.eval.fallback_label.empty() && !c.label_set().contains(c.eval.fallback_label)) {
        throw ValidationError("not in the label set", "eval.fallback_label");
    }
    c.eval.embedder = field<std::string>(ev, "embedder", "eval", c.eval.embedder);
    if (c.eval.embedder != "toy-hash" && c.eval.embedder != "precomputed" && c.eval.embedder != "none") {
        throw ValidationError("must be toy-hash, precomputed or none", "eval.embedder");
    }
    c.eval.embedder_path = resolve(base_dir, field<std::string>(ev, "embedder_path", "eval", ""));
    c.eval.embedder_model = field<std::string>(ev, "embedder_model", "eval", "");
    if (c.eval.embedder == "precomputed" && c.eval.embedder_path.empty()) {
        throw ValidationError("required for the precomputed embedder", "eval.embedder_path");
    }
    c.eval.bleu_sentence_mean = field<bool>(ev, "bleu_sentence_mean", "eval", false);

    const json& an = doc.contains("annotation") ? doc["annotation"] : empty;
    check_keys(an, "annotation", {"host", "port", "quota", "language", "guideline_ref", "tokens", "annotators", "admin_token_env"});
    auto& a = c.annotation;
    a.host = field<std::string>(an, "host", "annotation", a.host);
    a.port = field<int>(an, "port", "annotation", a.port);
    a.quota = field<std::size_t>(an, "quota", "annotation", a.quota);
    a.language = parse_language(field<std::string>(an, "language", "annotation", "ar"));
    a.guideline_ref = field<std::string>(an, "guideline_ref", "annotation", a.guideline_ref);
    a.tokens = field<std::map<std::string, std::string>>(an, "tokens", "annotation", {});
    a.admin_token_env = field<std::string>(an, "admin_token_env", "annotation", a.admin_token_env);
    if (a.port < 0 || a.port > 65535) throw ValidationError("must be a TCP port", "annotation.port");
    if (a.quota == 0) throw ValidationError("must be positive", "annotation.quota");
    return c;
}

json to_json(const RunConfig& c) {
    json templates = json::array();
    for (TemplateId t : c.resolved_templates()) templates.push_back(std::string(to_string(t)));
    json languages = json::array();
    for (Language l : c.resolved_languages()) languages.push_back(std::string(to_string(l)));
    const auto& g = c.generation.config;
    json gen = {{"word_limit", g.word_limit},
                {"temperature", g.temperature},
                {"max_retries", g.max_retries},
                {"concurrency_limit", g.concurrency_limit},
                {"provider", g.provider},
                {"over_limit_tolerance", g.over_limit_tolerance},
                {"failure_threshold", g.failure_threshold},
                {"retry_backoff_ms", g.retry_backoff.count()},
                {"fixed_timestamp", g.fixed_timestamp ? json(*g.fixed_timestamp) : json(nullptr)},
                {"templates", std::move(templates)},
                {"remote",
                 {{"endpoint", c.generation.remote.endpoint},
                  {"model", c.generation.remote.model},
                  {"api_key_env", c.generation.remote.api_key_env},
                  {"auth_header", c.generation.remote.auth_header},
                  {"timeout_s", c.generation.remote.timeout.count()}}},
                {"mock", {{"interrupt_after", c.generation.mock_interrupt_after}}}};
    const auto& it = c.instructions.templates;
    // Tokens are credentials; only the annotator ids are echoed.
    std::set<std::string> annotators;
    for (const auto& [token, annotator] : c.annotation.tokens) annotators.insert(annotator);
    return {{"seed", c.seed},
            {"output_root", c.output_root.generic_string()},
            {"dataset",
             {{"profile", c.dataset.profile},
              {"root", c.dataset.root.generic_string()},
              {"manifest", c.dataset.manifest.generic_string()},
              {"missing_files", std::string(policy_name(c.dataset.missing_files))}}},
            {"generation", std::move(gen)},
            {"instructions",
             {{"version", it.version},
              {"classify", it.classify},
              {"classify_explain_en", it.classify_explain_en},
              {"classify_explain_ar", it.classify_explain_ar},
              {"languages", std::move(languages)}}},
            {"train",
             {{"backend", c.train.backend},
              {"selection_criterion", c.train.selection_criterion},
              {"language", std::string(to_string(c.train.language))},
              {"stage1", to_json(c.train.stage1)},
              {"stage2", to_json(c.train.stage2)},
              {"single_stage", to_json(c.train.single_stage)},
              {"remote", {{"endpoint", c.train.remote_endpoint}, {"api_key_env", c.train.remote_api_key_env}}},
              {"mock", {{"buckets", c.train.mock_buckets}, {"gain", c.train.mock_gain}}}}},
            {"eval",
             {{"fallback_label", c.eval.fallback_label},
              {"embedder", c.eval.embedder},
              {"embedder_path", c.eval.embedder_path.generic_string()},
              {"embedder_model", c.eval.embedder_model},
              {"bleu_sentence_mean", c.eval.bleu_sentence_mean}}},
            {"annotation",
             {{"host", c.annotation.host},
              {"port", c.annotation.port},
              {"quota", c.annotation.quota},
              {"language", std::string(to_string(c.annotation.language))},
              {"guideline_ref", c.annotation.guideline_ref},
              {"annotators", annotators},
              {"admin_token_env", c.annotation.admin_token_env}}}};
}

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    json doc;
    try {
        doc = read_json(path);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("cannot read config: ") + e.what(), "config");
    }
    for (const auto& o : overrides) apply_override(doc, o);
    return run_config_from_json(doc, path.parent_path());
}

}  // namespace memexplain
