#include "memexplain/remote_adapter.hpp"

#include "memexplain/error.hpp"

#include <httplib.h>

#include <cstdlib>

namespace memexplain {

RemoteModelAdapter::RemoteModelAdapter(RemoteAdapterConfig config) : config_(std::move(config)) {
    const auto scheme_end = config_.endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw ValidationError("endpoint must be an absolute URL", "train.remote.endpoint");
    }
    const auto path_start = config_.endpoint.find('/', scheme_end + 3);
    base_ = config_.endpoint.substr(0, path_start);
    prefix_ = path_start == std::string::npos ? std::string{} : config_.endpoint.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
    }
}

json RemoteModelAdapter::call(const std::string& method, const json& body) {
    httplib::Client client(base_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    const auto res = client.Post(prefix_ + "/" + method, headers, body.dump(), "application/json");
    if (!res) throw RuntimeFailure("remote adapter " + method + ": " + httplib::to_string(res.error()));
    if (res->status != 200) {
        throw RuntimeFailure("remote adapter " + method + ": HTTP " + std::to_string(res->status) + ": " +
                             res->body.substr(0, 200));
    }
    if (res->body.empty()) return json::object();
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) throw RuntimeFailure("remote adapter " + method + ": non-JSON reply");
    return reply;
}

void RemoteModelAdapter::reset(std::uint64_t seed) { call("reset", {{"seed", seed}}); }

void RemoteModelAdapter::apply_adapter(const AdapterConfig& config) {
    config.validate();
    call("apply_adapter", to_json(config));
}

BatchLosses RemoteModelAdapter::train_batch(std::span<const InstructionSample> samples, double expl_weight) {
    json rows = json::array();
    for (const auto& s : samples) rows.push_back(to_json(s));
    const json reply = call("train_batch", {{"samples", std::move(rows)}, {"expl_weight", expl_weight}});
    try {
        BatchLosses losses{reply.at("l_classif").get<double>(), std::nullopt};
        if (reply.contains("l_expl") && !reply["l_expl"].is_null()) losses.l_expl = reply["l_expl"].get<double>();
        return losses;
    } catch (const json::exception& e) {
        throw RuntimeFailure(std::string("remote adapter train_batch: ") + e.what());
    }
}

void RemoteModelAdapter::optimizer_step(const OptimizerStep& step) {
    call("optimizer_step", {{"learning_rate", step.learning_rate}, {"weight_decay", step.weight_decay}});
}

std::string RemoteModelAdapter::evaluate_generate(const std::string& image_ref, const std::string& prompt) {
    const json reply = call("generate", {{"image_ref", image_ref}, {"prompt", prompt}});
    if (!reply.contains("text") || !reply["text"].is_string()) {
        throw RuntimeFailure("remote adapter generate: reply lacks \"text\"");
    }
    return reply["text"].get<std::string>();
}

void RemoteModelAdapter::save(const std::filesystem::path& storage_ref) {
    call("save", {{"storage_ref", storage_ref.generic_string()}});
}

void RemoteModelAdapter::load(const std::filesystem::path& storage_ref) {
    call("load", {{"storage_ref", storage_ref.generic_string()}});
}

}  // namespace memexplain
