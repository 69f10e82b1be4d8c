#include "pcqa/session/server.hpp"

#include <fstream>

#include <httplib.h>

#include "pcqa/util/errors.hpp"
#include "pcqa/util/kv_config.hpp"

namespace pcqa {

using nlohmann::json;

json trial_descriptor(const std::string& session, const Trial& t) {
    const std::string left = t.shown(Side::Left), right = t.shown(Side::Right);
    json d = {{"session", session},
              {"done", false},
              {"trial_index", t.index},
              {"protocol", to_string(t.protocol)},
              {"part", t.part},
              {"side_map", {{"left", left}, {"right", right}}},
              {"assets", {{"left", "/assets/" + left}, {"right", "/assets/" + right}}},
              {"time_budget_s", kTrialTimeBudgetS}};
    if (t.protocol == Protocol::DSIS) {
        d["reference_side"] = t.reference_side == Side::Left ? "left" : "right";
        d["hold_s"] = kDsisHoldS;
        d["choices"] = json::array({{{"value", 5}, {"label", "Imperceptible"}},
                                    {{"value", 4}, {"label", "Perceptible, but not annoying"}},
                                    {{"value", 3}, {"label", "Slightly annoying"}},
                                    {{"value", 2}, {"label", "Annoying"}},
                                    {{"value", 1}, {"label", "Very annoying"}}});
    } else {
        d["group"] = {{"codec", t.group.codec}, {"rate", t.group.rate}, {"content", t.group.content}};
        d["choices"] = json::array({"left", "right", "not_sure"});
    }
    return d;
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
    send_json(res, status, {{"error", kind}, {"message", message}});
}

// Runs `body`, translating toolkit errors into HTTP statuses.
template <class F>
void guarded(httplib::Response& res, F&& body) {
    try {
        body();
    } catch (const AuthError& e) {
        send_error(res, 401, "auth", e.what());
    } catch (const StateError& e) {
        send_error(res, 409, "state", e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Validation)
            send_error(res, 400, "validation", e.what());
        else
            send_error(res, 500, e.kind() == ErrorKind::Environment ? "environment" : "internal", e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
    }
}

json parse_body(const httplib::Request& req) {
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("request body is not JSON: ") + e.what());
    }
}

json info_json(const SessionInfo& i) {
    return {{"session", i.id},         {"subject", i.subject},   {"protocol", to_string(i.protocol)},
            {"closed", i.closed},      {"trials", i.trials},     {"answered", i.answered},
            {"duplicates", i.duplicates}};
}

}  // namespace

struct SessionServer::Impl {
    SessionStore& store;
    std::shared_ptr<AssetStore> assets;
    httplib::Server http;

    Impl(SessionStore& s, std::shared_ptr<AssetStore> a) : store(s), assets(std::move(a)) { routes(); }

    void routes() {
        http.Post("/session", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const json body = parse_body(req);
                if (!body.is_object() || !body.contains("subject") || !body["subject"].is_string())
                    throw ValidationError("\"subject\" is required");
                if (!body.contains("protocol") || !body["protocol"].is_string())
                    throw ValidationError("\"protocol\" is required");
                PlanOptions opts;
                std::uint64_t seed = 0;
                if (body.contains("seed")) {
                    if (!body["seed"].is_number_unsigned()) throw ValidationError("\"seed\" must be an unsigned integer");
                    seed = body["seed"].get<std::uint64_t>();
                }
                if (body.contains("parts")) {
                    if (!body["parts"].is_number_integer()) throw ValidationError("\"parts\" must be 1 or 2");
                    opts.parts = body["parts"].get<int>();
                    if (opts.parts != 1 && opts.parts != 2) throw ValidationError("\"parts\" must be 1 or 2");
                }
                if (body.contains("separate_contents")) {
                    if (!body["separate_contents"].is_boolean())
                        throw ValidationError("\"separate_contents\" must be a boolean");
                    opts.separate_contents = body["separate_contents"].get<bool>();
                }
                const auto info = store.open(body["subject"].get<std::string>(),
                                             parse_protocol(body["protocol"].get<std::string>()), seed, opts);
                send_json(res, 201, info_json(info));
            });
        });
        http.Get(R"(/session/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, info_json(store.info(req.matches[1]))); });
        });
        http.Get(R"(/session/([^/]+)/next)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const std::string id = req.matches[1];
                const auto trial = store.next(id);
                if (!trial)
                    send_json(res, 200, {{"session", id}, {"done", true}});
                else
                    send_json(res, 200, trial_descriptor(id, *trial));
            });
        });
        http.Post(R"(/session/([^/]+)/vote)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const std::string id = req.matches[1];
                store.info(id);  // unknown session is an auth failure before any body check
                const auto r = store.submit(trial_record_from_json(parse_body(req), id));
                send_json(res, 200, {{"accepted", r.accepted}, {"duplicate", r.duplicate}, {"flags", r.flags}});
            });
        });
        http.Post(R"(/session/([^/]+)/close)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                store.close(req.matches[1]);
                send_json(res, 200, info_json(store.info(req.matches[1])));
            });
        });
        http.Get("/export", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                std::vector<std::string> ids;
                if (req.has_param("sessions")) ids = split_list(req.get_param_value("sessions"));
                const auto files = store.export_results(ids);
                res.status = 200;
                res.set_content(make_tar({{"dsis_scores.csv", files.dsis_csv}, {"pwc_votes.jsonl", files.pwc_jsonl}}),
                                "application/x-tar");
            });
        });
        http.Get(R"(/assets/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const std::string id = req.matches[1];
                if (!assets) return send_error(res, 404, "not_found", "no asset directory configured");
                if (req.get_param_value("format") == "ply") {
                    const auto path = assets->ply_path(id);
                    if (!path) return send_error(res, 404, "not_found", "unknown asset '" + id + "'");
                    std::ifstream in(*path, std::ios::binary);
                    res.set_content(std::string(std::istreambuf_iterator<char>(in), {}), "application/octet-stream");
                    return;
                }
                const auto bytes = assets->packed(id);
                if (!bytes) return send_error(res, 404, "not_found", "unknown asset '" + id + "'");
                res.set_content(*bytes, "application/octet-stream");
            });
        });
        http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) send_error(res, res.status, "not_found", "no such route");
        });
    }
};

SessionServer::SessionServer(SessionStore& store, std::shared_ptr<AssetStore> assets)
    : impl_(std::make_unique<Impl>(store, std::move(assets))) {}

SessionServer::~SessionServer() { stop(); }

int SessionServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int p = impl_->http.bind_to_any_port(host);
        if (p < 0) throw EnvironmentError("cannot bind " + host);
        return p;
    }
    if (!impl_->http.bind_to_port(host, port))
        throw EnvironmentError("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void SessionServer::run() { impl_->http.listen_after_bind(); }
void SessionServer::stop() {
    if (impl_->http.is_running()) impl_->http.stop();
}
void SessionServer::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace pcqa
