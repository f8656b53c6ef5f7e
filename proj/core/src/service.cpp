#include "dune/service.hpp"

#include <map>
#include <mutex>
#include <shared_mutex>

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "dune/kb.hpp"
#include "dune/session.hpp"
#include "report_json.hpp"

namespace dune {
namespace {

using detail::ordered_json;

constexpr const char* kJson = "application/json";

ordered_json diagnostics_json(const std::vector<Diagnostic>& diagnostics) {
    auto out = ordered_json::array();
    for (const auto& d : diagnostics) {
        out.push_back({{"severity", to_string(d.severity)},
                       {"line", d.line},
                       {"column", d.column},
                       {"code", d.code},
                       {"message", d.message}});
    }
    return out;
}

void reply(httplib::Response& res, int status, const ordered_json& body) {
    res.status = status;
    res.set_content(body.dump(), kJson);
}

void fail(httplib::Response& res, int status, std::string message) {
    reply(res, status, ordered_json{{"error", std::move(message)}});
}

ordered_json suggestion_json(const Engine& engine) {
    auto q = engine.best_question();
    if (!q) return nullptr;
    return {{"demon", q->demon}, {"feature", q->feature.str()}, {"potential", q->potential}};
}

// Parses a JSON object body and returns the string member `key`.
std::optional<std::string> string_member(const std::string& body, const char* key) {
    auto j = ordered_json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains(key) || !j[key].is_string()) return std::nullopt;
    return j[key].get<std::string>();
}

}  // namespace

std::string kb_content_id(std::string_view text) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < 8 && i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

struct Service::Impl {
    struct Entry {
        std::mutex mutex;
        std::string kb_id;
        Session session;

        Entry(std::string id, KnowledgeBase kb) : kb_id(std::move(id)), session(std::move(kb)) {}
    };

    std::optional<std::filesystem::path> log_dir;
    httplib::Server server;

    std::shared_mutex kbs_mutex;
    std::map<std::string, KnowledgeBase> kbs;

    std::shared_mutex sessions_mutex;
    std::map<std::string, std::shared_ptr<Entry>> sessions;

    std::shared_ptr<Entry> find_session(const std::string& id) {
        std::shared_lock lock(sessions_mutex);
        auto it = sessions.find(id);
        return it == sessions.end() ? nullptr : it->second;
    }

    void routes(Service& self) {
        server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });

        server.Post("/kb", [&self](const httplib::Request& req, httplib::Response& res) {
            auto reg = self.register_kb(req.body);
            if (reg.kb_id.empty()) {
                reply(res, 422, ordered_json{{"diagnostics", diagnostics_json(reg.diagnostics)}});
            } else {
                reply(res, 200, ordered_json{{"kb_id", reg.kb_id}, {"diagnostics", diagnostics_json(reg.diagnostics)}});
            }
        });

        server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
            auto kb_id = string_member(req.body, "kb_id");
            if (!kb_id) return fail(res, 400, "body must be an object with a string kb_id");
            KnowledgeBase kb;
            {
                std::shared_lock lock(kbs_mutex);
                auto it = kbs.find(*kb_id);
                if (it == kbs.end()) return fail(res, 404, "unknown kb_id '" + *kb_id + "'");
                kb = it->second;
            }
            auto entry = std::make_shared<Entry>(*kb_id, std::move(kb));
            if (log_dir) attach_log_dir(entry->session, *log_dir);
            auto id = entry->session.id();
            {
                std::unique_lock lock(sessions_mutex);
                sessions.emplace(id, std::move(entry));
            }
            reply(res, 201, ordered_json{{"session_id", id}});
        });

        server.Post(R"(/sessions/([0-9a-f]+)/features)", [this](const httplib::Request& req, httplib::Response& res) {
            auto entry = find_session(req.matches[1]);
            if (!entry) return fail(res, 404, "unknown session");
            auto feature = string_member(req.body, "feature");
            if (!feature) return fail(res, 400, "body must be an object with a string feature");
            if (!is_identifier(*feature)) return fail(res, 400, "malformed feature identifier '" + *feature + "'");
            std::lock_guard lock(entry->mutex);
            auto report = entry->session.submit(*feature);
            reply(res, 200, detail::to_json(report));
        });

        server.Get(R"(/sessions/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
            auto entry = find_session(req.matches[1]);
            if (!entry) return fail(res, 404, "unknown session");
            std::lock_guard lock(entry->mutex);
            const auto& session = entry->session;
            const auto& engine = session.engine();

            ordered_json view;
            view["session_id"] = session.id();
            view["kb_id"] = entry->kb_id;
            view["created_at"] = session.created_at();
            view["step"] = engine.step();
            view["rows"] = detail::rows_to_json(engine.snapshot());
            view["events"] = ordered_json::array();
            for (const auto& report : session.log()) {
                for (const auto& e : report.events) {
                    auto event = detail::to_json(e);
                    event["fnum"] = report.fnum;
                    view["events"].push_back(std::move(event));
                }
            }
            view["suggestion"] = suggestion_json(engine);
            view["reachability"] = ordered_json::object();
            for (const auto& d : engine.kb().demons) view["reachability"][d.name] = to_string(engine.reachability(d.name));
            view["vocabulary"] = ordered_json::array();
            for (const auto& f : vocabulary(engine.kb())) view["vocabulary"].push_back(f.str());
            reply(res, 200, view);
        });

        server.Get(R"(/sessions/([0-9a-f]+)/trace)", [this](const httplib::Request& req, httplib::Response& res) {
            auto entry = find_session(req.matches[1]);
            if (!entry) return fail(res, 404, "unknown session");
            std::lock_guard lock(entry->mutex);
            auto trace = ordered_json::array();
            for (const auto& report : entry->session.log()) trace.push_back(detail::to_json(report));
            reply(res, 200, trace);
        });

        server.Get(R"(/sessions/([0-9a-f]+)/question)", [this](const httplib::Request& req, httplib::Response& res) {
            auto entry = find_session(req.matches[1]);
            if (!entry) return fail(res, 404, "unknown session");
            std::lock_guard lock(entry->mutex);
            reply(res, 200, suggestion_json(entry->session.engine()));
        });

        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) fail(res, res.status, httplib::status_message(res.status));
        });
    }
};

Service::Service(std::optional<std::filesystem::path> log_dir) : impl_(std::make_unique<Impl>()) {
    impl_->log_dir = std::move(log_dir);
    // The library default shares the port (SO_REUSEPORT); a busy port must be a bind failure instead.
    impl_->server.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    impl_->routes(*this);
}

Service::~Service() { stop(); }

KbRegistration Service::register_kb(std::string_view text) {
    KbRegistration reg;
    auto parsed = parse_kb({std::string(text), "<request>"});
    reg.diagnostics = std::move(parsed.diagnostics);
    if (!parsed.kb) return reg;
    auto semantic = validate_kb(*parsed.kb);
    reg.diagnostics.insert(reg.diagnostics.end(), semantic.begin(), semantic.end());
    if (has_errors(reg.diagnostics)) return reg;

    reg.kb_id = kb_content_id(text);
    std::unique_lock lock(impl_->kbs_mutex);
    impl_->kbs.try_emplace(reg.kb_id, std::move(*parsed.kb));
    return reg;
}

std::vector<std::pair<std::string, KbRegistration>> Service::register_kb_dir(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".dune") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<std::pair<std::string, KbRegistration>> out;
    for (const auto& path : files) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream text;
        text << in.rdbuf();
        out.emplace_back(path.filename().string(), register_kb(text.str()));
    }
    return out;
}

int Service::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
}

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace dune
