#include "gaze/review/http_api.hpp"

#include <httplib.h>

#include "gaze/review/audit.hpp"

namespace gaze::review {

namespace fs = std::filesystem;

void SessionRegistry::add(std::shared_ptr<ReviewSession> session, fs::path media_root) {
  std::lock_guard lk(mu_);
  const std::string id = session->id();
  sessions_[id] = Entry{std::move(session), std::move(media_root)};
}

std::shared_ptr<ReviewSession> SessionRegistry::find(const std::string& id) const {
  std::lock_guard lk(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(Errc::SessionUnknown, "unknown session " + id);
  return it->second.session;
}

fs::path SessionRegistry::media_root(const std::string& id) const {
  std::lock_guard lk(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(Errc::SessionUnknown, "unknown session " + id);
  return it->second.media_root;
}

int http_status_for(Errc code) {
  switch (code) {
    case Errc::SessionUnknown: return 404;
    case Errc::NotLocked:
    case Errc::InvalidTransition:
    case Errc::PendingItemsRemain:
    case Errc::NothingAccepted: return 409;
    case Errc::MissingRationale:
    case Errc::QuestionnaireInvalid:
    case Errc::NoPairs: return 422;
    case Errc::SchemaViolation: return 400;
    default: return 500;
  }
}

namespace {

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(canonical_dump(body), "application/json");
}

Json parse_body(const httplib::Request& req) {
  try {
    return Json::parse(req.body);
  } catch (const Json::parse_error& e) {
    fail(Errc::SchemaViolation, std::string("request body is not JSON: ") + e.what());
  }
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      reply(res, http_status_for(e.code()), Json{{"error", to_string(e.code())}, {"message", e.what()}});
    } catch (const Json::exception& e) {
      reply(res, 400, Json{{"error", "SchemaViolation"}, {"message", e.what()}});
    } catch (const std::exception& e) {
      reply(res, 500, Json{{"error", "Internal"}, {"message", e.what()}});
    }
  };
}

Json items_json(const std::vector<TimelineItem>& items) {
  Json out = Json::array();
  for (const auto& t : items) out.push_back(fusion::to_json(t));
  return out;
}

std::string mime_for(const fs::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".json") return "application/json";
  if (ext == ".jsonl") return "application/x-ndjson";
  if (ext == ".ppm") return "image/x-portable-pixmap";
  if (ext == ".wav") return "audio/wav";
  return "application/octet-stream";
}

}  // namespace

struct ReviewServer::Impl {
  SessionRegistry& registry;
  httplib::Server server;
  explicit Impl(SessionRegistry& r) : registry(r) {}
};

ReviewServer::ReviewServer(SessionRegistry& registry) : impl_(std::make_unique<Impl>(registry)) {
  auto& srv = impl_->server;
  SessionRegistry& reg = registry;

  srv.Get("/sessions/:id/timeline", guarded([&reg](const httplib::Request& req, httplib::Response& res) {
            const auto s = reg.find(req.path_params.at("id"));
            Json skips = Json::array();
            for (const auto& k : s->skips()) skips.push_back(fusion::to_json(k));
            reply(res, 200,
                  Json{{"session_id", s->id()}, {"finalized", s->finalized()}, {"items", items_json(s->timeline())}, {"skips", skips}});
          }));

  srv.Get("/sessions/:id/next", guarded([&reg](const httplib::Request& req, httplib::Response& res) {
            const auto s = reg.find(req.path_params.at("id"));
            const std::string reviewer = req.get_param_value("reviewer");
            if (reviewer.empty()) fail(Errc::SchemaViolation, "query parameter 'reviewer' is required");
            const auto item = s->next_item(reviewer);
            reply(res, 200, Json{{"done", !item.has_value()}, {"item", item ? fusion::to_json(*item) : Json(nullptr)}});
          }));

  srv.Post("/sessions/:id/actions", guarded([&reg](const httplib::Request& req, httplib::Response& res) {
             const auto s = reg.find(req.path_params.at("id"));
             const auto record = s->apply_action(reviewer_action_from_json(parse_body(req)));
             reply(res, 200, Json{{"record", to_json(record)}});
           }));

  srv.Post("/sessions/:id/qa", guarded([&reg](const httplib::Request& req, httplib::Response& res) {
             const auto s = reg.find(req.path_params.at("id"));
             const Json body = parse_body(req);
             const std::string op = field<std::string>(body, "op");
             if (op == "draw") {
               std::optional<double> fraction;
               std::optional<std::uint64_t> seed;
               if (body.contains("fraction") && !body.at("fraction").is_null()) fraction = field<double>(body, "fraction");
               if (body.contains("seed") && !body.at("seed").is_null()) seed = field<std::uint64_t>(body, "seed");
               const auto sample = s->draw_qa_sample(field<std::string>(body, "reviewer_id"), fraction, seed);
               reply(res, 200, Json{{"timeline_ids", sample.timeline_ids}, {"fraction", sample.fraction}, {"seed", sample.seed}});
             } else if (op == "review") {
               const auto record = s->qa_review(field<std::string>(body, "timeline_id"), field<std::string>(body, "reviewer_id"),
                                                field<bool>(body, "agree"), field_or<std::int64_t>(body, "dwell_ms", 0));
               reply(res, 200, Json{{"record", to_json(record)}});
             } else if (op == "outcomes") {
               Json outcomes = Json::array();
               std::vector<std::pair<bool, bool>> pairs;
               for (const auto& o : s->qa_outcomes()) {
                 outcomes.push_back(Json{{"timeline_id", o.timeline_id},
                                         {"first_reviewer", o.first_reviewer},
                                         {"qa_reviewer", o.qa_reviewer},
                                         {"agree", o.agree}});
                 pairs.emplace_back(true, o.agree);
               }
               reply(res, 200, Json{{"outcomes", outcomes}, {"kappa", pairs.empty() ? Json(nullptr) : Json(compute_iaa(pairs))}});
             } else {
               fail(Errc::SchemaViolation, "unknown qa op '" + op + "'");
             }
           }));

  srv.Get("/sessions/:id/audit", guarded([&reg](const httplib::Request& req, httplib::Response& res) {
            const auto s = reg.find(req.path_params.at("id"));
            const auto lines = s->audit_lines();
            Json records = Json::array();
            for (const auto& l : lines) records.push_back(Json::parse(l));
            const auto problem = verify_chain(lines);
            Json body{{"records", records}, {"verified", !problem}};
            if (problem) body["problem"] = {{"seq", problem->seq}, {"message", problem->message}};
            reply(res, 200, body);
          }));

  srv.Post("/sessions/:id/finalize", guarded([&reg](const httplib::Request& req, httplib::Response& res) {
             const auto s = reg.find(req.path_params.at("id"));
             const Json body = parse_body(req);
             const auto result = s->finalize(field<Json>(body, "questionnaire"), field<std::string>(body, "reviewer_id"));
             reply(res, 200,
                   Json{{"final_labels", result.final_labels}, {"reviewer_ids", result.reviewer_ids}, {"finalized_at", result.finalized_at}});
           }));

  srv.Get(R"(/sessions/([^/]+)/media/(.+))", guarded([&reg](const httplib::Request& req, httplib::Response& res) {
            const fs::path root = reg.media_root(req.matches[1]);
            const fs::path rel = fs::path(req.matches[2].str()).lexically_normal();
            if (root.empty() || rel.is_absolute() || rel.empty() || *rel.begin() == "..") {
              reply(res, 404, Json{{"error", "NotFound"}, {"message", "no such media"}});
              return;
            }
            const fs::path file = root / rel;
            if (!fs::is_regular_file(file)) {
              reply(res, 404, Json{{"error", "NotFound"}, {"message", "no such media"}});
              return;
            }
            res.set_content(read_file(file), mime_for(file));
          }));
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) fail(Errc::IoFailure, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) fail(Errc::IoFailure, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void ReviewServer::listen() { impl_->server.listen_after_bind(); }

void ReviewServer::stop() {
  if (impl_) impl_->server.stop();
}

void ReviewServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace gaze::review
