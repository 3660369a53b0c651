#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "gaze/core/error.hpp"
#include "gaze/review/session.hpp"

namespace gaze::review {

class SessionRegistry {
 public:
  /// `media_root` is served read-only under /sessions/{id}/media/.
  void add(std::shared_ptr<ReviewSession> session, std::filesystem::path media_root = {});
  /// Throws SessionUnknown.
  std::shared_ptr<ReviewSession> find(const std::string& id) const;
  std::filesystem::path media_root(const std::string& id) const;

 private:
  struct Entry {
    std::shared_ptr<ReviewSession> session;
    std::filesystem::path media_root;
  };
  std::map<std::string, Entry> sessions_;
  mutable std::mutex mu_;
};

int http_status_for(Errc code);

// Routes:
//   GET  /sessions/{id}/timeline
//   GET  /sessions/{id}/next?reviewer=R
//   POST /sessions/{id}/actions       ReviewerAction
//   POST /sessions/{id}/qa            {"op": "draw", "reviewer_id", "fraction"?, "seed"?}
//                                     {"op": "review", "timeline_id", "reviewer_id", "agree", "dwell_ms"}
//                                     {"op": "outcomes"}
//   GET  /sessions/{id}/audit
//   POST /sessions/{id}/finalize      {"reviewer_id", "questionnaire"}
//   GET  /sessions/{id}/media/<path>  static files, byte ranges honoured
// Errors come back as {"error": "<code>", "message": "..."}.
class ReviewServer {
 public:
  explicit ReviewServer(SessionRegistry& registry);
  ~ReviewServer();
  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gaze::review
