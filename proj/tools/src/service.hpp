#pragma once

#include "tween/engine/engine.hpp"

#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace httplib {
class Server;
}

namespace tween::cli {

struct Reply {
  int status = 200;
  std::string body;
};

/// HTTP/JSON front end of the engine. Handlers are plain functions of the
/// request body so they can be exercised without sockets.
class Service {
 public:
  /// `bundle` may be null: generation endpoints then answer 503.
  explicit Service(std::shared_ptr<const engine::ModelBundle> bundle, std::filesystem::path static_dir = {});

  Reply health() const;
  Reply skeleton() const;
  Reply generate(const std::string& body) const;
  Reply chain(const std::string& body);

  void mount(httplib::Server& server);

  std::size_t session_count() const;

 private:
  struct Slot {
    std::mutex mutex;
    std::unique_ptr<engine::Session> session;
  };

  std::shared_ptr<const engine::ModelBundle> bundle_;
  std::filesystem::path static_dir_;
  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::deque<std::string> order_;  // creation order, oldest first
  std::uint64_t next_token_ = 1;
};

inline constexpr std::size_t kMaxSessions = 1024;

}  // namespace tween::cli
