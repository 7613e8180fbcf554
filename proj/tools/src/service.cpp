#include "service.hpp"

#include "wire.hpp"

#include "tween/version.hpp"

#include "httplib.h"

namespace tween::cli {
namespace {

Reply error(int status, const std::string& msg) { return Reply{status, json{{"error", msg}}.dump()}; }

json parse_body(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw WireError("request body must be a JSON object");
  return j;
}

int duration_of(const json& j) {
  if (!j.contains("duration_frames") || !j["duration_frames"].is_number_integer()) {
    throw WireError("'duration_frames' must be an integer");
  }
  const auto n = j["duration_frames"].get<long long>();
  if (n < engine::kMinDuration || n > engine::kMaxDuration) {
    throw engine::DurationError("duration_frames " + std::to_string(n) + " is outside [" +
                                std::to_string(engine::kMinDuration) + ", " + std::to_string(engine::kMaxDuration) +
                                "]");
  }
  return static_cast<int>(n);
}

std::uint64_t seed_of(const json& j) {
  if (!j.contains("seed")) return 1;
  if (!j["seed"].is_number_unsigned()) throw WireError("'seed' must be a non-negative integer");
  return j["seed"].get<std::uint64_t>();
}

bool timing_of(const json& j) {
  if (!j.contains("include_timing")) return true;
  if (!j["include_timing"].is_boolean()) throw WireError("'include_timing' must be a boolean");
  return j["include_timing"].get<bool>();
}

json transition_json(const kin::Skeleton& sk, const engine::Transition& t, bool timing) {
  json out{{"header", wire_header(sk)}, {"frames", frames_to_json(t.clip)}, {"extrapolation_flag", t.extrapolation}};
  if (timing) out["per_frame_ms"] = t.per_frame_ms;
  return out;
}

template <typename F>
Reply guarded(F&& f) {
  try {
    return f();
  } catch (const engine::DurationError& e) {
    return error(422, e.what());
  } catch (const WireError& e) {
    return error(400, e.what());
  } catch (const std::invalid_argument& e) {
    return error(400, e.what());
  } catch (const kin::DegenerateRotationError& e) {
    return error(500, std::string("generation produced a degenerate rotation: ") + e.what());
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

}  // namespace

Service::Service(std::shared_ptr<const engine::ModelBundle> bundle, std::filesystem::path static_dir)
    : bundle_(std::move(bundle)), static_dir_(std::move(static_dir)) {}

Reply Service::health() const {
  return Reply{200, json{{"status", "ok"}, {"version", kVersion}, {"bundle_loaded", bundle_ != nullptr}}.dump()};
}

Reply Service::skeleton() const {
  if (!bundle_) return error(503, "no model bundle loaded");
  return Reply{200, skeleton_to_json(bundle_->skeleton()).dump()};
}

Reply Service::generate(const std::string& body) const {
  if (!bundle_) return error(503, "no model bundle loaded");
  return guarded([&] {
    const json j = parse_body(body);
    const kin::Skeleton& sk = bundle_->skeleton();
    if (!j.contains("start_pose") || !j.contains("target_pose")) {
      throw WireError("request needs 'start_pose' and 'target_pose'");
    }
    const engine::Keyframe start = keyframe_from_json(j["start_pose"], sk, "start_pose");
    const engine::Keyframe target = keyframe_from_json(j["target_pose"], sk, "target_pose");
    const int n = duration_of(j);
    const engine::Transition t = engine::generate(bundle_, start, target, n, seed_of(j));
    return Reply{200, transition_json(sk, t, timing_of(j)).dump()};
  });
}

Reply Service::chain(const std::string& body) {
  if (!bundle_) return error(503, "no model bundle loaded");
  return guarded([&]() -> Reply {
    const json j = parse_body(body);
    const kin::Skeleton& sk = bundle_->skeleton();
    if (!j.contains("target_pose")) throw WireError("request needs 'target_pose'");
    const engine::Keyframe target = keyframe_from_json(j["target_pose"], sk, "target_pose");
    const int n = duration_of(j);
    const bool timing = timing_of(j);

    std::string token;
    std::shared_ptr<Slot> slot;
    if (j.contains("session")) {
      if (!j["session"].is_string()) throw WireError("'session' must be a string token");
      token = j["session"].get<std::string>();
      std::lock_guard lock(sessions_mutex_);
      auto it = sessions_.find(token);
      if (it == sessions_.end()) return error(404, "unknown session '" + token + "'");
      slot = it->second;
    } else {
      if (!j.contains("start_pose")) throw WireError("a new session needs 'start_pose'");
      const engine::Keyframe start = keyframe_from_json(j["start_pose"], sk, "start_pose");
      slot = std::make_shared<Slot>();
      slot->session = std::make_unique<engine::Session>(bundle_, start, seed_of(j));
      std::lock_guard lock(sessions_mutex_);
      token = "s" + std::to_string(next_token_++);
      if (sessions_.size() >= kMaxSessions) {
        sessions_.erase(order_.front());
        order_.pop_front();
      }
      sessions_[token] = slot;
      order_.push_back(token);
    }
    std::lock_guard lock(slot->mutex);
    const engine::Transition t = slot->session->advance(target, n);
    json out = transition_json(sk, t, timing);
    out["session"] = token;
    out["segment"] = slot->session->segments();
    return Reply{200, out.dump()};
  });
}

std::size_t Service::session_count() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

void Service::mount(httplib::Server& server) {
  auto send = [](httplib::Response& res, const Reply& r) { res.status = r.status; res.set_content(r.body, "application/json"); };
  server.Get("/health", [this, send](const httplib::Request&, httplib::Response& res) { send(res, health()); });
  server.Get("/skeleton", [this, send](const httplib::Request&, httplib::Response& res) { send(res, skeleton()); });
  server.Post("/generate",
              [this, send](const httplib::Request& req, httplib::Response& res) { send(res, generate(req.body)); });
  server.Post("/session/chain",
              [this, send](const httplib::Request& req, httplib::Response& res) { send(res, chain(req.body)); });
  if (!static_dir_.empty() && std::filesystem::is_directory(static_dir_)) {
    server.set_mount_point("/", static_dir_.string());
  }
}

}  // namespace tween::cli
