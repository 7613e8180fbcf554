#include "run_config.hpp"

#include "json.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tween::cli {
namespace {

using nlohmann::json;

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw std::runtime_error("config: '" + where + "' must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (allowed.count(k) == 0) throw std::runtime_error("config: unknown key '" + where + k + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::runtime_error("config: '" + where + key + "' has the wrong type");
  }
}

void read_widths(const json& j, const char* key, std::vector<ad::Index>& out, const std::string& where) {
  if (!j.contains(key)) return;
  std::vector<long> v;
  read(j, key, v, where);
  out.assign(v.begin(), v.end());
}

}  // namespace

void RunConfig::set_seed(std::uint64_t s) {
  seed = s;
  manifold_training.seed = s;
  sampler_training.seed = s;
}

void RunConfig::validate() const {
  if (style != "lafan" && style != "h36m") throw std::runtime_error("config: style must be 'lafan' or 'h36m'");
  if (checkpoint_every < 1) throw std::runtime_error("config: checkpoint_every must be >= 1");
  try {
    manifold.validate();
    manifold_training.validate();
    sampler.validate();
    sampler_training.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  }
}

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(j, "", {"corpus", "style", "test_subject", "out", "seed", "checkpoint_every", "manifold",
                    "manifold_training", "sampler", "sampler_training"});
  RunConfig c;
  std::string corpus, out;
  read(j, "corpus", corpus, "");
  read(j, "out", out, "");
  if (!corpus.empty()) c.corpus = std::filesystem::path(corpus).is_absolute() ? std::filesystem::path(corpus) : base_dir / corpus;
  if (!out.empty()) c.out = out;
  read(j, "style", c.style, "");
  read(j, "test_subject", c.test_subject, "");
  read(j, "checkpoint_every", c.checkpoint_every, "");
  std::uint64_t seed = 1;
  read(j, "seed", seed, "");

  if (j.contains("manifold")) {
    const json& m = j["manifold"];
    only_keys(m, "manifold.", {"latent", "experts", "encoder_hidden", "gating_hidden", "expert_hidden", "expert_layers"});
    read(m, "latent", c.manifold.latent, "manifold.");
    read(m, "experts", c.manifold.experts, "manifold.");
    read_widths(m, "encoder_hidden", c.manifold.encoder_hidden, "manifold.");
    read_widths(m, "gating_hidden", c.manifold.gating_hidden, "manifold.");
    read(m, "expert_hidden", c.manifold.expert_hidden, "manifold.");
    read(m, "expert_layers", c.manifold.expert_layers, "manifold.");
  }
  if (j.contains("manifold_training")) {
    const json& m = j["manifold_training"];
    const std::string w = "manifold_training.";
    only_keys(m, w, {"batch", "stage1_iterations", "stage2_iterations", "lr_start", "lr_end", "lr_decay_iterations",
                     "warmup_epochs", "scheduled_sampling_k", "contact_threshold"});
    auto& t = c.manifold_training;
    read(m, "batch", t.batch, w);
    read(m, "stage1_iterations", t.stage1_iterations, w);
    read(m, "stage2_iterations", t.stage2_iterations, w);
    read(m, "lr_start", t.lr_start, w);
    read(m, "lr_end", t.lr_end, w);
    read(m, "lr_decay_iterations", t.lr_decay_iterations, w);
    read(m, "warmup_epochs", t.warmup_epochs, w);
    read(m, "scheduled_sampling_k", t.scheduled_sampling_k, w);
    read(m, "contact_threshold", t.contact_threshold, w);
  }
  if (j.contains("sampler")) {
    const json& m = j["sampler"];
    const std::string w = "sampler.";
    only_keys(m, w, {"encoder_hidden", "encoder_out", "lstm_hidden", "decoder_hidden", "t_zero", "t_period",
                     "noise_variance", "z_scale", "noise_on_state"});
    auto& s = c.sampler;
    read(m, "encoder_hidden", s.encoder_hidden, w);
    read(m, "encoder_out", s.encoder_out, w);
    read(m, "lstm_hidden", s.lstm_hidden, w);
    read_widths(m, "decoder_hidden", s.decoder_hidden, w);
    read(m, "t_zero", s.t_zero, w);
    read(m, "t_period", s.t_period, w);
    read(m, "noise_variance", s.noise_variance, w);
    read(m, "z_scale", s.z_scale, w);
    read(m, "noise_on_state", s.noise_on_state, w);
  }
  if (j.contains("sampler_training")) {
    const json& m = j["sampler_training"];
    const std::string w = "sampler_training.";
    only_keys(m, w, {"batch", "iterations", "lr", "lr_end", "lr_decay_iterations", "min_length", "max_length",
                   "warmup_frames", "weights"});
    auto& s = c.sampler_training;
    read(m, "batch", s.batch, w);
    read(m, "iterations", s.iterations, w);
    read(m, "lr", s.lr, w);
    read(m, "lr_end", s.lr_end, w);
    read(m, "lr_decay_iterations", s.lr_decay_iterations, w);
    read(m, "min_length", s.min_length, w);
    read(m, "max_length", s.max_length, w);
    read(m, "warmup_frames", s.warmup_frames, w);
    if (m.contains("weights")) {
      const json& ww = m["weights"];
      const std::string wk = w + "weights.";
      only_keys(ww, wk, {"rot", "leg", "pos_rot", "bone", "foot", "position_scale", "contact_threshold"});
      read(ww, "rot", s.weights.rot, wk);
      read(ww, "leg", s.weights.leg, wk);
      read(ww, "pos_rot", s.weights.pos_rot, wk);
      read(ww, "bone", s.weights.bone, wk);
      read(ww, "foot", s.weights.foot, wk);
      read(ww, "position_scale", s.weights.position_scale, wk);
      read(ww, "contact_threshold", s.weights.contact_threshold, wk);
    }
  }
  c.set_seed(seed);
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

std::string run_config_json(const RunConfig& c) {
  json j;
  j["corpus"] = c.corpus.string();
  j["style"] = c.style;
  j["test_subject"] = c.test_subject;
  j["out"] = c.out.string();
  j["seed"] = c.seed;
  j["checkpoint_every"] = c.checkpoint_every;
  j["manifold"] = {{"latent", c.manifold.latent},
                   {"experts", c.manifold.experts},
                   {"encoder_hidden", c.manifold.encoder_hidden},
                   {"gating_hidden", c.manifold.gating_hidden},
                   {"expert_hidden", c.manifold.expert_hidden},
                   {"expert_layers", c.manifold.expert_layers}};
  const auto& mt = c.manifold_training;
  j["manifold_training"] = {{"batch", mt.batch},
                            {"stage1_iterations", mt.stage1_iterations},
                            {"stage2_iterations", mt.stage2_iterations},
                            {"lr_start", mt.lr_start},
                            {"lr_end", mt.lr_end},
                            {"lr_decay_iterations", mt.lr_decay_iterations},
                            {"warmup_epochs", mt.warmup_epochs},
                            {"scheduled_sampling_k", mt.scheduled_sampling_k},
                            {"contact_threshold", mt.contact_threshold}};
  const auto& s = c.sampler;
  j["sampler"] = {{"encoder_hidden", s.encoder_hidden}, {"encoder_out", s.encoder_out},
                  {"lstm_hidden", s.lstm_hidden},       {"decoder_hidden", s.decoder_hidden},
                  {"t_zero", s.t_zero},                 {"t_period", s.t_period},
                  {"noise_variance", s.noise_variance}, {"z_scale", s.z_scale},
                  {"noise_on_state", s.noise_on_state}};
  const auto& st = c.sampler_training;
  j["sampler_training"] = {{"batch", st.batch},
                           {"iterations", st.iterations},
                           {"lr", st.lr},
                           {"lr_end", st.lr_end},
                           {"lr_decay_iterations", st.lr_decay_iterations},
                           {"min_length", st.min_length},
                           {"max_length", st.max_length},
                           {"warmup_frames", st.warmup_frames},
                           {"weights",
                            {{"rot", st.weights.rot},
                             {"leg", st.weights.leg},
                             {"pos_rot", st.weights.pos_rot},
                             {"bone", st.weights.bone},
                             {"foot", st.weights.foot},
                             {"position_scale", st.weights.position_scale},
                             {"contact_threshold", st.weights.contact_threshold}}}};
  return j.dump(2) + "\n";
}

}  // namespace tween::cli
