#include "tween/engine/bundle.hpp"

#include "tween/util/kv_text.hpp"

#include <optional>
#include <sstream>
#include <stdexcept>

namespace tween::engine {

std::string skeleton_to_text(const kin::Skeleton& skeleton) {
  std::ostringstream o;
  o << std::hexfloat << "rate " << skeleton.frame_rate() << '\n';
  for (int j = 0; j < skeleton.joint_count(); ++j) {
    const kin::Vec3& off = skeleton.offset(j);
    o << "joint " << skeleton.names()[j] << ' ' << skeleton.parent(j) << ' ' << off.x() << ' ' << off.y() << ' '
      << off.z() << ' ' << (skeleton.rotation_orders[j] == kin::EulerOrder::ZYX ? "ZYX" : "ZXY");
    if (const auto& e = skeleton.end_sites[j]) o << " end " << e->x() << ' ' << e->y() << ' ' << e->z();
    o << '\n';
  }
  return o.str();
}

std::shared_ptr<const kin::Skeleton> skeleton_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  double rate = 0.0;
  std::vector<std::string> names;
  std::vector<int> parents;
  std::vector<kin::Vec3> offsets;
  std::vector<kin::EulerOrder> orders;
  std::vector<std::optional<kin::Vec3>> ends;
  auto num = [](std::istringstream& ss) {
    std::string t;
    if (!(ss >> t)) throw ad::CheckpointError("truncated skeleton record");
    return std::strtod(t.c_str(), nullptr);
  };
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "rate") {
      rate = num(ss);
    } else if (tag == "joint") {
      std::string name;
      int parent = -1;
      std::string order;
      ss >> name >> parent;
      const double x = num(ss), y = num(ss), z = num(ss);
      ss >> order;
      names.push_back(name);
      parents.push_back(parent);
      offsets.emplace_back(x, y, z);
      orders.push_back(order == "ZXY" ? kin::EulerOrder::ZXY : kin::EulerOrder::ZYX);
      std::string end;
      if (ss >> end && end == "end") {
        const double ex = num(ss), ey = num(ss), ez = num(ss);
        ends.emplace_back(kin::Vec3(ex, ey, ez));
      } else {
        ends.emplace_back(std::nullopt);
      }
    } else {
      throw ad::CheckpointError("unknown skeleton record '" + tag + "'");
    }
  }
  auto sk = std::make_shared<kin::Skeleton>(std::move(names), std::move(parents), std::move(offsets), rate);
  sk->rotation_orders = std::move(orders);
  sk->end_sites = std::move(ends);
  return sk;
}

ModelBundle::ModelBundle(std::shared_ptr<const kin::Skeleton> skeleton, manifold::Manifold manifold,
                         sampler::Sampler sampler, data::NormStats norm, std::map<std::string, std::string> metadata)
    : skeleton_(std::move(skeleton)),
      manifold_(std::move(manifold)),
      sampler_(std::move(sampler)),
      norm_(norm),
      metadata_(std::move(metadata)) {
  if (!skeleton_) throw std::invalid_argument("model bundle needs a skeleton");
  if (sampler_.upper_joints() != skeleton_->upper_count()) {
    throw std::invalid_argument("sampler was built for " + std::to_string(sampler_.upper_joints()) +
                                " upper joints, skeleton has " + std::to_string(skeleton_->upper_count()));
  }
  if (sampler_.latent() != manifold_.config().latent) {
    throw std::invalid_argument("sampler latent size does not match the manifold");
  }
  float_ = InferenceModel<float>(manifold_, sampler_, norm_);
  double_ = InferenceModel<double>(manifold_, sampler_, norm_);
  float_.set_frame_time(skeleton_->frame_time());
  double_.set_frame_time(skeleton_->frame_time());
}

std::shared_ptr<const ModelBundle> ModelBundle::random(std::shared_ptr<const kin::Skeleton> skeleton,
                                                       const manifold::ManifoldConfig& mc,
                                                       const sampler::SamplerConfig& sc, std::uint64_t seed) {
  manifold::Manifold m(mc, seed);
  sampler::Sampler s(sc, mc.latent, skeleton->upper_count(), seed + 1);
  return std::make_shared<const ModelBundle>(skeleton, std::move(m), std::move(s), data::NormStats{},
                                             std::map<std::string, std::string>{{"seed", std::to_string(seed)}});
}

ad::Checkpoint ModelBundle::to_checkpoint() const {
  ad::Checkpoint ck;
  ck.texts["bundle.version"] = std::to_string(kBundleVersion);
  ck.texts["bundle.skeleton"] = skeleton_to_text(*skeleton_);
  std::ostringstream meta;
  for (const auto& [k, v] : metadata_) meta << k << '=' << v << '\n';
  ck.texts["bundle.metadata"] = meta.str();
  manifold_.save(ck, "manifold.");
  sampler_.save(ck, "sampler.");
  norm_.put(ck, "norm.");
  return ck;
}

std::shared_ptr<const ModelBundle> ModelBundle::from_checkpoint(const ad::Checkpoint& ck) {
  if (!ck.has_text("bundle.version")) throw ad::CheckpointError("checkpoint is not a model bundle");
  if (ck.text("bundle.version") != std::to_string(kBundleVersion)) {
    throw ad::CheckpointError("model bundle version " + ck.text("bundle.version") + " is not supported (expected " +
                              std::to_string(kBundleVersion) + ")");
  }
  auto skeleton = skeleton_from_text(ck.text("bundle.skeleton"));
  std::map<std::string, std::string> meta;
  for (const auto& [k, v] : util::parse_kv(ck.text("bundle.metadata"))) meta[k] = v;
  return std::make_shared<const ModelBundle>(std::move(skeleton), manifold::Manifold::load(ck, "manifold."),
                                             sampler::Sampler::load(ck, "sampler."), data::NormStats::get(ck, "norm."),
                                             std::move(meta));
}

void ModelBundle::save(const std::filesystem::path& path) const { to_checkpoint().save(path); }

std::shared_ptr<const ModelBundle> ModelBundle::load(const std::filesystem::path& path) {
  return from_checkpoint(ad::Checkpoint::load(path));
}

}  // namespace tween::engine
