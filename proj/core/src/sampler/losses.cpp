#include "tween/sampler/losses.hpp"

#include "tween/kinematics/fk.hpp"
#include "tween/manifold/losses.hpp"

#include <stdexcept>

namespace tween::sampler {

using ad::Index;
using ad::Tensor;
using ad::Var;

Tensor batch_positions(const StateBatch& s, const kin::Skeleton& skeleton) {
  ad::Tape tape;
  Tensor rot(s.batch(), s.r_h.cols() + s.r_L.cols() + s.r_U.cols());
  rot << s.r_h, s.r_L, s.r_U;
  return kin::fk(skeleton, tape.constant(s.p_h), tape.constant(rot)).value();
}

SamplerLossTerms sampler_losses(const std::vector<StateVars>& pred, std::span<const StateBatch> gt,
                                const kin::Skeleton& skeleton, const data::NormStats& norm,
                                const SamplerLossWeights& w) {
  if (pred.size() != gt.size() || pred.empty()) {
    throw std::invalid_argument("sampler_losses: predicted and true sequences differ in length");
  }
  ad::Tape& tape = *pred.front().p_L.tape;
  const auto feet = manifold::foot_slots(skeleton);
  const auto& bones = skeleton.lower_bones();
  const Index B = gt.front().batch();
  Tensor inv(B, manifold::kPLDim);
  for (Index d = 0; d < manifold::kPLDim; ++d) inv.col(d).setConstant(1.0 / norm.std[static_cast<std::size_t>(d)]);
  Var inv_std = tape.constant(inv);

  std::vector<Var> rot, leg, pos, foot, bone;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const StateVars& p = pred[k];
    const StateBatch& g = gt[k];
    Tensor rot_gt(B, g.r_h.cols() + g.r_L.cols() + g.r_U.cols());
    rot_gt << g.r_h, g.r_L, g.r_U;
    Var rot_hat = ad::concat_cols({p.r_h, p.r_L, p.r_U});
    rot.push_back(ad::mean(ad::abs(ad::sub(rot_hat, tape.constant(rot_gt)))));
    leg.push_back(ad::mean(ad::abs(ad::mul(ad::sub(p.p_L, tape.constant(g.p_L)), inv_std))));
    Var fk_hat = kin::fk(skeleton, p.p_h, rot_hat);
    pos.push_back(ad::scale(ad::mean(ad::abs(ad::sub(fk_hat, tape.constant(batch_positions(g, skeleton))))),
                            w.position_scale));
    const Tensor contact =
        manifold::contact_mask(g.v_L, g.v_h, feet, w.contact_threshold, skeleton.frame_rate());
    foot.push_back(ad::scale(manifold::foot_loss(p.v_L, p.v_h, contact, feet), w.position_scale));
    bone.push_back(
        ad::scale(manifold::bone_loss(p.p_L, manifold::bone_lengths(g.p_L, bones), bones), w.position_scale));
  }
  auto avg = [](const std::vector<Var>& v) { return ad::mean(ad::concat_cols(v)); };
  SamplerLossTerms t;
  t.rot = avg(rot);
  t.leg = avg(leg);
  t.pos_rot = avg(pos);
  t.foot = avg(foot);
  t.bone = avg(bone);
  t.total = ad::add(ad::add(ad::scale(t.rot, w.rot), ad::scale(t.leg, w.leg)),
                    ad::add(ad::add(ad::scale(t.pos_rot, w.pos_rot), ad::scale(t.bone, w.bone)),
                            ad::scale(t.foot, w.foot)));
  return t;
}

}  // namespace tween::sampler
