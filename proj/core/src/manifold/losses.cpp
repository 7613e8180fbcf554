#include "tween/manifold/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace tween::manifold {

Var kl_loss(Var mu, Var logvar) {
  // -0.5 (1 + s - mu^2 - e^s) = 0.5 (mu^2 + e^s - s - 1)
  Var inner = ad::sub(ad::add(ad::square(mu), ad::exp(logvar)), logvar);
  return ad::scale(ad::add_scalar(ad::mean(inner), -1.0), 0.5);
}

Var rec_loss(Var p_hat, Var r_hat, const Tensor& p, const Tensor& r, double position_weight, double rotation_weight) {
  ad::Tape& t = *p_hat.tape;
  Var dp = ad::scale(ad::sub(p_hat, t.constant(p)), position_weight);
  Var dr = ad::scale(ad::sub(r_hat, t.constant(r)), rotation_weight);
  return ad::mean(ad::square(ad::concat_cols({dp, dr})));
}

Tensor bone_lengths(const Tensor& positions, std::span<const std::pair<int, int>> bones) {
  Tensor out(positions.rows(), static_cast<ad::Index>(bones.size()));
  for (ad::Index i = 0; i < positions.rows(); ++i) {
    for (std::size_t b = 0; b < bones.size(); ++b) {
      const auto a = positions.row(i).segment<3>(3 * bones[b].first);
      const auto c = positions.row(i).segment<3>(3 * bones[b].second);
      const kin::Vec3 d = a - c;
      // Same regularized form as norm3, so exact predictions cost exactly zero.
      out(i, static_cast<ad::Index>(b)) = std::sqrt(d.x() * d.x() + d.y() * d.y() + d.z() * d.z() + ad::kNormEps);
    }
  }
  return out;
}

Var bone_loss(Var p_hat, const Tensor& lengths, std::span<const std::pair<int, int>> bones) {
  if (lengths.cols() != static_cast<ad::Index>(bones.size()) || lengths.rows() != p_hat.rows()) {
    throw ad::ShapeError("bone_loss: length table does not match");
  }
  std::vector<Var> diffs;
  for (const auto& [a, b] : bones) {
    diffs.push_back(ad::sub(ad::slice_cols(p_hat, 3 * a, 3), ad::slice_cols(p_hat, 3 * b, 3)));
  }
  Var d = ad::norm3(ad::concat_cols(diffs));
  return ad::mean(ad::abs(ad::sub(d, p_hat.tape->constant(lengths))));
}

Tensor contact_mask(const Tensor& v_L, const Tensor& v_h, std::span<const int> foot_slots, double threshold,
                    double frame_rate) {
  Tensor mask(v_L.rows(), static_cast<ad::Index>(foot_slots.size()));
  for (ad::Index i = 0; i < v_L.rows(); ++i) {
    for (std::size_t f = 0; f < foot_slots.size(); ++f) {
      const double speed = (v_L.row(i).segment<3>(3 * foot_slots[f]) + v_h.row(i)).norm() / frame_rate;
      mask(i, static_cast<ad::Index>(f)) = speed < threshold ? 1.0 : 0.0;
    }
  }
  return mask;
}

Var foot_loss(Var v_L_hat, Var v_h, const Tensor& contact, std::span<const int> foot_slots) {
  if (contact.cols() != static_cast<ad::Index>(foot_slots.size()) || contact.rows() != v_L_hat.rows()) {
    throw ad::ShapeError("foot_loss: contact mask does not match");
  }
  std::vector<Var> world;
  for (int s : foot_slots) world.push_back(ad::add(ad::slice_cols(v_L_hat, 3 * s, 3), v_h));
  Var speed = ad::add_scalar(ad::norm3(ad::concat_cols(world)), -std::sqrt(ad::kNormEps));
  return ad::mean(ad::mul(speed, v_L_hat.tape->constant(contact)));
}

std::vector<int> foot_slots(const kin::Skeleton& skeleton) {
  std::vector<int> out;
  for (int j : skeleton.feet()) {
    const int s = skeleton.positional_slot(j);
    if (s < 0) throw std::invalid_argument("foot joint is not a positional lower joint");
    out.push_back(s);
  }
  return out;
}

}  // namespace tween::manifold
