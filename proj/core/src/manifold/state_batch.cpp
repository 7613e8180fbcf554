#include "tween/manifold/state_batch.hpp"

#include <stdexcept>

namespace tween::manifold {
namespace {

void put_vec(Tensor& t, Index row, Index col, const kin::Vec3& v) {
  for (int c = 0; c < 3; ++c) t(row, col + c) = v[c];
}
void put_rot(Tensor& t, Index row, Index col, const kin::Rotation6D& r) {
  const auto a = r.to_array();
  for (int c = 0; c < 6; ++c) t(row, col + c) = a[c];
}
kin::Vec3 get_vec(const Tensor& t, Index row, Index col) { return {t(row, col), t(row, col + 1), t(row, col + 2)}; }
kin::Rotation6D get_rot(const Tensor& t, Index row, Index col) {
  return kin::Rotation6D{{t(row, col), t(row, col + 1), t(row, col + 2)},
                         {t(row, col + 3), t(row, col + 4), t(row, col + 5)}};
}

}  // namespace

StateBatch StateBatch::pack(std::span<const FrameState* const> states) {
  if (states.empty()) throw std::invalid_argument("StateBatch::pack: empty batch");
  const Index B = static_cast<Index>(states.size());
  const Index U = static_cast<Index>(states.front()->r_U.size());
  StateBatch b;
  b.p_h.resize(B, 3);
  b.r_h.resize(B, 6);
  b.v_h.resize(B, 3);
  b.p_L.resize(B, kPLDim);
  b.v_L.resize(B, kVLDim);
  b.r_L.resize(B, kRLDim);
  b.r_U.resize(B, 6 * U);
  for (Index i = 0; i < B; ++i) {
    const FrameState& s = *states[i];
    if (static_cast<Index>(s.r_U.size()) != U) throw std::invalid_argument("StateBatch::pack: mixed skeletons");
    put_vec(b.p_h, i, 0, s.p_h);
    put_rot(b.r_h, i, 0, s.r_h);
    put_vec(b.v_h, i, 0, s.v_h);
    for (std::size_t k = 0; k < s.p_L.size(); ++k) {
      put_vec(b.p_L, i, 3 * static_cast<Index>(k), s.p_L[k]);
      put_vec(b.v_L, i, 3 * static_cast<Index>(k), s.v_L[k]);
    }
    for (std::size_t k = 0; k < s.r_L.size(); ++k) put_rot(b.r_L, i, 6 * static_cast<Index>(k), s.r_L[k]);
    for (Index k = 0; k < U; ++k) put_rot(b.r_U, i, 6 * k, s.r_U[k]);
  }
  return b;
}

StateBatch StateBatch::pack(std::span<const FrameState> states) {
  std::vector<const FrameState*> ptrs;
  ptrs.reserve(states.size());
  for (const auto& s : states) ptrs.push_back(&s);
  return pack(std::span<const FrameState* const>(ptrs));
}

FrameState StateBatch::unpack(Index row) const {
  FrameState s;
  s.p_h = get_vec(p_h, row, 0);
  s.r_h = get_rot(r_h, row, 0);
  s.v_h = get_vec(v_h, row, 0);
  for (std::size_t k = 0; k < s.p_L.size(); ++k) {
    s.p_L[k] = get_vec(p_L, row, 3 * static_cast<Index>(k));
    s.v_L[k] = get_vec(v_L, row, 3 * static_cast<Index>(k));
  }
  for (std::size_t k = 0; k < s.r_L.size(); ++k) s.r_L[k] = get_rot(r_L, row, 6 * static_cast<Index>(k));
  s.r_U.resize(static_cast<std::size_t>(r_U.cols() / 6));
  for (std::size_t k = 0; k < s.r_U.size(); ++k) s.r_U[k] = get_rot(r_U, row, 6 * static_cast<Index>(k));
  return s;
}

StateVars StateVars::constant(ad::Tape& tape, const StateBatch& b) {
  return StateVars{tape.constant(b.p_h), tape.constant(b.r_h), tape.constant(b.v_h), tape.constant(b.p_L),
                   tape.constant(b.v_L), tape.constant(b.r_L), tape.constant(b.r_U)};
}

StateBatch StateVars::values() const {
  return StateBatch{p_h.value(), r_h.value(), v_h.value(), p_L.value(), v_L.value(), r_L.value(), r_U.value()};
}

Var condition(const StateVars& s) {
  return ad::concat_cols({ad::scale(s.v_h, kVelocityScale), ad::scale(s.v_L, kVelocityScale), s.r_h, s.r_L});
}

Tensor condition(const StateBatch& s) {
  Tensor c(s.batch(), kConditionDim);
  c << s.v_h * kVelocityScale, s.v_L * kVelocityScale, s.r_h, s.r_L;
  return c;
}

Var tile3(Var v, int k) {
  std::vector<Var> parts(static_cast<std::size_t>(k), v);
  return ad::concat_cols(parts);
}

}  // namespace tween::manifold
