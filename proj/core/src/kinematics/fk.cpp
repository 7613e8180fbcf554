#include "tween/kinematics/fk.hpp"

#include <memory>
#include <stdexcept>

namespace tween::kin {

std::vector<Mat3> global_rotations(const Skeleton& skeleton, std::span<const Mat3> rotations) {
  const int n = skeleton.joint_count();
  if (static_cast<int>(rotations.size()) != n) {
    throw std::invalid_argument("fk: expected " + std::to_string(n) + " rotations, got " +
                                std::to_string(rotations.size()));
  }
  std::vector<Mat3> global(n);
  global[0] = rotations[0];
  for (int j = 1; j < n; ++j) global[j] = global[skeleton.parent(j)] * rotations[j];
  return global;
}

std::vector<Vec3> fk(const Skeleton& skeleton, const Vec3& root, std::span<const Mat3> rotations) {
  const std::vector<Mat3> global = global_rotations(skeleton, rotations);
  const int n = skeleton.joint_count();
  std::vector<Vec3> pos(n);
  pos[0] = root;
  for (int j = 1; j < n; ++j) {
    const int p = skeleton.parent(j);
    pos[j] = pos[p] + global[p] * skeleton.offset(j);
  }
  return pos;
}

std::vector<Vec3> fk(const Skeleton& skeleton, const Vec3& root, std::span<const Rotation6D> rotations) {
  std::vector<Mat3> mats;
  mats.reserve(rotations.size());
  for (std::size_t j = 0; j < rotations.size(); ++j) {
    try {
      mats.push_back(sixd_to_matrix(rotations[j]));
    } catch (const DegenerateRotationError& e) {
      throw DegenerateRotationError("joint " + std::to_string(j) + ": " + e.what());
    }
  }
  return fk(skeleton, root, mats);
}

Vec3 integrate_root(const Vec3& position, const Vec3& velocity, double dt) { return position + velocity * dt; }

ad::Var fk(const Skeleton& skeleton, ad::Var root, ad::Var rotations) {
  using ad::Index;
  using ad::Tensor;
  const int n = skeleton.joint_count();
  if (root.cols() != 3 || rotations.cols() != 6 * n || root.rows() != rotations.rows()) {
    throw ad::ShapeError("fk: expected root (Bx3) and rotations (Bx" + std::to_string(6 * n) + ")");
  }
  const Index batch = root.rows();
  const Tensor& rv = root.value();
  const Tensor& qv = rotations.value();
  Tensor out(batch, 3 * n);
  std::vector<Mat3> global(n);
  std::vector<Vec3> pos(n);
  for (Index b = 0; b < batch; ++b) {
    for (int j = 0; j < n; ++j) {
      const Rotation6D r{Vec3(qv(b, 6 * j), qv(b, 6 * j + 1), qv(b, 6 * j + 2)),
                         Vec3(qv(b, 6 * j + 3), qv(b, 6 * j + 4), qv(b, 6 * j + 5))};
      const Mat3 local = sixd_to_matrix(r);
      if (j == 0) {
        global[0] = local;
        pos[0] = Vec3(rv(b, 0), rv(b, 1), rv(b, 2));
      } else {
        const int p = skeleton.parent(j);
        global[j] = global[p] * local;
        pos[j] = pos[p] + global[p] * skeleton.offset(j);
      }
      out(b, 3 * j) = pos[j].x();
      out(b, 3 * j + 1) = pos[j].y();
      out(b, 3 * j + 2) = pos[j].z();
    }
  }

  auto sk = std::make_shared<Skeleton>(skeleton);
  const int ri = root.id;
  const int qi = rotations.id;
  return root.tape->push("fk", std::move(out), {ri, qi}, [sk, ri, qi, n](ad::Tape& t, int self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& qv = t.value(qi);
    const Index batch = g.rows();
    Tensor droot = Tensor::Zero(batch, 3);
    Tensor dq = Tensor::Zero(batch, 6 * n);
    std::vector<Rotation6D> raw(n);
    std::vector<Mat3> local(n), global(n), dglobal(n);
    std::vector<Vec3> dpos(n);
    for (Index b = 0; b < batch; ++b) {
      for (int j = 0; j < n; ++j) {
        raw[j] = Rotation6D{Vec3(qv(b, 6 * j), qv(b, 6 * j + 1), qv(b, 6 * j + 2)),
                            Vec3(qv(b, 6 * j + 3), qv(b, 6 * j + 4), qv(b, 6 * j + 5))};
        local[j] = sixd_to_matrix(raw[j]);
        global[j] = j == 0 ? local[0] : Mat3(global[sk->parent(j)] * local[j]);
        dglobal[j].setZero();
        dpos[j] = Vec3(g(b, 3 * j), g(b, 3 * j + 1), g(b, 3 * j + 2));
      }
      for (int j = n - 1; j >= 1; --j) {
        const int p = sk->parent(j);
        dpos[p] += dpos[j];
        dglobal[p] += dpos[j] * sk->offset(j).transpose();
        dglobal[p] += dglobal[j] * local[j].transpose();
        const Mat3 dlocal = global[p].transpose() * dglobal[j];
        const auto d6 = sixd_to_matrix_backward(raw[j], dlocal);
        for (int c = 0; c < 6; ++c) dq(b, 6 * j + c) = d6[c];
      }
      const auto d6 = sixd_to_matrix_backward(raw[0], dglobal[0]);
      for (int c = 0; c < 6; ++c) dq(b, c) = d6[c];
      droot.row(b) << dpos[0].x(), dpos[0].y(), dpos[0].z();
    }
    t.accumulate(ri, droot);
    t.accumulate(qi, dq);
  });
}

}  // namespace tween::kin
