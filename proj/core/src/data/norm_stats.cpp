#include "tween/data/norm_stats.hpp"

#include <cmath>
#include <stdexcept>

namespace tween::data {

NormStats NormStats::compute(std::span<const kin::FrameState> states, std::vector<std::size_t>* degenerate) {
  if (states.empty()) throw std::invalid_argument("NormStats::compute: no frames");
  NormStats s;
  std::array<double, kDims> sum{};
  std::array<double, kDims> sq{};
  for (const auto& st : states) {
    for (std::size_t k = 0; k < kin::Skeleton::kLowerPositionalCount; ++k) {
      for (int c = 0; c < 3; ++c) sum[3 * k + c] += st.p_L[k][c];
    }
  }
  const double n = static_cast<double>(states.size());
  for (std::size_t d = 0; d < kDims; ++d) s.mean[d] = sum[d] / n;
  for (const auto& st : states) {
    for (std::size_t k = 0; k < kin::Skeleton::kLowerPositionalCount; ++k) {
      for (int c = 0; c < 3; ++c) {
        const double e = st.p_L[k][c] - s.mean[3 * k + c];
        sq[3 * k + c] += e * e;
      }
    }
  }
  for (std::size_t d = 0; d < kDims; ++d) {
    const double sd = std::sqrt(sq[d] / n);
    if (sd > 1e-6) {
      s.std[d] = sd;
    } else {
      s.std[d] = 1.0;
      if (degenerate != nullptr) degenerate->push_back(d);
    }
  }
  return s;
}

std::array<double, NormStats::kDims> NormStats::normalize(const kin::FrameState& s) const {
  std::array<double, kDims> p{};
  for (std::size_t k = 0; k < kin::Skeleton::kLowerPositionalCount; ++k) {
    for (int c = 0; c < 3; ++c) p[3 * k + c] = s.p_L[k][c];
  }
  return normalize(p);
}

std::array<double, NormStats::kDims> NormStats::normalize(std::span<const double> p) const {
  if (p.size() != kDims) throw std::invalid_argument("NormStats::normalize: expected 18 values");
  std::array<double, kDims> z{};
  for (std::size_t d = 0; d < kDims; ++d) z[d] = (p[d] - mean[d]) / std[d];
  return z;
}

std::array<double, NormStats::kDims> NormStats::denormalize(std::span<const double> z) const {
  if (z.size() != kDims) throw std::invalid_argument("NormStats::denormalize: expected 18 values");
  std::array<double, kDims> p{};
  for (std::size_t d = 0; d < kDims; ++d) p[d] = z[d] * std[d] + mean[d];
  return p;
}

void NormStats::put(ad::Checkpoint& ck, const std::string& prefix) const {
  ad::Tensor m(1, kDims);
  ad::Tensor s(1, kDims);
  for (std::size_t d = 0; d < kDims; ++d) {
    m(0, static_cast<ad::Index>(d)) = mean[d];
    s(0, static_cast<ad::Index>(d)) = std[d];
  }
  ck.tensors[prefix + "mean"] = m;
  ck.tensors[prefix + "std"] = s;
}

NormStats NormStats::get(const ad::Checkpoint& ck, const std::string& prefix) {
  auto fetch = [&](const std::string& key) -> const ad::Tensor& {
    auto it = ck.tensors.find(prefix + key);
    if (it == ck.tensors.end() || it->second.size() != static_cast<ad::Index>(kDims)) {
      throw ad::CheckpointError("checkpoint lacks normalization entry '" + prefix + key + "'");
    }
    return it->second;
  };
  NormStats s;
  const ad::Tensor& m = fetch("mean");
  const ad::Tensor& sd = fetch("std");
  for (std::size_t d = 0; d < kDims; ++d) {
    s.mean[d] = m.data()[d];
    s.std[d] = sd.data()[d];
  }
  return s;
}

}  // namespace tween::data
