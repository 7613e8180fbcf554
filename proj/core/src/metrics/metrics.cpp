#include "tween/metrics/metrics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace tween::metrics {
namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void check_same_shape(const PositionSeq& a, const PositionSeq& b, const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": frame counts differ (" + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
  for (std::size_t f = 0; f < a.size(); ++f) {
    if (a[f].size() != b[f].size()) throw std::invalid_argument(std::string(what) + ": joint counts differ");
  }
}

}  // namespace

double l2_global(const PositionSeq& pred, const PositionSeq& gt) {
  check_same_shape(pred, gt, "l2_global");
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t f = 0; f < pred.size(); ++f) {
    for (std::size_t j = 0; j < pred[f].size(); ++j) {
      acc += (pred[f][j] - gt[f][j]).norm();
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("l2_global: empty input");
  return acc / static_cast<double>(n);
}

double l2_global(const MotionClip& pred, const MotionClip& gt) {
  return l2_global(pred.world_positions(), gt.world_positions());
}

std::vector<std::vector<double>> power_spectra(const FeatureSeq& seq) {
  if (seq.empty()) throw std::invalid_argument("power_spectra: empty sequence");
  const int T = static_cast<int>(seq.size());
  const int D = static_cast<int>(seq.front().size());
  for (const auto& row : seq) {
    if (static_cast<int>(row.size()) != D) throw std::invalid_argument("power_spectra: ragged feature rows");
  }
  const int bins = T / 2 + 1;
  std::vector<std::vector<double>> out(D, std::vector<double>(bins, 0.0));
  if (D == 0) return out;

  double* in = fftw_alloc_real(static_cast<std::size_t>(T) * D);
  fftw_complex* spec = fftw_alloc_complex(static_cast<std::size_t>(bins) * D);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    // Column d is a strided signal with stride D; outputs are contiguous per dimension.
    plan = fftw_plan_many_dft_r2c(1, &T, D, in, nullptr, D, 1, spec, nullptr, 1, bins, FFTW_ESTIMATE);
  }
  for (int t = 0; t < T; ++t) {
    for (int d = 0; d < D; ++d) in[t * D + d] = seq[t][d];
  }
  fftw_execute(plan);
  for (int d = 0; d < D; ++d) {
    for (int k = 0; k < bins; ++k) {
      const double re = spec[d * bins + k][0];
      const double im = spec[d * bins + k][1];
      out[d][k] = re * re + im * im;
    }
  }
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(spec);
  return out;
}

double npss(const FeatureSeq& pred, const FeatureSeq& gt) {
  if (pred.size() != gt.size()) throw std::invalid_argument("npss: frame counts differ");
  if (gt.empty()) throw std::invalid_argument("npss: zero-length input");
  if (!pred.empty() && pred.front().size() != gt.front().size()) {
    throw std::invalid_argument("npss: feature dimensions differ");
  }
  const auto ps = power_spectra(pred);
  const auto gs = power_spectra(gt);
  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t d = 0; d < gs.size(); ++d) {
    double sp = 0.0;
    double sg = 0.0;
    for (double v : ps[d]) sp += v;
    for (double v : gs[d]) sg += v;
    double cp = 0.0;
    double cg = 0.0;
    double emd = 0.0;
    for (std::size_t k = 0; k < gs[d].size(); ++k) {
      cp += sp > 0.0 ? ps[d][k] / sp : (k == 0 ? 1.0 : 0.0);
      cg += sg > 0.0 ? gs[d][k] / sg : (k == 0 ? 1.0 : 0.0);
      emd += std::abs(cp - cg);
    }
    weighted += sg * emd;
    total += sg;
  }
  return total > 0.0 ? weighted / total : 0.0;
}

FeatureSeq rotation_features(const MotionClip& clip) {
  FeatureSeq out;
  out.reserve(clip.frame_count());
  for (const auto& frame : clip.rotations) {
    std::vector<double> row;
    row.reserve(frame.size() * 6);
    for (const auto& r : frame) {
      const auto a = kin::canonicalize(r).to_array();
      row.insert(row.end(), a.begin(), a.end());
    }
    out.push_back(std::move(row));
  }
  return out;
}

double skate_factor(double height, double H) { return std::clamp(2.0 - std::exp2(height / H), 0.0, 1.0); }

double foot_skate(const PositionSeq& positions, std::span<const int> feet, double H) {
  if (feet.empty()) throw std::invalid_argument("foot_skate: no foot joints");
  if (positions.size() < 2) return 0.0;
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t f = 1; f < positions.size(); ++f) {
    for (int j : feet) {
      const Vec3 d = positions[f][j] - positions[f - 1][j];
      const double speed = std::hypot(d.x(), d.z());
      acc += speed * skate_factor(positions[f][j].y(), H);
      ++n;
    }
  }
  return acc / static_cast<double>(n);
}

double foot_skate(const MotionClip& clip, double H) {
  return foot_skate(clip.world_positions(), clip.skeleton->feet(), H);
}

double bone_length_error(const PositionSeq& positions, const Skeleton& skeleton) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& frame : positions) {
    if (static_cast<int>(frame.size()) != skeleton.joint_count()) {
      throw std::invalid_argument("bone_length_error: joint count does not match the skeleton");
    }
    for (int j = 1; j < skeleton.joint_count(); ++j) {
      acc += std::abs((frame[j] - frame[skeleton.parent(j)]).norm() - skeleton.offset(j).norm());
      ++n;
    }
  }
  return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

double bone_length_error(const MotionClip& clip) { return bone_length_error(clip.world_positions(), *clip.skeleton); }

}  // namespace tween::metrics
