#include "tween/data/bvh.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace tween::data {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Token {
  std::string text;
  int line;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  int line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '{' || c == '}') {
      out.push_back({std::string(1, c), line});
      ++i;
    } else {
      std::size_t j = i;
      while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '{' && text[j] != '}') ++j;
      out.push_back({std::string(text.substr(i, j - i)), line});
      i = j;
    }
  }
  return out;
}

class Cursor {
 public:
  explicit Cursor(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  bool done() const { return pos_ >= tokens_.size(); }
  int line() const { return done() ? (tokens_.empty() ? 0 : tokens_.back().line) : tokens_[pos_].line; }

  const Token& peek() const {
    if (done()) throw BvhError("unexpected end of file", line());
    return tokens_[pos_];
  }

  Token next() {
    const Token& t = peek();
    ++pos_;
    return t;
  }

  void expect(const std::string& word) {
    const Token t = next();
    if (t.text != word) throw BvhError("expected '" + word + "', found '" + t.text + "'", t.line);
  }

  double number() {
    const Token t = next();
    try {
      std::size_t used = 0;
      const double v = std::stod(t.text, &used);
      if (used != t.text.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw BvhError("expected a number, found '" + t.text + "'", t.line);
    }
  }

  std::size_t position() const { return pos_; }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

struct JointSpec {
  std::string name;
  int parent;
  Vec3 offset;
  kin::EulerOrder order;
  bool has_position;
  std::optional<Vec3> end_site;
};

kin::EulerOrder parse_rotation_channels(Cursor& in, int line) {
  std::string axes;
  for (int k = 0; k < 3; ++k) {
    const Token t = in.next();
    if (t.text.size() != 9 || t.text.substr(1) != "rotation") {
      throw BvhError("unsupported channel layout: expected a rotation channel, found '" + t.text + "'", t.line);
    }
    axes += t.text[0];
  }
  if (axes == "ZYX") return kin::EulerOrder::ZYX;
  if (axes == "ZXY") return kin::EulerOrder::ZXY;
  throw BvhError("unsupported channel layout: rotation order " + axes + " (supported: ZYX, ZXY)", line);
}

void parse_joint(Cursor& in, std::vector<JointSpec>& joints, int parent) {
  const Token name = in.next();
  JointSpec spec{name.text, parent, Vec3::Zero(), kin::EulerOrder::ZYX, false, std::nullopt};
  in.expect("{");
  in.expect("OFFSET");
  spec.offset.x() = in.number();
  spec.offset.y() = in.number();
  spec.offset.z() = in.number();
  const Token ch = in.next();
  if (ch.text != "CHANNELS") throw BvhError("expected 'CHANNELS', found '" + ch.text + "'", ch.line);
  const double count = in.number();
  if (parent < 0) {
    if (count != 6) throw BvhError("unsupported channel layout: root must have 6 channels", ch.line);
    const char* expected[3] = {"Xposition", "Yposition", "Zposition"};
    for (const char* e : expected) {
      const Token t = in.next();
      if (t.text != e) {
        throw BvhError("unsupported channel layout: root positions must be X Y Z, found '" + t.text + "'", t.line);
      }
    }
    spec.has_position = true;
  } else if (count != 3) {
    throw BvhError("unsupported channel layout: joint '" + spec.name + "' must have 3 rotation channels", ch.line);
  }
  spec.order = parse_rotation_channels(in, ch.line);
  const int self = static_cast<int>(joints.size());
  joints.push_back(spec);
  while (true) {
    const Token t = in.next();
    if (t.text == "}") return;
    if (t.text == "JOINT") {
      parse_joint(in, joints, self);
    } else if (t.text == "End") {
      in.expect("Site");
      in.expect("{");
      in.expect("OFFSET");
      Vec3 o;
      o.x() = in.number();
      o.y() = in.number();
      o.z() = in.number();
      in.expect("}");
      joints[self].end_site = o;
    } else {
      throw BvhError("unexpected token '" + t.text + "' in joint '" + spec.name + "'", t.line);
    }
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

Mat3 euler_to_matrix(kin::EulerOrder order, const Vec3& degrees) {
  using Eigen::AngleAxisd;
  const AngleAxisd a(degrees[0] * kDeg, Vec3::UnitZ());
  switch (order) {
    case kin::EulerOrder::ZYX:
      return (a * AngleAxisd(degrees[1] * kDeg, Vec3::UnitY()) * AngleAxisd(degrees[2] * kDeg, Vec3::UnitX()))
          .toRotationMatrix();
    case kin::EulerOrder::ZXY:
      return (a * AngleAxisd(degrees[1] * kDeg, Vec3::UnitX()) * AngleAxisd(degrees[2] * kDeg, Vec3::UnitY()))
          .toRotationMatrix();
  }
  throw std::invalid_argument("unknown Euler order");
}

Vec3 matrix_to_euler(kin::EulerOrder order, const Mat3& m) {
  switch (order) {
    case kin::EulerOrder::ZYX: {
      const double b = std::asin(std::clamp(-m(2, 0), -1.0, 1.0));
      double a, c;
      if (std::abs(m(2, 0)) < 1.0 - 1e-12) {
        a = std::atan2(m(1, 0), m(0, 0));
        c = std::atan2(m(2, 1), m(2, 2));
      } else {
        a = std::atan2(-m(0, 1), m(1, 1));
        c = 0.0;
      }
      return Vec3(a, b, c) / kDeg;
    }
    case kin::EulerOrder::ZXY: {
      const double b = std::asin(std::clamp(m(2, 1), -1.0, 1.0));
      double a, c;
      if (std::abs(m(2, 1)) < 1.0 - 1e-12) {
        a = std::atan2(-m(0, 1), m(1, 1));
        c = std::atan2(-m(2, 0), m(2, 2));
      } else {
        a = std::atan2(m(1, 0), m(0, 0));
        c = 0.0;
      }
      return Vec3(a, b, c) / kDeg;
    }
  }
  throw std::invalid_argument("unknown Euler order");
}

MotionClip parse_bvh(std::string_view text, std::string name) {
  Cursor in(tokenize(text));
  in.expect("HIERARCHY");
  in.expect("ROOT");
  std::vector<JointSpec> joints;
  parse_joint(in, joints, -1);
  in.expect("MOTION");
  in.expect("Frames:");
  const int frames_line = in.line();
  const double frames_d = in.number();
  if (frames_d < 0 || frames_d != std::floor(frames_d)) throw BvhError("invalid frame count", frames_line);
  const auto frames = static_cast<std::size_t>(frames_d);
  in.expect("Frame");
  in.expect("Time:");
  const int time_line = in.line();
  const double frame_time = in.number();
  if (!(frame_time > 0.0)) throw BvhError("frame time must be positive", time_line);
  double rate = 1.0 / frame_time;
  if (std::abs(rate - std::round(rate)) < 1e-3) rate = std::round(rate);

  std::vector<std::string> names;
  std::vector<int> parents;
  std::vector<Vec3> offsets;
  for (const auto& j : joints) {
    names.push_back(j.name);
    parents.push_back(j.parent);
    offsets.push_back(j.parent < 0 ? Vec3::Zero() : j.offset);
  }
  std::shared_ptr<Skeleton> skeleton;
  try {
    skeleton = std::make_shared<Skeleton>(std::move(names), std::move(parents), std::move(offsets), rate);
  } catch (const std::invalid_argument& e) {
    throw BvhError(e.what(), 0);
  }
  for (std::size_t j = 0; j < joints.size(); ++j) {
    skeleton->rotation_orders[j] = joints[j].order;
    skeleton->end_sites[j] = joints[j].end_site;
  }

  MotionClip clip;
  clip.name = std::move(name);
  clip.frame_rate = rate;
  clip.root_positions.reserve(frames);
  clip.rotations.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    if (in.done()) {
      throw BvhError("MOTION declares " + std::to_string(frames) + " frames but only " + std::to_string(f) +
                         " are present",
                     in.line());
    }
    std::vector<Rotation6D> rots(joints.size());
    Vec3 root;
    for (std::size_t j = 0; j < joints.size(); ++j) {
      if (joints[j].has_position) {
        root.x() = in.number();
        root.y() = in.number();
        root.z() = in.number();
      }
      Vec3 angles;
      angles[0] = in.number();
      angles[1] = in.number();
      angles[2] = in.number();
      rots[j] = kin::matrix_to_sixd(euler_to_matrix(joints[j].order, angles));
    }
    clip.root_positions.push_back(root);
    clip.rotations.push_back(std::move(rots));
  }
  if (!in.done()) {
    throw BvhError("MOTION declares " + std::to_string(frames) + " frames but more data follows", in.line());
  }
  clip.skeleton = std::move(skeleton);
  return clip;
}

MotionClip load_bvh(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw BvhError("cannot open '" + path.string() + "'", 0);
  std::ostringstream ss;
  ss << f.rdbuf();
  try {
    return parse_bvh(ss.str(), path.stem().string());
  } catch (const BvhError& e) {
    throw BvhError(path.string() + ": " + e.what(), 0);
  }
}

std::string write_bvh(const MotionClip& clip) {
  clip.validate(1);
  const Skeleton& sk = *clip.skeleton;
  const int n = sk.joint_count();
  std::vector<std::vector<int>> children(n);
  for (int j = 1; j < n; ++j) children[sk.parent(j)].push_back(j);

  std::ostringstream out;
  auto order_str = [](kin::EulerOrder o) {
    return o == kin::EulerOrder::ZYX ? "Zrotation Yrotation Xrotation" : "Zrotation Xrotation Yrotation";
  };
  // The file lists joints depth-first; that must coincide with index order.
  std::vector<int> emitted;
  auto emit = [&](auto&& self, int j, int depth) -> void {
    const std::string pad(static_cast<std::size_t>(depth), '\t');
    emitted.push_back(j);
    if (j == 0) {
      out << "ROOT " << sk.names()[j] << "\n{\n";
    } else {
      out << pad << "JOINT " << sk.names()[j] << "\n" << pad << "{\n";
    }
    const Vec3& o = sk.offset(j);
    out << pad << "\tOFFSET " << fmt(o.x()) << " " << fmt(o.y()) << " " << fmt(o.z()) << "\n";
    if (j == 0) {
      out << pad << "\tCHANNELS 6 Xposition Yposition Zposition " << order_str(sk.rotation_orders[j]) << "\n";
    } else {
      out << pad << "\tCHANNELS 3 " << order_str(sk.rotation_orders[j]) << "\n";
    }
    for (int c : children[j]) self(self, c, depth + 1);
    if (sk.end_sites[j]) {
      const Vec3& e = *sk.end_sites[j];
      out << pad << "\tEnd Site\n" << pad << "\t{\n"
          << pad << "\t\tOFFSET " << fmt(e.x()) << " " << fmt(e.y()) << " " << fmt(e.z()) << "\n"
          << pad << "\t}\n";
    }
    out << pad << "}\n";
  };
  out << "HIERARCHY\n";
  emit(emit, 0, 0);
  for (int k = 0; k < n; ++k) {
    if (emitted[k] != k) {
      throw std::invalid_argument("write_bvh: skeleton joints are not in depth-first order");
    }
  }

  char ft[64];
  std::snprintf(ft, sizeof(ft), "%.8f", 1.0 / clip.frame_rate);
  out << "MOTION\nFrames: " << clip.frame_count() << "\nFrame Time: " << ft << "\n";
  for (std::size_t f = 0; f < clip.frame_count(); ++f) {
    const Vec3& p = clip.root_positions[f];
    out << fmt(p.x()) << " " << fmt(p.y()) << " " << fmt(p.z());
    for (int j = 0; j < n; ++j) {
      const Vec3 e = matrix_to_euler(sk.rotation_orders[j], kin::sixd_to_matrix(clip.rotations[f][j]));
      out << " " << fmt(e[0]) << " " << fmt(e[1]) << " " << fmt(e[2]);
    }
    out << "\n";
  }
  return out.str();
}

void save_bvh(const std::filesystem::path& path, const MotionClip& clip) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw BvhError("cannot open '" + path.string() + "' for writing", 0);
  f << write_bvh(clip);
  if (!f) throw BvhError("write to '" + path.string() + "' failed", 0);
}

}  // namespace tween::data
