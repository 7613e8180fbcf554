#include "tween/autodiff/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tween::ad {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'T', 'W', 'N', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void write_pod(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string str(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void raw(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw CheckpointError("checkpoint truncated at byte " + std::to_string(pos_));
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void Checkpoint::put(const std::string& prefix, const ParameterSet& params) {
  for (const auto& p : params) tensors[prefix + p.name] = p.value;
}

void Checkpoint::get(const std::string& prefix, ParameterSet& params) const {
  for (auto& p : params) {
    auto it = tensors.find(prefix + p.name);
    if (it == tensors.end()) throw CheckpointError("checkpoint lacks parameter '" + prefix + p.name + "'");
    if (it->second.rows() != p.value.rows() || it->second.cols() != p.value.cols()) {
      throw CheckpointError("parameter '" + prefix + p.name + "' has shape " + shape_str(it->second) +
                            ", model expects " + shape_str(p.value));
    }
    p.value = it->second;
  }
}

void Checkpoint::put(const std::string& prefix, const Amsgrad& opt) {
  const auto& ms = opt.moments();
  for (std::size_t k = 0; k < ms.size(); ++k) {
    const std::string base = prefix + std::to_string(k);
    tensors[base + ".m"] = ms[k].m;
    tensors[base + ".v"] = ms[k].v;
    tensors[base + ".vhat"] = ms[k].vhat;
  }
  texts[prefix + "steps"] = std::to_string(opt.steps());
}

void Checkpoint::get(const std::string& prefix, Amsgrad& opt) const {
  auto& ms = opt.moments();
  for (std::size_t k = 0; k < ms.size(); ++k) {
    const std::string base = prefix + std::to_string(k);
    auto fetch = [&](const std::string& key, Tensor& dst) {
      auto it = tensors.find(key);
      if (it == tensors.end()) throw CheckpointError("checkpoint lacks optimizer entry '" + key + "'");
      if (it->second.rows() != dst.rows() || it->second.cols() != dst.cols()) {
        throw CheckpointError("optimizer entry '" + key + "' has the wrong shape");
      }
      dst = it->second;
    };
    fetch(base + ".m", ms[k].m);
    fetch(base + ".v", ms[k].v);
    fetch(base + ".vhat", ms[k].vhat);
  }
  opt.set_steps(std::stoull(text(prefix + "steps")));
}

const std::string& Checkpoint::text(const std::string& key) const {
  auto it = texts.find(key);
  if (it == texts.end()) throw CheckpointError("checkpoint lacks entry '" + key + "'");
  return it->second;
}

std::string Checkpoint::serialize() const {
  std::string out(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(out, kVersion);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size() + texts.size()));
  for (const auto& [name, t] : tensors) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    write_pod<std::uint8_t>(out, 0);
    write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(t.rows()));
    write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(t.cols()));
    out.append(reinterpret_cast<const char*>(t.data()), sizeof(double) * static_cast<std::size_t>(t.size()));
  }
  for (const auto& [name, s] : texts) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    write_pod<std::uint8_t>(out, 1);
    write_pod<std::uint64_t>(out, s.size());
    out += s;
  }
  return out;
}

Checkpoint Checkpoint::deserialize(const std::string& bytes) {
  Reader in(bytes);
  if (in.str(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw CheckpointError("not a tween checkpoint (bad magic)");
  }
  const auto version = in.pod<std::uint32_t>();
  if (version != kVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = in.pod<std::uint32_t>();
  Checkpoint ck;
  for (std::uint32_t e = 0; e < count; ++e) {
    const auto name_len = in.pod<std::uint32_t>();
    std::string name = in.str(name_len);
    const auto kind = in.pod<std::uint8_t>();
    if (kind == 0) {
      const auto rows = in.pod<std::uint64_t>();
      const auto cols = in.pod<std::uint64_t>();
      Tensor t(static_cast<Index>(rows), static_cast<Index>(cols));
      in.raw(t.data(), sizeof(double) * rows * cols);
      ck.tensors.emplace(std::move(name), std::move(t));
    } else if (kind == 1) {
      const auto len = in.pod<std::uint64_t>();
      ck.texts.emplace(std::move(name), in.str(len));
    } else {
      throw CheckpointError("unknown entry kind " + std::to_string(kind) + " for '" + name + "'");
    }
  }
  if (!in.done()) throw CheckpointError("trailing bytes after checkpoint entries");
  return ck;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointError("cannot open '" + path.string() + "' for writing");
  const std::string bytes = serialize();
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw CheckpointError("write to '" + path.string() + "' failed");
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize(ss.str());
}

}  // namespace tween::ad
