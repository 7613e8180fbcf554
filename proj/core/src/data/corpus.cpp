#include "tween/data/corpus.hpp"

#include "tween/data/bvh.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tween::data {

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw std::runtime_error("cannot open corpus manifest '" + manifest.string() + "'");
  const std::filesystem::path base = manifest.parent_path();
  std::vector<ManifestEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string path;
    std::string subject;
    if (!(ss >> path) || path.front() == '#') continue;
    if (!(ss >> subject)) {
      throw std::runtime_error(manifest.string() + ":" + std::to_string(lineno) + ": missing subject label");
    }
    out.push_back({base / path, subject});
  }
  return out;
}

void write_manifest(const std::filesystem::path& manifest, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(manifest);
  if (!out) throw std::runtime_error("cannot write corpus manifest '" + manifest.string() + "'");
  out << "# path subject\n";
  for (const auto& e : entries) out << e.path.generic_string() << ' ' << e.subject << '\n';
}

std::vector<MotionClip> load_corpus(const std::filesystem::path& manifest) {
  const auto entries = read_manifest(manifest);
  if (entries.empty()) throw std::runtime_error("corpus manifest '" + manifest.string() + "' lists no clips");
  std::vector<MotionClip> clips;
  std::shared_ptr<const Skeleton> shared;
  for (const auto& e : entries) {
    MotionClip clip = load_bvh(e.path);
    clip.subject = e.subject;
    if (!shared) {
      shared = clip.skeleton;
    } else if (!shared->same_topology(*clip.skeleton, 1e-6)) {
      throw std::runtime_error("clip '" + e.path.string() + "' uses a different skeleton than the rest of the corpus");
    } else {
      clip.skeleton = shared;
    }
    clip.validate(2);
    clips.push_back(std::move(clip));
  }
  return clips;
}

}  // namespace tween::data
