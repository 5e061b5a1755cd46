#include "dep/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "dep/image.hpp"

namespace dep {

namespace fs = std::filesystem;

namespace {

std::string index_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04zu.ppm", i);
  return buf;
}

void save_split(const fs::path& root, const std::string& split, const SampleSet& set) {
  std::vector<std::size_t> counter(set.classes.size(), 0);
  for (const LabeledImage& item : set.items) {
    const fs::path dir = root / split / set.classes[static_cast<std::size_t>(item.label)];
    fs::create_directories(dir);
    write_ppm(dir / index_name(counter[static_cast<std::size_t>(item.label)]++), item.image);
  }
}

SampleSet load_split(const fs::path& root, const std::string& split,
                     const std::vector<std::string>& classes) {
  SampleSet set;
  set.classes = classes;
  for (std::size_t label = 0; label < classes.size(); ++label) {
    const fs::path dir = root / split / classes[label];
    if (!fs::exists(dir)) continue;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".ppm") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) {
      LabeledImage item;
      item.id = split + "/" + classes[label] + "/" + f.stem().string();
      item.label = static_cast<int>(label);
      item.image = read_ppm(f);
      set.items.push_back(std::move(item));
    }
  }
  return set;
}

}  // namespace

void save_dataset(const fs::path& root, const SampleSet& train, const SampleSet& test,
                  const std::string& manifest_json) {
  fs::create_directories(root);
  save_split(root, "train", train);
  save_split(root, "test", test);
  std::ofstream f(root / "manifest.json");
  if (!f) throw FormatError("save_dataset: cannot write manifest under " + root.string());
  f << manifest_json << "\n";
}

std::pair<SampleSet, SampleSet> load_dataset(const fs::path& root) {
  if (!fs::exists(root)) throw DataError("dataset: path does not exist: " + root.string());
  std::vector<std::string> classes;
  const fs::path manifest = root / "manifest.json";
  if (fs::exists(manifest)) {
    std::ifstream f(manifest);
    nlohmann::json j;
    try {
      f >> j;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("dataset: bad manifest.json: " + std::string(e.what()));
    }
    for (const auto& c : j.at("classes")) classes.push_back(c.at("name").get<std::string>());
  } else {
    // generic image-directory ingestion: class order = sorted directory names
    const fs::path train_dir = root / "train";
    if (!fs::exists(train_dir)) throw DataError("dataset: missing train split under " + root.string());
    for (const auto& e : fs::directory_iterator(train_dir))
      if (e.is_directory()) classes.push_back(e.path().filename().string());
    std::sort(classes.begin(), classes.end());
  }
  if (classes.empty()) throw DataError("dataset: no classes found under " + root.string());
  return {load_split(root, "train", classes), load_split(root, "test", classes)};
}

}  // namespace dep
