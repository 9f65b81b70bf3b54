#include "moransac/segmentation.hpp"

#include <fstream>
#include <map>
#include <set>
#include <string>

namespace moransac {

int Segmentation::num_clusters() const {
  std::set<int> distinct;
  for (int label : labels) {
    if (label >= 0) distinct.insert(label);
  }
  return static_cast<int>(distinct.size());
}

void Segmentation::compact() {
  std::map<int, int> remap;
  for (int label : labels) {
    if (label >= 0) remap.emplace(label, 0);
  }
  int next = 0;
  for (auto& [old_id, new_id] : remap) new_id = next++;
  for (int& label : labels) {
    if (label >= 0) label = remap[label];
  }
}

void write_labels(const std::filesystem::path& file, const Segmentation& seg) {
  std::ofstream out(file);
  if (!out) throw InputError("cannot write label file " + file.string());
  for (int label : seg.labels) out << label << "\n";
}

Segmentation read_labels(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open label file " + file.string());
  Segmentation seg;
  int value;
  while (in >> value) seg.labels.push_back(value);
  if (!in.eof()) throw FormatError("non-integer entry in label file " + file.string());
  return seg;
}

}  // namespace moransac
