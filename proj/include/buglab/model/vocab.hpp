#pragma once

// Subtoken vocabulary: identifiers split deterministically on underscores
// and lower-to-upper case transitions, lowercased. Ids 0/1 are reserved for
// PAD/UNK; the rest are assigned by descending frequency (ties by name).

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace buglab {

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kMaxSubtokensPerLabel = 6;

inline std::vector<std::string> split_subtokens(const std::string& label) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&]() {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (size_t i = 0; i < label.size(); ++i) {
    char c = label[i];
    if (c == '_') {
      flush();
      continue;
    }
    if (std::isupper(static_cast<unsigned char>(c)) && i > 0 &&
        std::islower(static_cast<unsigned char>(label[i - 1])))
      flush();
    cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  flush();
  if (out.empty()) out.push_back(label.empty() ? "<empty>" : label);
  return out;
}

class Vocabulary {
 public:
  Vocabulary() : names_{"<pad>", "<unk>"} {}

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int id) const { return names_[static_cast<size_t>(id)]; }

  int id_of(const std::string& subtoken) const {
    auto it = index_.find(subtoken);
    return it == index_.end() ? kUnkId : it->second;
  }

  int add(const std::string& subtoken) {
    auto it = index_.find(subtoken);
    if (it != index_.end()) return it->second;
    int id = size();
    index_.emplace(subtoken, id);
    names_.push_back(subtoken);
    return id;
  }

  // at most the first kMaxSubtokensPerLabel subtokens of a label
  std::vector<int> encode(const std::string& label) const {
    std::vector<int> ids;
    for (const std::string& s : split_subtokens(label)) {
      if (static_cast<int>(ids.size()) >= kMaxSubtokensPerLabel) break;
      ids.push_back(id_of(s));
    }
    return ids;
  }

  void save(std::ostream& os) const {
    for (const std::string& n : names_) os << n << "\n";
  }
  static Vocabulary load(std::istream& is) {
    Vocabulary v;
    v.names_.clear();
    v.index_.clear();
    std::string line;
    while (std::getline(is, line)) {
      v.index_.emplace(line, v.size());
      v.names_.push_back(line);
    }
    return v;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

inline Vocabulary build_vocabulary(const std::vector<std::string>& labels,
                                   int max_size = 15000) {
  std::map<std::string, long> freq;
  for (const std::string& label : labels)
    for (const std::string& s : split_subtokens(label)) ++freq[s];
  std::vector<std::pair<std::string, long>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  for (const auto& [name, _] : ranked) {
    if (v.size() >= max_size) break;
    v.add(name);
  }
  return v;
}

}  // namespace buglab
