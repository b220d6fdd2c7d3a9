#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>

namespace sgnmf {

// Reference sizes of the public benchmark networks the toolkit is meant to
// ingest. `communities` is the K used when none is given explicitly.
struct DatasetInfo {
  std::string_view name;
  long nodes;
  long edges;
  int communities;
  std::string_view description;
};

inline constexpr std::array<DatasetInfo, 10> kKnownDatasets{{
    {"youtube", 11144, 36186, 40, "Youtube online"},
    {"flickr", 8051, 188687, 193, "Flickr social network"},
    {"friendster", 11023, 280755, 13, "Friendster online"},
    {"polblogs", 1490, 16718, 2, "Blogs about US politics"},
    {"lj", 7181, 253820, 30, "LiveJournal online"},
    {"cornell", 195, 304, 5, "Subnetwork of WebKB"},
    {"dolphins", 62, 159, 2, "Dolphin social network"},
    {"orkut", 11751, 270667, 5, "Orkut online"},
    {"amazon", 5304, 16701, 85, "Amazon product"},
    {"dblp", 12547, 35250, 4, "DBLP collaboration"},
}};

// Case-insensitive lookup by name.
inline std::optional<DatasetInfo> find_dataset(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  for (const auto& d : kKnownDatasets)
    if (d.name == lower) return d;
  return std::nullopt;
}

}  // namespace sgnmf
