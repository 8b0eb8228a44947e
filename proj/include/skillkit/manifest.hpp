#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "skillkit/core.hpp"

namespace skillkit {

// Traceability record for a built dataset: every file and pair, the split
// assignment with the seed and strategy that produced it, and digests of
// exported artifacts. Serialized as line-delimited JSON, one record per
// line, in canonical order so equal manifests are byte-identical.
struct DatasetManifest {
  std::uint64_t seed = 0;
  TrainingStrategy strategy;
  std::vector<SourceFile> files;  // texts live on disk, not in the manifest
  std::vector<Pair> pairs;
  std::map<std::string, Split> file_split;
  std::map<std::string, Split> pair_split;
  std::map<std::string, std::string> exports;  // artifact name -> digest
  std::vector<std::string> warnings;           // transient, not serialized

  const SourceFile* find_file(const std::string& id) const;
  const Pair* find_pair(const std::string& id) const;
  std::vector<const Pair*> pairs_in_split(Split split) const;
};

std::string manifest_to_string(const DatasetManifest& manifest);
DatasetManifest manifest_from_string(std::string_view data);

void save_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

}  // namespace skillkit
