#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "harness/config.hpp"
#include "tracecodec/token.hpp"

namespace treebandit {

struct CorpusFile {
  std::string path;  // relative to the manifest
  Split split = Split::Train;
  std::size_t records = 0;
  std::uint64_t bytes = 0;
  std::string checksum;  // "fnv1a64:<16 hex digits>"
};

struct CorpusRecord {
  std::string file;
  std::uint64_t offset = 0;  // byte range of the record, separator excluded
  std::uint64_t length = 0;
  std::string instance_id;
  int trace = 0;
  std::string policy;
  Split split = Split::Train;
  int selections = 0;
  std::size_t tokens = 0;  // model-level tokens under the vocabulary
};

/// Sidecar of a generated corpus. Records are plain empirical-format text
/// separated by one blank line.
struct CorpusManifest {
  TraceFormat format = TraceFormat::EmpiricalTree;
  nlohmann::json config;
  std::string instances_file;
  std::string vocab_file;
  std::vector<CorpusFile> files;
  std::vector<CorpusRecord> records;

  nlohmann::json to_json() const;
  static CorpusManifest from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static CorpusManifest load(const std::string& path);
};

inline constexpr const char* kManifestName = "manifest.json";

/// Writes instances.json, vocab.json, corpus-train.txt, corpus-val.txt and
/// manifest.json into `dir` (created if missing). Every byte is a function
/// of the config.
CorpusManifest gen_corpus(const ExperimentConfig& cfg, const std::string& dir);

std::string file_checksum(const std::string& path);

/// Recomputes the checksums of every corpus file next to the manifest;
/// throws InvariantViolation on the first mismatch and StructuralError if a
/// record range or split assignment is inconsistent.
void verify_corpus(const std::string& manifest_path);

/// Record text at the manifest's byte range.
std::string read_record(const std::string& manifest_path, const CorpusRecord& r);

}  // namespace treebandit
