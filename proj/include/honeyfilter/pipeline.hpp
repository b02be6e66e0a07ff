#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "honeyfilter/cnn.hpp"
#include "honeyfilter/config.hpp"
#include "honeyfilter/flatness.hpp"
#include "honeyfilter/generator.hpp"

namespace honeyfilter {

inline constexpr const char* kToolVersion = "0.1.0";

// Hex FNV-1a 64 of a file's bytes.
std::string file_hash(const std::filesystem::path& path);

std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);

// word<TAB>label, label 1 = password, 0 = honeyword.
void write_pairs_tsv(const std::filesystem::path& path, const std::vector<LabeledPair>& pairs);
std::vector<LabeledPair> read_pairs_tsv(const std::filesystem::path& path);

// Honeyword generator described by `hgt`. Password-model and hybrid need an
// embedding; the imported kind loads hgt.import_path.
std::unique_ptr<HoneywordGenerator> make_generator(
    const HgtConfig& hgt, std::shared_ptr<const EmbeddingModel> embedding = nullptr);

// Stage runner over one output directory. Every stage writes its artifacts
// plus `<stage>.manifest.json` (tool version, config hash, input and output
// file hashes). A failing stage removes what it had written. Stages refuse
// upstream artifacts produced under a different config hash unless `force`.
class Pipeline {
 public:
  Pipeline(RunConfig config, bool force = false);

  const RunConfig& config() const { return config_; }
  const std::filesystem::path& dir() const { return dir_; }
  std::string config_hash() const { return hash_; }

  // Loads and splits the corpora: split.{train,val,test}.txt, target.txt.
  nlohmann::json ingest();
  // Self-trained scenario: synthetic attacker passwords, passgen.txt.
  nlohmann::json passgen();
  // Password-model and hybrid generators: embedding.{attack,target}.bin.
  nlohmann::json train_embed();
  // pairs.{train,val}.tsv and accounts.tsv.
  nlohmann::json gen();
  // classifier.ckpt and history.csv.
  nlohmann::json train_clf();
  // report.json, curve.csv, flatness.dat. Returns the report.
  nlohmann::json eval();
  // vault.store.jsonl, vault.checker.jsonl, replay.json, replay.csv.
  nlohmann::json replay();
  // Every stage in order; returns the report.
  nlohmann::json run();

 private:
  std::filesystem::path path(const std::string& name) const { return dir_ / name; }
  void require_upstream(const std::string& stage) const;

  RunConfig config_;
  std::filesystem::path dir_;
  std::string hash_;
  bool force_;
};

enum class AverageMode { kPerDataset, kPooled };

// Collects report.json from each run directory after checking that every
// manifest there carries the report's config hash and that recorded file
// hashes match the files on disk. Throws kHashMismatch unless `force`.
nlohmann::json combine_reports(const std::vector<std::filesystem::path>& dirs,
                               AverageMode mode, bool force);

// Plain-text success grid with a random-guessing row.
std::string format_grid(const nlohmann::json& report);

}  // namespace honeyfilter
