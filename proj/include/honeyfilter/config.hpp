#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "honeyfilter/cnn.hpp"
#include "honeyfilter/corpus.hpp"
#include "honeyfilter/embedding.hpp"
#include "honeyfilter/llm.hpp"
#include "honeyfilter/tweak.hpp"

namespace honeyfilter {

enum class ScenarioKind { kSameService, kCrossService, kSelfTrained };
enum class HashMode { kPlain, kSaltedDigest };

const char* scenario_kind_name(ScenarioKind kind);
ScenarioKind parse_scenario_kind(std::string_view name);
GeneratorKind parse_generator_kind(std::string_view name);

struct CorpusConfig {
  std::string train;  // newline-delimited password file
  std::string eval;   // cross-service / self-trained target; empty = train
  std::string generated;  // self-trained: external password list instead of passgen
  std::size_t min_len = kDefaultMinLen;
  std::size_t max_len = kDefaultMaxLen;
  double train_frac = 0.90;
  double val_frac = 0.05;
  double test_frac = 0.05;
};

struct HgtConfig {
  GeneratorKind kind = GeneratorKind::kTweak;
  TweakParams tweak;
  EmbedHyper embedding;
  std::string import_path;  // honeyword table for kind == import
};

struct PassgenConfig {
  std::size_t order = 3;
  double alpha = 0.01;
  std::size_t count = 5000;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::kSameService;
  std::size_t k = 20;
  std::size_t accounts = 500;
  // Passwords used to build training pairs (two pairs each); 0 = whole split.
  std::size_t train_passwords = 0;
  std::vector<std::size_t> attempts{1, 3, 5, 10};
};

struct VaultSettings {
  std::size_t th1 = 3;
  std::size_t th2 = 1000;
  HashMode hash = HashMode::kPlain;
  bool fail_counts = false;
};

// Explicit per-stage seeds; any left unset derive from `seed`.
struct SeedOverrides {
  std::optional<std::uint64_t> split, tweak, embedding, passgen, cnn, eval, vault;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  CorpusConfig corpus;
  HgtConfig hgt;
  PassgenConfig passgen;
  // Architecture without alphabet_size, which comes from the training data.
  CnnArch cnn = CnnArch::defaults(0);
  TrainConfig train;
  ScenarioConfig scenario;
  VaultSettings vault;
  SeedOverrides seeds;
  std::optional<LlmEndpoint> llm;

  // Seed for a stage: the override when set, else derive_seed(seed, stage).
  std::uint64_t stage_seed(std::string_view stage) const;
  // Copy with every stage seed written into its parameter block.
  RunConfig resolved() const;
  void validate() const;
};

// Throws kParse for unknown keys or wrongly typed values.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

// FNV-1a 64 of the canonical serialization (sorted keys, no whitespace).
std::uint64_t config_hash(const RunConfig& config);
std::string hash_hex(std::uint64_t h);

nlohmann::json arch_to_json(const CnnArch& arch);
CnnArch arch_from_json(const nlohmann::json& j);
nlohmann::json tweak_to_json(const TweakParams& t);
TweakParams tweak_from_json(const nlohmann::json& j);
nlohmann::json embed_to_json(const EmbedHyper& h);
EmbedHyper embed_from_json(const nlohmann::json& j);
nlohmann::json train_to_json(const TrainConfig& t);
TrainConfig train_from_json(const nlohmann::json& j, TrainConfig base = {});

}  // namespace honeyfilter
