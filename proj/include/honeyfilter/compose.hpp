#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "honeyfilter/embedding.hpp"
#include "honeyfilter/generator.hpp"
#include "honeyfilter/tweak.hpp"

namespace honeyfilter {

// chaffing-with-a-password-model: the `count` nearest vocab words to the
// password in embedding space, by descending cosine.
std::vector<std::string> generate_password_model(std::string_view password,
                                                 const EmbeddingModel& model,
                                                 std::size_t count);

// chaffing-with-a-hybrid-model: tweaks each of the top-`count` model
// predictions once, retrying with boosted probabilities until every output
// is distinct and differs from the password.
std::vector<std::string> generate_hybrid(std::string_view password,
                                         const EmbeddingModel& model,
                                         const TweakParams& tweak,
                                         std::size_t count);

class PasswordModelGenerator final : public HoneywordGenerator {
 public:
  explicit PasswordModelGenerator(std::shared_ptr<const EmbeddingModel> model);
  GeneratorKind kind() const override { return GeneratorKind::kPasswordModel; }
  std::vector<std::string> generate(std::string_view password, std::size_t count,
                                    std::uint64_t stream) const override;

 private:
  std::shared_ptr<const EmbeddingModel> model_;
};

class HybridGenerator final : public HoneywordGenerator {
 public:
  HybridGenerator(std::shared_ptr<const EmbeddingModel> model, TweakParams tweak);
  GeneratorKind kind() const override { return GeneratorKind::kHybrid; }
  // Tweak stream seeded with derive_seed(tweak.rng_seed, stream).
  std::vector<std::string> generate(std::string_view password, std::size_t count,
                                    std::uint64_t stream) const override;

 private:
  std::shared_ptr<const EmbeddingModel> model_;
  TweakParams tweak_;
};

// Honeywords produced elsewhere (an LLM, PassGAN, ...), keyed by password.
struct ImportedHoneywordTable {
  std::map<std::string, std::vector<std::string>> rows;
  std::string provenance;
  std::size_t malformed_rows = 0;
};

// Reads `password<TAB>h1<TAB>...` rows. Rows with an empty cell, no
// honeywords, or a honeyword equal to the password are counted and skipped;
// repeated passwords have their lists concatenated.
ImportedHoneywordTable import_honeywords(const std::filesystem::path& path);
ImportedHoneywordTable import_honeywords(std::istream& in, std::string provenance);

void write_honeyword_row(std::ostream& out, std::string_view password,
                         const std::vector<std::string>& honeywords);

class ImportedGenerator final : public HoneywordGenerator {
 public:
  explicit ImportedGenerator(std::shared_ptr<const ImportedHoneywordTable> table);
  GeneratorKind kind() const override { return GeneratorKind::kImported; }
  // First `count` distinct stored honeywords; throws kVocabExhausted when the
  // password is absent or has too few.
  std::vector<std::string> generate(std::string_view password, std::size_t count,
                                    std::uint64_t stream) const override;

 private:
  std::shared_ptr<const ImportedHoneywordTable> table_;
};

}  // namespace honeyfilter
