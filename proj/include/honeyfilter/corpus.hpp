#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "honeyfilter/generator.hpp"

namespace honeyfilter {

inline constexpr std::size_t kDefaultMinLen = 8;
inline constexpr std::size_t kDefaultMaxLen = 32;

struct PasswordCorpus {
  std::vector<std::string> entries;  // UTF-8, never contain '\n'
  std::string source_tag;
  std::size_t min_len = 1;

  // Load statistics.
  std::size_t skipped_invalid_utf8 = 0;
  std::size_t dropped_short = 0;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

// Reads a newline-delimited UTF-8 password file. Lines shorter than `min_len`
// characters are dropped, lines that are not valid UTF-8 are skipped and
// counted. Duplicates are kept. A trailing '\r' is stripped.
PasswordCorpus load_passwords(const std::filesystem::path& path,
                              std::size_t min_len = kDefaultMinLen);
PasswordCorpus load_passwords(std::istream& in, std::size_t min_len,
                              std::string source_tag);

// Character vocabulary. Id 0 is padding, id 1 is "unknown"; known characters
// follow in codepoint order starting at id 2.
class Alphabet {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnknown = 1;

  Alphabet() = default;
  explicit Alphabet(std::vector<char32_t> chars);

  std::int32_t id(char32_t c) const;
  // Character for a known id; throws for pad/unknown/out-of-range.
  char32_t character(std::int32_t id) const;
  std::size_t size() const { return chars_.size() + 2; }
  const std::vector<char32_t>& chars() const { return chars_; }

  bool operator==(const Alphabet& other) const { return chars_ == other.chars_; }

 private:
  std::vector<char32_t> chars_;
  std::unordered_map<char32_t, std::int32_t> index_;
};

Alphabet build_alphabet(const PasswordCorpus& corpus);
Alphabet build_alphabet(const std::vector<std::string>& words);

struct TokenSeq {
  std::vector<std::int32_t> ids;  // size == max_len
  std::size_t length = 0;         // characters kept before padding
  std::size_t max_len = 0;
};

TokenSeq tokenize(std::string_view word, const Alphabet& alphabet,
                  std::size_t max_len = kDefaultMaxLen);
// Inverse of tokenize over the kept prefix; unknown ids become U+FFFD.
std::string detokenize(const TokenSeq& seq, const Alphabet& alphabet);

enum class Label : std::int32_t { kHoneyword = 0, kPassword = 1 };

struct LabeledPair {
  std::string word;
  Label label;
};

struct SplitSpec {
  double train_frac = 0.90;
  double val_frac = 0.05;
  double test_frac = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CorpusSplit {
  PasswordCorpus train;
  PasswordCorpus val;
  PasswordCorpus test;
};

// Seeded Fisher-Yates shuffle followed by contiguous slicing. Sizes are
// round(n * train_frac), round(n * val_frac), and the remainder.
CorpusSplit split(const PasswordCorpus& corpus, const SplitSpec& spec);

struct TrainingPairs {
  std::vector<LabeledPair> pairs;
  std::size_t skipped = 0;  // passwords the generator failed on
};

// For passwords[i] emits (password, kPassword) followed by the generator's
// rank-1 honeyword (stream i) labelled kHoneyword.
TrainingPairs build_training_pairs(const std::vector<std::string>& passwords,
                                   const HoneywordGenerator& generator);

struct SweetwordSet {
  std::int64_t account_id = 0;
  std::vector<std::string> sweetwords;
  std::size_t real_index = 0;

  std::size_t k() const { return sweetwords.size(); }
  const std::string& real() const { return sweetwords.at(real_index); }
};

struct EvalAccountOptions {
  std::size_t k = 20;
  std::size_t n_accounts = 500;
  std::uint64_t seed = 0;
  // Regeneration attempts (each on a fresh generator stream) when the
  // generator fails or cannot supply k-1 distinct honeywords.
  std::size_t retries = 3;
};

struct EvalAccounts {
  std::vector<SweetwordSet> accounts;
  std::size_t skipped = 0;   // generator could not fill the account
  std::size_t excluded = 0;  // candidate password present in the exclusion set
};

// Samples passwords without replacement (seeded shuffle), builds k-1
// honeywords for each and hides the password at a seeded-uniform position.
// Candidates that fail are skipped and the next shuffled password is tried,
// until n_accounts accounts exist or the pool is exhausted.
EvalAccounts build_eval_accounts(
    const std::vector<std::string>& passwords,
    const HoneywordGenerator& generator, const EvalAccountOptions& options,
    const std::unordered_set<std::string>& exclusion = {});

// TSV: account_id<TAB>real_index<TAB>sw1<TAB>...<TAB>swk
void write_accounts_tsv(std::ostream& out,
                        const std::vector<SweetwordSet>& accounts);
void write_accounts_tsv(const std::filesystem::path& path,
                        const std::vector<SweetwordSet>& accounts);
std::vector<SweetwordSet> read_accounts_tsv(std::istream& in);
std::vector<SweetwordSet> read_accounts_tsv(const std::filesystem::path& path);

std::vector<std::string> split_tabs(std::string_view line);

}  // namespace honeyfilter
